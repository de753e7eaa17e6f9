#include "latentmark/image.hpp"

#include <algorithm>
#include <cmath>

#include "latentmark/errors.hpp"

namespace latentmark {

ImageTensor::ImageTensor(std::uint32_t h_, std::uint32_t w_) : h(h_), w(w_) {
    if (h == 0 || w == 0) throw ShapeError("image dims must be nonzero");
    pix.assign(std::size_t(h) * w, 0);
}

FloatImage::FloatImage(std::uint32_t h_, std::uint32_t w_) : h(h_), w(w_) {
    if (h == 0 || w == 0) throw ShapeError("image dims must be nonzero");
    pix.assign(std::size_t(h) * w, 0.0);
}

namespace {

constexpr double kToPix = 255.0 / (2.0 * kLatentRange);
constexpr double kToLatent = (2.0 * kLatentRange) / 255.0;

void check_decodable(const Shape& s) {
    if (s.c != 4 || s.h == 0 || s.w == 0) {
        throw ShapeError("decode expects a 4-channel latent");
    }
}

void check_encodable(std::uint32_t h, std::uint32_t w) {
    if (h == 0 || w == 0 || h % 2 != 0 || w % 2 != 0) {
        throw ShapeError("encode expects even image dims");
    }
}

}  // namespace

FloatImage decode_latent_float(const LatentTensor& z0) {
    check_decodable(z0.shape());
    const Shape& s = z0.shape();
    FloatImage img(2 * s.h, 2 * s.w);
    for (std::uint32_t ch = 0; ch < 4; ++ch) {
        const std::uint32_t dy = ch / 2, dx = ch % 2;
        for (std::uint32_t y = 0; y < s.h; ++y) {
            for (std::uint32_t x = 0; x < s.w; ++x) {
                img.at(2 * y + dy, 2 * x + dx) = (z0.at(ch, y, x) + kLatentRange) * kToPix;
            }
        }
    }
    return img;
}

ImageTensor decode_latent(const LatentTensor& z0) {
    const FloatImage f = decode_latent_float(z0);
    ImageTensor img(f.h, f.w);
    for (std::size_t i = 0; i < f.pix.size(); ++i) {
        const long v = std::lround(f.pix[i]);
        img.pix[i] = std::uint8_t(std::clamp(v, 0L, 255L));
    }
    return img;
}

LatentTensor encode_float_image(const FloatImage& img) {
    check_encodable(img.h, img.w);
    const Shape s{4, img.h / 2, img.w / 2};
    LatentTensor z(s);
    for (std::uint32_t ch = 0; ch < 4; ++ch) {
        const std::uint32_t dy = ch / 2, dx = ch % 2;
        for (std::uint32_t y = 0; y < s.h; ++y) {
            for (std::uint32_t x = 0; x < s.w; ++x) {
                z.at(ch, y, x) = img.at(2 * y + dy, 2 * x + dx) * kToLatent - kLatentRange;
            }
        }
    }
    return z;
}

LatentTensor encode_image(const ImageTensor& img) {
    check_encodable(img.h, img.w);
    FloatImage f(img.h, img.w);
    // 8-bit value k stands for its bucket center
    for (std::size_t i = 0; i < img.pix.size(); ++i) f.pix[i] = double(img.pix[i]);
    return encode_float_image(f);
}

}  // namespace latentmark
