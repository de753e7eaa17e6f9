#pragma once

#include <cstdint>
#include <vector>

#include "latentmark/tensor.hpp"

namespace latentmark {

// Single-channel 8-bit image, row-major. A (c=4, h, w) latent decodes to a
// (2h, 2w) image.
struct ImageTensor {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> pix;

    ImageTensor() = default;
    ImageTensor(std::uint32_t h_, std::uint32_t w_);

    std::uint8_t& at(std::uint32_t y, std::uint32_t x) { return pix[std::size_t(y) * w + x]; }
    std::uint8_t at(std::uint32_t y, std::uint32_t x) const { return pix[std::size_t(y) * w + x]; }
    std::size_t size() const { return pix.size(); }
    bool operator==(const ImageTensor&) const = default;
};

// Same geometry without the 8-bit quantization, for the lossless diagnostic
// path (decode_latent_float / encode_float_image are exact inverses).
struct FloatImage {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<double> pix;

    FloatImage() = default;
    FloatImage(std::uint32_t h_, std::uint32_t w_);

    double& at(std::uint32_t y, std::uint32_t x) { return pix[std::size_t(y) * w + x]; }
    double at(std::uint32_t y, std::uint32_t x) const { return pix[std::size_t(y) * w + x]; }
};

// Latent <-> image map. Channels pixel-shuffle into 2x2 blocks:
//   pixel(2y + ch/2, 2x + ch%2) <- z[ch, y, x]
// (an orthogonal permutation, so the map preserves the L2 norm), followed by
// the affine range map [-4, 4] -> [0, 255]. decode_latent additionally
// clamps and rounds to 8 bits; encode_image maps each 8-bit value back to
// its bucket center, so |encode(decode(z)) - z| <= (8/255)/2 = 8/510 per
// latent value whenever z stays inside [-4, 4].
//
// Requires c = 4 and even h, w.
ImageTensor decode_latent(const LatentTensor& z0);
FloatImage decode_latent_float(const LatentTensor& z0);
LatentTensor encode_image(const ImageTensor& img);
LatentTensor encode_float_image(const FloatImage& img);

constexpr double kLatentRange = 4.0;  // affine map endpoints +-4

}  // namespace latentmark
