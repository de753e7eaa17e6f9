#include "latentmark/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <vector>

#include "latentmark/errors.hpp"
#include "latentmark/rng.hpp"

namespace latentmark {

namespace {

std::uint8_t clamp_u8(double v) {
    return std::uint8_t(std::clamp(std::lround(v), 0L, 255L));
}

// symmetric reflect padding: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::uint32_t reflect(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return std::uint32_t(i);
}

ImageTensor color_jitter(const ImageTensor& img, double factor) {
    ImageTensor out(img.h, img.w);
    for (std::size_t i = 0; i < img.pix.size(); ++i) {
        out.pix[i] = clamp_u8(double(img.pix[i]) * factor);
    }
    return out;
}

ImageTensor gaussian_blur(const ImageTensor& img, int radius) {
    const double sigma = double(radius) / 2.0;
    std::vector<double> kernel(std::size_t(2 * radius) + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[std::size_t(i + radius)] = std::exp(-double(i) * i / (2.0 * sigma * sigma));
        sum += kernel[std::size_t(i + radius)];
    }
    for (auto& k : kernel) k /= sum;

    const long h = img.h, w = img.w;
    std::vector<double> tmp(img.pix.size());
    // horizontal pass
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[std::size_t(i + radius)] *
                       img.at(std::uint32_t(y), reflect(x + i, w));
            }
            tmp[std::size_t(y) * w + x] = acc;
        }
    }
    // vertical pass
    ImageTensor out(img.h, img.w);
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[std::size_t(i + radius)] * tmp[std::size_t(reflect(y + i, h)) * w + x];
            }
            out.at(std::uint32_t(y), std::uint32_t(x)) = clamp_u8(acc);
        }
    }
    return out;
}

ImageTensor gaussian_noise(const ImageTensor& img, double sigma, std::uint64_t seed) {
    SeededRng rng(seed);
    ImageTensor out(img.h, img.w);
    const double s = sigma * 255.0;  // sigma is specified in [0,1] pixel scale
    for (std::size_t i = 0; i < img.pix.size(); ++i) {
        out.pix[i] = clamp_u8(double(img.pix[i]) + s * rng.next_normal());
    }
    return out;
}

ImageTensor median_blur(const ImageTensor& img, int ksize) {
    const int r = ksize / 2;
    const long h = img.h, w = img.w;
    ImageTensor out(img.h, img.w);
    std::vector<std::uint8_t> window(std::size_t(ksize) * ksize);
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            std::size_t n = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    window[n++] = img.at(reflect(y + dy, h), reflect(x + dx, w));
                }
            }
            auto mid = window.begin() + long(n / 2);
            std::nth_element(window.begin(), mid, window.begin() + long(n));
            out.at(std::uint32_t(y), std::uint32_t(x)) = *mid;
        }
    }
    return out;
}

// keeps a random window of `area` fraction in place, zeroes the rest
ImageTensor random_crop(const ImageTensor& img, double area, std::uint64_t seed) {
    SeededRng rng(seed);
    const double side = std::sqrt(area);
    const auto wh = std::uint32_t(std::clamp<long>(std::lround(img.h * side), 1, img.h));
    const auto ww = std::uint32_t(std::clamp<long>(std::lround(img.w * side), 1, img.w));
    const auto oy = std::uint32_t(rng.next_below(img.h - wh + 1));
    const auto ox = std::uint32_t(rng.next_below(img.w - ww + 1));
    ImageTensor out(img.h, img.w);
    for (std::uint32_t y = oy; y < oy + wh; ++y) {
        for (std::uint32_t x = ox; x < ox + ww; ++x) out.at(y, x) = img.at(y, x);
    }
    return out;
}

// zeroes floor(area * pixels / 64) random 8x8 blocks
ImageTensor random_drop(const ImageTensor& img, double area, std::uint64_t seed) {
    if (img.h % 8 != 0 || img.w % 8 != 0) {
        throw DistortionError("randomdrop requires dims divisible by 8");
    }
    SeededRng rng(seed);
    const std::size_t bh = img.h / 8, bw = img.w / 8;
    std::vector<std::size_t> blocks(bh * bw);
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] = i;
    // Fisher-Yates with the deterministic rng
    for (std::size_t i = blocks.size() - 1; i > 0; --i) {
        std::swap(blocks[i], blocks[rng.next_below(i + 1)]);
    }
    const auto ndrop = std::size_t(std::floor(area * double(img.pix.size()) / 64.0));
    ImageTensor out = img;
    for (std::size_t i = 0; i < std::min(ndrop, blocks.size()); ++i) {
        const std::size_t by = blocks[i] / bw, bx = blocks[i] % bw;
        for (std::uint32_t dy = 0; dy < 8; ++dy) {
            for (std::uint32_t dx = 0; dx < 8; ++dx) {
                out.at(std::uint32_t(8 * by + dy), std::uint32_t(8 * bx + dx)) = 0;
            }
        }
    }
    return out;
}

double bilinear_sample(const std::vector<double>& src, long h, long w, double y, double x) {
    const double cy = std::clamp(y, 0.0, double(h - 1));
    const double cx = std::clamp(x, 0.0, double(w - 1));
    const long y0 = long(std::floor(cy)), x0 = long(std::floor(cx));
    const long y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
    const double fy = cy - y0, fx = cx - x0;
    const double top = src[std::size_t(y0) * w + x0] * (1 - fx) + src[std::size_t(y0) * w + x1] * fx;
    const double bot = src[std::size_t(y1) * w + x0] * (1 - fx) + src[std::size_t(y1) * w + x1] * fx;
    return top * (1 - fy) + bot * fy;
}

// bilinear resample to (nh, nw), pixel-center alignment
std::vector<double> resample(const std::vector<double>& src, long h, long w, long nh, long nw) {
    std::vector<double> dst(std::size_t(nh) * nw);
    const double sy = double(h) / double(nh), sx = double(w) / double(nw);
    for (long y = 0; y < nh; ++y) {
        for (long x = 0; x < nw; ++x) {
            dst[std::size_t(y) * nw + x] =
                bilinear_sample(src, h, w, (y + 0.5) * sy - 0.5, (x + 0.5) * sx - 0.5);
        }
    }
    return dst;
}

ImageTensor resize_down_up(const ImageTensor& img, double area) {
    const double side = std::sqrt(area);
    const long h = img.h, w = img.w;
    const long nh = std::max(1L, std::lround(h * side));
    const long nw = std::max(1L, std::lround(w * side));
    std::vector<double> src(img.pix.begin(), img.pix.end());
    const auto small = resample(src, h, w, nh, nw);
    const auto back = resample(small, nh, nw, h, w);
    ImageTensor out(img.h, img.w);
    for (std::size_t i = 0; i < out.pix.size(); ++i) out.pix[i] = clamp_u8(back[i]);
    return out;
}

ImageTensor salt_pepper(const ImageTensor& img, double p, std::uint64_t seed) {
    SeededRng rng(seed);
    ImageTensor out = img;
    for (auto& v : out.pix) {
        const double u = rng.next_unit();
        if (u < p * 0.5) {
            v = 0;
        } else if (u < p) {
            v = 255;
        }
    }
    return out;
}

// ---- JPEG proxy: 8x8 DCT + standard luminance table, libjpeg QF scaling ----

const int kLumaTable[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

void quant_table(int quality, int table[64]) {
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    for (int i = 0; i < 64; ++i) {
        table[i] = std::clamp((kLumaTable[i] * scale + 50) / 100, 1, 255);
    }
}

// orthonormal DCT-II basis factor
double dct_c(int k) { return k == 0 ? std::sqrt(0.125) : 0.5; }

ImageTensor jpeg_proxy(const ImageTensor& img, int quality) {
    int qt[64];
    quant_table(quality, qt);

    // cosine lookup: cos((2x+1) u pi / 16)
    double cosv[8][8];
    for (int u = 0; u < 8; ++u) {
        for (int x = 0; x < 8; ++x) {
            cosv[u][x] = std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
        }
    }

    const long h = img.h, w = img.w;
    ImageTensor out(img.h, img.w);
    double block[8][8], coef[8][8];
    for (long by = 0; by < h; by += 8) {
        for (long bx = 0; bx < w; bx += 8) {
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    // replicate edge pixels when dims are not multiples of 8
                    const auto sy = std::uint32_t(std::min(by + y, h - 1));
                    const auto sx = std::uint32_t(std::min(bx + x, w - 1));
                    block[y][x] = double(img.at(sy, sx)) - 128.0;
                }
            }
            // forward DCT, quantize, dequantize
            for (int v = 0; v < 8; ++v) {
                for (int u = 0; u < 8; ++u) {
                    double acc = 0.0;
                    for (int y = 0; y < 8; ++y) {
                        for (int x = 0; x < 8; ++x) {
                            acc += block[y][x] * cosv[v][y] * cosv[u][x];
                        }
                    }
                    acc *= dct_c(v) * dct_c(u);
                    const int q = qt[v * 8 + u];
                    coef[v][u] = double(std::lround(acc / q)) * q;
                }
            }
            // inverse DCT
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    double acc = 0.0;
                    for (int v = 0; v < 8; ++v) {
                        for (int u = 0; u < 8; ++u) {
                            acc += dct_c(v) * dct_c(u) * coef[v][u] * cosv[v][y] * cosv[u][x];
                        }
                    }
                    if (by + y < h && bx + x < w) {
                        out.at(std::uint32_t(by + y), std::uint32_t(bx + x)) = clamp_u8(acc + 128.0);
                    }
                }
            }
        }
    }
    return out;
}

const std::map<std::string, DistortionKind>& kind_names() {
    static const std::map<std::string, DistortionKind> names = {
        {"identity", DistortionKind::Identity},
        {"colorjitter", DistortionKind::ColorJitter},
        {"gaublur", DistortionKind::GauBlur},
        {"gaunoise", DistortionKind::GauNoise},
        {"jpeg", DistortionKind::Jpeg},
        {"medblur", DistortionKind::MedBlur},
        {"randomcrop", DistortionKind::RandomCrop},
        {"randomdrop", DistortionKind::RandomDrop},
        {"resize", DistortionKind::Resize},
        {"spnoise", DistortionKind::SpNoise},
    };
    return names;
}

std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

Distortion Distortion::parse(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= spec.size()) {
        const std::size_t colon = spec.find(':', start);
        if (colon == std::string::npos) {
            parts.push_back(spec.substr(start));
            break;
        }
        parts.push_back(spec.substr(start, colon - start));
        start = colon + 1;
    }
    if (parts.empty() || parts[0].empty()) throw DistortionError("empty distortion spec");

    const auto it = kind_names().find(parts[0]);
    if (it == kind_names().end()) throw DistortionError("unknown distortion kind '" + parts[0] + "'");

    Distortion d;
    d.kind = it->second;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::size_t eq = parts[i].find('=');
        if (eq == std::string::npos) {
            throw DistortionError("expected key=value, got '" + parts[i] + "'");
        }
        const std::string key = parts[i].substr(0, eq);
        const std::string value = parts[i].substr(eq + 1);
        double num = 0.0;
        try {
            std::size_t pos = 0;
            num = std::stod(value, &pos);
            if (pos != value.size()) throw DistortionError("");
        } catch (...) {
            throw DistortionError("bad numeric value '" + value + "' for '" + key + "'");
        }
        if (key == "seed") {
            d.seed = std::uint64_t(num);
        } else if (key == "factor" && d.kind == DistortionKind::ColorJitter) {
            d.factor = num;
        } else if (key == "r" && d.kind == DistortionKind::GauBlur) {
            d.radius = int(num);
        } else if (key == "sigma" && d.kind == DistortionKind::GauNoise) {
            d.sigma = num;
        } else if (key == "qf" && d.kind == DistortionKind::Jpeg) {
            d.quality = int(num);
        } else if (key == "k" && d.kind == DistortionKind::MedBlur) {
            d.ksize = int(num);
        } else if (key == "area" && (d.kind == DistortionKind::RandomCrop ||
                                     d.kind == DistortionKind::RandomDrop ||
                                     d.kind == DistortionKind::Resize)) {
            d.area = num;
        } else if (key == "p" && d.kind == DistortionKind::SpNoise) {
            d.p = num;
        } else {
            throw DistortionError("parameter '" + key + "' does not apply to '" + parts[0] + "'");
        }
    }
    d.validate();
    return d;
}

void Distortion::validate() const {
    switch (kind) {
        case DistortionKind::Identity:
            break;
        case DistortionKind::ColorJitter:
            if (!(factor > 0.0 && factor <= 100.0)) throw DistortionError("factor out of (0, 100]");
            break;
        case DistortionKind::GauBlur:
            if (radius < 1 || radius > 64) throw DistortionError("blur radius out of [1, 64]");
            break;
        case DistortionKind::GauNoise:
            if (!(sigma >= 0.0 && sigma <= 1.0)) throw DistortionError("sigma out of [0, 1]");
            break;
        case DistortionKind::Jpeg:
            if (quality < 1 || quality > 100) throw DistortionError("qf out of [1, 100]");
            break;
        case DistortionKind::MedBlur:
            if (ksize < 1 || ksize > 31 || ksize % 2 == 0) {
                throw DistortionError("median k must be odd in [1, 31]");
            }
            break;
        case DistortionKind::RandomCrop:
        case DistortionKind::RandomDrop:
        case DistortionKind::Resize:
            if (!(area > 0.0 && area <= 1.0)) throw DistortionError("area out of (0, 1]");
            break;
        case DistortionKind::SpNoise:
            if (!(p >= 0.0 && p <= 1.0)) throw DistortionError("p out of [0, 1]");
            break;
    }
}

std::string Distortion::label() const {
    switch (kind) {
        case DistortionKind::Identity:
            return "identity";
        case DistortionKind::ColorJitter:
            return "colorjitter:factor=" + format_param(factor);
        case DistortionKind::GauBlur:
            return "gaublur:r=" + std::to_string(radius);
        case DistortionKind::GauNoise:
            return "gaunoise:sigma=" + format_param(sigma);
        case DistortionKind::Jpeg:
            return "jpeg:qf=" + std::to_string(quality);
        case DistortionKind::MedBlur:
            return "medblur:k=" + std::to_string(ksize);
        case DistortionKind::RandomCrop:
            return "randomcrop:area=" + format_param(area);
        case DistortionKind::RandomDrop:
            return "randomdrop:area=" + format_param(area);
        case DistortionKind::Resize:
            return "resize:area=" + format_param(area);
        case DistortionKind::SpNoise:
            return "spnoise:p=" + format_param(p);
    }
    return "?";
}

ImageTensor apply_distortion(const ImageTensor& img, const Distortion& d) {
    if (img.h == 0 || img.w == 0 || img.pix.size() != std::size_t(img.h) * img.w) {
        throw ShapeError("malformed image");
    }
    d.validate();
    switch (d.kind) {
        case DistortionKind::Identity:
            return img;
        case DistortionKind::ColorJitter:
            return color_jitter(img, d.factor);
        case DistortionKind::GauBlur:
            return gaussian_blur(img, d.radius);
        case DistortionKind::GauNoise:
            return gaussian_noise(img, d.sigma, d.seed);
        case DistortionKind::Jpeg:
            return jpeg_proxy(img, d.quality);
        case DistortionKind::MedBlur:
            return median_blur(img, d.ksize);
        case DistortionKind::RandomCrop:
            return random_crop(img, d.area, d.seed);
        case DistortionKind::RandomDrop:
            return random_drop(img, d.area, d.seed);
        case DistortionKind::Resize:
            return resize_down_up(img, d.area);
        case DistortionKind::SpNoise:
            return salt_pepper(img, d.p, d.seed);
    }
    throw DistortionError("unhandled distortion kind");
}

}  // namespace latentmark
