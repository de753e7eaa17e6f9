#include "latentmark/toy_denoiser.hpp"

#include <cmath>
#include <string>

#include "latentmark/rng.hpp"

namespace latentmark {

namespace {
constexpr int kD = ToyDenoiser::kSiteDim;
}

ToyDenoiser::ToyDenoiser(Shape latent_shape, double gamma, std::uint64_t seed)
    : shape_(latent_shape), gamma_(gamma) {
    if (shape_.c != 4 || shape_.h % 2 != 0 || shape_.w % 2 != 0 || shape_.h == 0 ||
        shape_.w == 0) {
        throw ConfigError("toy denoiser needs a (4, even, even) latent shape");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");

    // seeded Gaussian matrix orthogonalized by modified Gram-Schmidt
    SeededRng rng(seed);
    for (auto& v : mix_) v = rng.next_normal();
    for (int r = 0; r < kD; ++r) {
        double* row = &mix_[std::size_t(r) * kD];
        for (int prev = 0; prev < r; ++prev) {
            const double* q = &mix_[std::size_t(prev) * kD];
            double dot = 0.0;
            for (int j = 0; j < kD; ++j) dot += row[j] * q[j];
            for (int j = 0; j < kD; ++j) row[j] -= dot * q[j];
        }
        double norm = 0.0;
        for (int j = 0; j < kD; ++j) norm += row[j] * row[j];
        norm = std::sqrt(norm);
        if (norm < 1e-8) throw ConfigError("degenerate mix matrix seed");
        for (int j = 0; j < kD; ++j) row[j] /= norm;
    }
}

std::array<double, kD> ToyDenoiser::time_offset(int t) const {
    // transformer-style sinusoidal embedding, scaled to keep tanh active
    std::array<double, kD> c{};
    for (int r = 0; r < kD; ++r) {
        const double omega = std::pow(10000.0, -2.0 * (r / 2) / double(kD));
        c[r] = 0.5 * (r % 2 == 0 ? std::sin(t * omega) : std::cos(t * omega));
    }
    return c;
}

LatentTensor ToyDenoiser::eps(const LatentTensor& latent, int t) const {
    if (!(latent.shape() == shape_)) throw ShapeError("toy denoiser shape mismatch");
    const auto c = time_offset(t);
    const std::uint32_t bh = shape_.h / 2, bw = shape_.w / 2;
    LatentTensor out(shape_);
    double v[kD];
    for (std::uint32_t by = 0; by < bh; ++by) {
        for (std::uint32_t bx = 0; bx < bw; ++bx) {
            // gather the 2x2 neighborhood across all 4 channels
            for (int ch = 0; ch < 4; ++ch) {
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        v[ch * 4 + dy * 2 + dx] = latent.at(ch, 2 * by + dy, 2 * bx + dx);
                    }
                }
            }
            for (int r = 0; r < kD; ++r) {
                double acc = 0.0;
                const double* row = &mix_[std::size_t(r) * kD];
                for (int j = 0; j < kD; ++j) acc += row[j] * v[j];
                const double e = gamma_ * std::tanh(acc + c[r]);
                const int ch = r / 4, dy = (r % 4) / 2, dx = r % 2;
                out.at(ch, 2 * by + dy, 2 * bx + dx) = e;
            }
        }
    }
    return out;
}

}  // namespace latentmark
