#pragma once

#include <array>
#include <cstdint>

#include "latentmark/edict.hpp"

namespace latentmark {

// Deterministic nonlinear noise predictor used for latent-space experiments:
//   eps = gamma * tanh(M * v + c(t))  per site,
// where v is the 16-vector of one 2x2 spatial neighborhood across 4 channels,
// M is a fixed seeded orthogonal 16x16 mix, and c(t) is a sinusoidal time
// offset. Orthogonal M and gamma < 1 keep the map a contraction in eps, and
// tanh makes it nonlinear enough that naive DDIM inversion is visibly inexact.
class ToyDenoiser : public Denoiser {
public:
    static constexpr int kSiteDim = 16;  // 4 channels x 2x2 pixels

    explicit ToyDenoiser(Shape latent_shape, double gamma = 0.8,
                         std::uint64_t seed = 11);

    LatentTensor eps(const LatentTensor& latent, int t) const override;

    const Shape& latent_shape() const { return shape_; }
    double gamma() const { return gamma_; }
    // row-major 16x16
    const std::array<double, kSiteDim * kSiteDim>& mix_matrix() const { return mix_; }
    std::array<double, kSiteDim> time_offset(int t) const;

private:
    Shape shape_;
    double gamma_;
    std::array<double, kSiteDim * kSiteDim> mix_{};
};

}  // namespace latentmark
