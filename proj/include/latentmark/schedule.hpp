#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "latentmark/errors.hpp"

namespace latentmark {

// Cumulative signal levels alpha_bar[0..T] with alpha_bar[0] = 1 and the
// rest strictly decreasing in (0, 1). Step t of the samplers moves between
// levels alpha_bar[t] and alpha_bar[t-1].
struct DiffusionSchedule {
    std::vector<double> alpha_bar;

    int steps() const { return int(alpha_bar.size()) - 1; }

    void validate() const;

    // Linear betas from beta_start to beta_end over base_steps, cumulative
    // products subsampled evenly down to T (base_steps >= T). base_steps ==
    // T uses every step.
    static DiffusionSchedule linear_beta(int T, int base_steps = 0,
                                         double beta_start = 1e-4,
                                         double beta_end = 0.02);

    // One "%.17g" alpha_bar value per line, for conformance dumps.
    void dump(std::ostream& os) const;
    static DiffusionSchedule load(std::istream& is);
};

// DDIM step coefficients at step t in [1, T]:
//   a_t = sqrt(alpha_bar[t-1] / alpha_bar[t])
//   b_t = sqrt(1 - alpha_bar[t-1]) - sqrt(alpha_bar[t-1] * (1 - alpha_bar[t]) / alpha_bar[t])
// so that denoising is x_{t-1} = a_t * x_t + b_t * eps.
std::pair<double, double> ddim_coeffs(const DiffusionSchedule& schedule, int t);

}  // namespace latentmark
