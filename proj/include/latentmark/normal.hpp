#pragma once

#include "latentmark/rng.hpp"
#include "latentmark/tensor.hpp"

namespace latentmark {

// Standard normal CDF, Phi(z).
double normal_cdf(double z);

// Standard normal density.
double normal_pdf(double z);

// Inverse CDF. u must lie strictly inside (0, 1); throws std::domain_error
// otherwise. Wichura's AS241 rational approximation refined by one Newton
// step on the CDF, absolute error well under 1e-12 across the range.
double normal_quantile(double u);

// i.i.d. N(0,1) entries drawn in row-major order from rng.
LatentTensor standard_normal_tensor(Shape shape, SeededRng& rng);

}  // namespace latentmark
