#pragma once

#include "latentmark/schedule.hpp"
#include "latentmark/tensor.hpp"

namespace latentmark {

// Noise predictor interface. t is the schedule step index in [1, T].
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual LatentTensor eps(const LatentTensor& latent, int t) const = 0;
};

// Pair of latents evolved jointly; p in (0, 1] is the mixing weight. The
// inverse direction divides by p every step, so small p amplifies error.
struct CoupledLatents {
    LatentTensor x;
    LatentTensor y;
    double p = 0.93;

    CoupledLatents(LatentTensor x_, LatentTensor y_, double p_);
    static CoupledLatents duplicate(const LatentTensor& z, double p);
};

// Single DDIM update x_{t-1} = a_t * x + b_t * eps(partner, t). The noise
// estimate is always evaluated on the partner latent.
LatentTensor denoise_step(const LatentTensor& x, int t, const LatentTensor& partner,
                          const Denoiser& denoiser, const DiffusionSchedule& schedule);

// Exact inverse of denoise_step at the same t and partner:
// x_t = (x_{t-1} - b_t * eps(partner, t)) / a_t.
LatentTensor addnoise_step(const LatentTensor& x, int t, const LatentTensor& partner,
                           const Denoiser& denoiser, const DiffusionSchedule& schedule);

// One coupled denoising step. x_first selects which series updates first;
// the sampler alternates it per timestep (even t -> x first) to keep the
// two series symmetric.
//
// With x_first:
//   x_inter = a*x + b*eps(y)        y_inter = a*y + b*eps(x_inter)
//   x' = p*x_inter + (1-p)*y_inter  y' = p*y_inter + (1-p)*x'
// and the roles of x and y swap otherwise.
CoupledLatents edict_denoise_step(const CoupledLatents& cl, int t, const Denoiser& denoiser,
                                  const DiffusionSchedule& schedule, bool x_first);

// Exact inverse of edict_denoise_step at the same t and x_first: un-mix in
// reverse order, then invert the two DDIM updates.
CoupledLatents edict_noise_step(const CoupledLatents& cl, int t, const Denoiser& denoiser,
                                const DiffusionSchedule& schedule, bool x_first);

inline bool parity_x_first(int t) { return t % 2 == 0; }

// Full chains over t = T..1 (sampling) and t = 1..T (inversion), keeping the
// pair. These two compose to the identity up to floating-point error.
CoupledLatents edict_sample_coupled(const LatentTensor& z_T, const Denoiser& denoiser,
                                    const DiffusionSchedule& schedule, double p);
CoupledLatents edict_invert_coupled(const CoupledLatents& z0_pair, const Denoiser& denoiser,
                                    const DiffusionSchedule& schedule);

// Single-latent wrappers used by the image pipeline: start from a duplicated
// pair and return only the x series. Note edict_invert re-duplicates z_0, so
// composing these two is exact only up to the pair divergence accumulated
// during sampling (see edict_sample_coupled for the lossless form).
LatentTensor edict_sample(const LatentTensor& z_T, const Denoiser& denoiser,
                          const DiffusionSchedule& schedule, double p);
LatentTensor edict_invert(const LatentTensor& z_0, const Denoiser& denoiser,
                          const DiffusionSchedule& schedule, double p);

// Naive single-latent DDIM baseline. ddim_invert has to evaluate eps at the
// current latent instead of the (unknown) pre-step one, which is exactly the
// approximation error the coupled chains avoid.
LatentTensor ddim_sample(const LatentTensor& z_T, const Denoiser& denoiser,
                         const DiffusionSchedule& schedule);
LatentTensor ddim_invert(const LatentTensor& z_0, const Denoiser& denoiser,
                         const DiffusionSchedule& schedule);

}  // namespace latentmark
