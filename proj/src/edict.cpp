#include "latentmark/edict.hpp"

namespace latentmark {

namespace {

void check_shapes(const LatentTensor& a, const LatentTensor& b) {
    if (!(a.shape() == b.shape())) throw ShapeError("coupled latents must share a shape");
}

}  // namespace

CoupledLatents::CoupledLatents(LatentTensor x_, LatentTensor y_, double p_)
    : x(std::move(x_)), y(std::move(y_)), p(p_) {
    check_shapes(x, y);
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("mixing weight p must be in (0, 1]");
}

CoupledLatents CoupledLatents::duplicate(const LatentTensor& z, double p) {
    return CoupledLatents(z, z, p);
}

LatentTensor denoise_step(const LatentTensor& x, int t, const LatentTensor& partner,
                          const Denoiser& denoiser, const DiffusionSchedule& schedule) {
    check_shapes(x, partner);
    const auto [a, b] = ddim_coeffs(schedule, t);
    const LatentTensor e = denoiser.eps(partner, t);
    return linear_combine(a, x, b, e);
}

LatentTensor addnoise_step(const LatentTensor& x, int t, const LatentTensor& partner,
                           const Denoiser& denoiser, const DiffusionSchedule& schedule) {
    check_shapes(x, partner);
    const auto [a, b] = ddim_coeffs(schedule, t);
    const LatentTensor e = denoiser.eps(partner, t);
    LatentTensor r(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = (x[i] - b * e[i]) / a;
    return r;
}

CoupledLatents edict_denoise_step(const CoupledLatents& cl, int t, const Denoiser& denoiser,
                                  const DiffusionSchedule& schedule, bool x_first) {
    const double p = cl.p;
    if (x_first) {
        LatentTensor x_inter = denoise_step(cl.x, t, cl.y, denoiser, schedule);
        LatentTensor y_inter = denoise_step(cl.y, t, x_inter, denoiser, schedule);
        LatentTensor x_next = linear_combine(p, x_inter, 1.0 - p, y_inter);
        LatentTensor y_next = linear_combine(p, y_inter, 1.0 - p, x_next);
        return CoupledLatents(std::move(x_next), std::move(y_next), p);
    }
    LatentTensor y_inter = denoise_step(cl.y, t, cl.x, denoiser, schedule);
    LatentTensor x_inter = denoise_step(cl.x, t, y_inter, denoiser, schedule);
    LatentTensor y_next = linear_combine(p, y_inter, 1.0 - p, x_inter);
    LatentTensor x_next = linear_combine(p, x_inter, 1.0 - p, y_next);
    return CoupledLatents(std::move(x_next), std::move(y_next), p);
}

CoupledLatents edict_noise_step(const CoupledLatents& cl, int t, const Denoiser& denoiser,
                                const DiffusionSchedule& schedule, bool x_first) {
    const double p = cl.p;
    const double q = (1.0 - p) / p;
    if (x_first) {
        // undo the two mixing lines in reverse order, then the DDIM updates
        LatentTensor y_inter = linear_combine(1.0 / p, cl.y, -q, cl.x);
        LatentTensor x_inter = linear_combine(1.0 / p, cl.x, -q, y_inter);
        LatentTensor y_prev = addnoise_step(y_inter, t, x_inter, denoiser, schedule);
        LatentTensor x_prev = addnoise_step(x_inter, t, y_prev, denoiser, schedule);
        return CoupledLatents(std::move(x_prev), std::move(y_prev), p);
    }
    LatentTensor x_inter = linear_combine(1.0 / p, cl.x, -q, cl.y);
    LatentTensor y_inter = linear_combine(1.0 / p, cl.y, -q, x_inter);
    LatentTensor x_prev = addnoise_step(x_inter, t, y_inter, denoiser, schedule);
    LatentTensor y_prev = addnoise_step(y_inter, t, x_prev, denoiser, schedule);
    return CoupledLatents(std::move(x_prev), std::move(y_prev), p);
}

CoupledLatents edict_sample_coupled(const LatentTensor& z_T, const Denoiser& denoiser,
                                    const DiffusionSchedule& schedule, double p) {
    CoupledLatents cl = CoupledLatents::duplicate(z_T, p);
    for (int t = schedule.steps(); t >= 1; --t) {
        cl = edict_denoise_step(cl, t, denoiser, schedule, parity_x_first(t));
    }
    return cl;
}

CoupledLatents edict_invert_coupled(const CoupledLatents& z0_pair, const Denoiser& denoiser,
                                    const DiffusionSchedule& schedule) {
    CoupledLatents cl = z0_pair;
    for (int t = 1; t <= schedule.steps(); ++t) {
        cl = edict_noise_step(cl, t, denoiser, schedule, parity_x_first(t));
    }
    return cl;
}

LatentTensor edict_sample(const LatentTensor& z_T, const Denoiser& denoiser,
                          const DiffusionSchedule& schedule, double p) {
    return edict_sample_coupled(z_T, denoiser, schedule, p).x;
}

LatentTensor edict_invert(const LatentTensor& z_0, const Denoiser& denoiser,
                          const DiffusionSchedule& schedule, double p) {
    return edict_invert_coupled(CoupledLatents::duplicate(z_0, p), denoiser, schedule).x;
}

LatentTensor ddim_sample(const LatentTensor& z_T, const Denoiser& denoiser,
                         const DiffusionSchedule& schedule) {
    LatentTensor x = z_T;
    for (int t = schedule.steps(); t >= 1; --t) {
        x = denoise_step(x, t, x, denoiser, schedule);
    }
    return x;
}

LatentTensor ddim_invert(const LatentTensor& z_0, const Denoiser& denoiser,
                         const DiffusionSchedule& schedule) {
    LatentTensor x = z_0;
    for (int t = 1; t <= schedule.steps(); ++t) {
        // eps belongs at the pre-step latent x_t, which is unknown here;
        // evaluating at the current x is the baseline's approximation
        const auto [a, b] = ddim_coeffs(schedule, t);
        const LatentTensor e = denoiser.eps(x, t);
        LatentTensor next(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) next[i] = (x[i] - b * e[i]) / a;
        x = std::move(next);
    }
    return x;
}

}  // namespace latentmark
