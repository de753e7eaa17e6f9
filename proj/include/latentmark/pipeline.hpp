#pragma once

#include "latentmark/edict.hpp"
#include "latentmark/image.hpp"
#include "latentmark/watermark.hpp"

namespace latentmark {

enum class RecoverMode { Edict, Ddim };

RecoverMode parse_recover_mode(const std::string& name);
std::string to_string(RecoverMode mode);

struct Generated {
    ImageTensor image;
    LatentTensor z_T;  // the watermarked latent, kept for diagnostics
};

struct GeneratedFloat {
    FloatImage image;
    LatentTensor z_T;
};

// diffuse -> encrypt -> embed -> coupled sampling -> decode. rng supplies
// the per-dimension uniforms of the embedding.
Generated generate_watermarked(const Watermark& wm, const WatermarkConfig& config,
                               const Denoiser& denoiser, const DiffusionSchedule& schedule,
                               double p, SeededRng& rng);

// Same chain with 8-bit quantization disabled (float image).
GeneratedFloat generate_watermarked_float(const Watermark& wm, const WatermarkConfig& config,
                                          const Denoiser& denoiser,
                                          const DiffusionSchedule& schedule, double p,
                                          SeededRng& rng);

struct Recovery {
    Watermark watermark;
    LatentTensor z_T_hat;
};

// encode -> invert (coupled or naive DDIM per mode) -> extract -> decrypt ->
// majority vote.
Recovery recover_from_image(const ImageTensor& img, const WatermarkConfig& config,
                            const Denoiser& denoiser, const DiffusionSchedule& schedule,
                            double p, RecoverMode mode);
Recovery recover_from_float_image(const FloatImage& img, const WatermarkConfig& config,
                                  const Denoiser& denoiser, const DiffusionSchedule& schedule,
                                  double p, RecoverMode mode);

}  // namespace latentmark
