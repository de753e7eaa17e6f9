#include "latentmark/pipeline.hpp"

#include "latentmark/errors.hpp"

namespace latentmark {

RecoverMode parse_recover_mode(const std::string& name) {
    if (name == "edict") return RecoverMode::Edict;
    if (name == "ddim") return RecoverMode::Ddim;
    throw ConfigError("unknown recovery mode '" + name + "' (want edict or ddim)");
}

std::string to_string(RecoverMode mode) {
    return mode == RecoverMode::Edict ? "edict" : "ddim";
}

namespace {

LatentTensor watermarked_latent(const Watermark& wm, const WatermarkConfig& config,
                                SeededRng& rng) {
    const DiffusedMessage plain = diffuse(wm, config);
    const DiffusedMessage cipher = encrypt_message(plain, config);
    return embed(cipher, config, rng);
}

Watermark payload_from_latent(const LatentTensor& z_hat, const WatermarkConfig& config) {
    const DiffusedMessage cipher = extract_symbols(z_hat, config);
    const DiffusedMessage plain = decrypt_message(cipher, config);
    return recover_watermark(plain, config);
}

LatentTensor invert_by_mode(const LatentTensor& z0, const WatermarkConfig& config,
                            const Denoiser& denoiser, const DiffusionSchedule& schedule, double p,
                            RecoverMode mode) {
    if (!(z0.shape() == config.latent_shape)) throw ShapeError("latent shape mismatch");
    if (mode == RecoverMode::Edict) return edict_invert(z0, denoiser, schedule, p);
    return ddim_invert(z0, denoiser, schedule);
}

}  // namespace

Generated generate_watermarked(const Watermark& wm, const WatermarkConfig& config,
                               const Denoiser& denoiser, const DiffusionSchedule& schedule,
                               double p, SeededRng& rng) {
    LatentTensor z_T = watermarked_latent(wm, config, rng);
    LatentTensor z0 = edict_sample(z_T, denoiser, schedule, p);
    return Generated{decode_latent(z0), std::move(z_T)};
}

GeneratedFloat generate_watermarked_float(const Watermark& wm, const WatermarkConfig& config,
                                          const Denoiser& denoiser,
                                          const DiffusionSchedule& schedule, double p,
                                          SeededRng& rng) {
    LatentTensor z_T = watermarked_latent(wm, config, rng);
    LatentTensor z0 = edict_sample(z_T, denoiser, schedule, p);
    return GeneratedFloat{decode_latent_float(z0), std::move(z_T)};
}

Recovery recover_from_image(const ImageTensor& img, const WatermarkConfig& config,
                            const Denoiser& denoiser, const DiffusionSchedule& schedule, double p,
                            RecoverMode mode) {
    LatentTensor z_hat =
        invert_by_mode(encode_image(img), config, denoiser, schedule, p, mode);
    Watermark wm = payload_from_latent(z_hat, config);
    return Recovery{std::move(wm), std::move(z_hat)};
}

Recovery recover_from_float_image(const FloatImage& img, const WatermarkConfig& config,
                                  const Denoiser& denoiser, const DiffusionSchedule& schedule,
                                  double p, RecoverMode mode) {
    LatentTensor z_hat =
        invert_by_mode(encode_float_image(img), config, denoiser, schedule, p, mode);
    Watermark wm = payload_from_latent(z_hat, config);
    return Recovery{std::move(wm), std::move(z_hat)};
}

}  // namespace latentmark
