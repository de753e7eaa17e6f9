#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "latentmark/detection.hpp"
#include "latentmark/io.hpp"
#include "latentmark/schedule.hpp"
#include "latentmark/watermark.hpp"

namespace latentmark {

// Run configuration shared by the CLI verbs. Text format is one
// "key = value" per line, '#' comments; unknown keys are rejected.
struct RunConfig {
    std::uint32_t latent_c = 4, latent_h = 64, latent_w = 64;
    std::uint32_t f_c = 1, f_hw = 8, l = 1;

    int T = 50;
    // 0 means "equal to T" (betas laid out over the sampled steps). Set to
    // e.g. 1000 to subsample a longer base schedule instead; note that with
    // the bounded toy denoiser a long base schedule scales z_0 by
    // 1/sqrt(alpha_bar[T]) >> the [-4,4] image range, so the default keeps
    // the chain near unit scale.
    int schedule_base_steps = 0;
    double beta_start = 1e-4, beta_end = 0.02;

    double p = 0.93;
    double gamma = 0.8;
    std::uint64_t toy_seed = 11;
    std::uint64_t seed_rng = 1, seed_userdb = 2, seed_distortion = 3;

    std::vector<std::string> distortions = {
        "identity",          "colorjitter:factor=6", "gaublur:r=4",
        "gaunoise:sigma=0.05", "jpeg:qf=25",         "medblur:k=7",
        "randomcrop:area=0.6", "randomdrop:area=0.8", "resize:area=0.25",
        "spnoise:p=0.05",
    };
    std::vector<std::string> modes = {"edict", "ddim"};

    std::uint32_t images = 20;
    std::uint32_t users = 50;
    double fpr = 1e-6;
    bool quantize = true;
    int threads = 0;

    static RunConfig parse(std::string_view text);
    static RunConfig parse_file(const std::filesystem::path& path);

    void validate() const;

    // Canonical "key = value" serialization (fixed key order, %.17g floats);
    // hash() is FNV-1a 64 over it and is what outputs record.
    std::string canonical() const;
    std::uint64_t hash() const;

    Shape latent_shape() const { return Shape{latent_c, latent_h, latent_w}; }
    DiffusionSchedule make_schedule() const;
    WatermarkConfig make_watermark_config(const KeyMaterial& km) const;
    CampaignConfig make_campaign(const KeyMaterial& km) const;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace latentmark
