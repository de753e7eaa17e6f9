#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latentmark/distortion.hpp"
#include "latentmark/pipeline.hpp"
#include "latentmark/schedule.hpp"
#include "latentmark/watermark.hpp"

namespace latentmark {

// P(X >= k) for X ~ Binomial(n, 1/2), the null distribution of matched bits
// against an independent uniform payload. Log-space summation, accurate to
// ~1e-13 relative even far in the tail.
double binomial_tail(std::uint32_t n, std::uint32_t k);

// Smallest k with binomial_tail(n, k) <= fpr; n + 1 if no k qualifies.
std::uint32_t threshold_bits(std::uint32_t n, double fpr);

// accuracy * n matched bits against the threshold; the boundary counts as
// detected.
bool detect(double accuracy, std::uint32_t n, double fpr);

struct UserDatabase {
    std::vector<std::pair<std::uint32_t, Watermark>> users;  // (user_id, payload)

    // count users with distinct random payloads, ids 0..count-1
    static UserDatabase random(std::uint32_t count, const WatermarkConfig& config,
                               std::uint64_t seed);
    void save(std::ostream& os) const;
    static UserDatabase load(std::istream& is, const WatermarkConfig& config);
};

// Identifies the owner of a recovered payload: the global false-positive
// budget splits evenly across users (per-user fpr = fpr_global / N, union
// bound), the best-matching user wins if it clears the per-user threshold,
// and exact ties resolve to the lowest user_id.
std::optional<std::uint32_t> trace(const Watermark& recovered, const UserDatabase& db,
                                   double fpr_global);

// ---- evaluation campaign ----

struct CampaignConfig {
    WatermarkConfig wm;
    DiffusionSchedule schedule;
    double p = 0.93;
    double gamma = 0.8;
    std::uint64_t toy_seed = 11;
    std::uint64_t seed_rng = 1;        // per-image embedding streams
    std::uint64_t seed_userdb = 2;     // user payload generation
    std::uint64_t seed_distortion = 3; // per-cell distortion streams
    std::vector<Distortion> distortions;
    std::vector<RecoverMode> modes;
    std::uint32_t image_count = 20;
    std::uint32_t user_count = 50;
    double fpr = 1e-6;
    bool quantize = true;
    int threads = 0;  // 0 -> hardware_concurrency
};

struct PerImageResult {
    std::uint32_t image_id = 0;
    std::string distortion;
    std::string mode;
    std::uint32_t owner = 0;
    double bit_acc = 0.0;
    std::uint32_t matched_bits = 0;
    bool detected = false;
    std::optional<std::uint32_t> traced;
    bool trace_correct = false;
};

struct Aggregate {
    std::string distortion;
    std::string mode;
    std::uint32_t images = 0;
    double detect_tpr = 0.0;
    double trace_rate = 0.0;
    double mean_bit_acc = 0.0;
};

struct DetectionReport {
    std::uint32_t capacity_bits = 0;
    std::uint32_t tau_detect = 0;  // matched-bit thresholds
    std::uint32_t tau_trace = 0;
    double fpr = 0.0;
    std::uint32_t user_count = 0;
    std::vector<PerImageResult> per_image;  // sorted (image, distortion, mode)
    std::vector<Aggregate> aggregates;
};

// Runs image_count watermarked images (owner = image_id % user_count)
// through every distortion x recovery mode. Images fan out across threads;
// every cell derives its own seeds, so the report does not depend on the
// thread schedule.
DetectionReport evaluate(const CampaignConfig& config);

// Deterministic report serializations (stable order, fixed float format).
void write_csv(std::ostream& os, const DetectionReport& report);
std::string report_json(const DetectionReport& report, std::uint64_t config_hash);

}  // namespace latentmark
