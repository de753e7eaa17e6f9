#pragma once

#include <cstdint>
#include <random>

namespace latentmark {

// Deterministic random source. std::mt19937_64 is exactly specified by the
// C++ standard, so a given seed produces the identical stream on every
// platform and compiler; all randomness in the library flows through this
// class to keep runs reproducible.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double strictly inside (0, 1), 53-bit resolution.
    // Never returns 0 or 1, so it is safe to feed into normal_quantile.
    double next_unit() {
        return (double(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // N(0,1) via the inverse-CDF transform of next_unit().
    double next_normal();

    // Uniform integer in [0, bound). bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) { return engine_() % bound; }

    // Derives a decorrelated child seed from (seed, stream) with the
    // splitmix64 finalizer. Used to give campaign cells independent streams.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

private:
    std::mt19937_64 engine_;
};

}  // namespace latentmark
