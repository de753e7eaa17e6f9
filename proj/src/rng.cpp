#include "latentmark/rng.hpp"

#include "latentmark/normal.hpp"

namespace latentmark {

double SeededRng::next_normal() { return normal_quantile(next_unit()); }

std::uint64_t SeededRng::mix(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over a golden-ratio stream offset
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace latentmark
