#pragma once

#include <cstdint>
#include <string_view>

#include "cmosim/normal.hpp"

namespace cmosim {

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based random stream: draw i is mix64(key + i*gamma), so a stream
// is fully determined by its key and position. Streams with distinct keys
// are statistically independent, which lets every (seed, iteration, name)
// triple own a private stream with no coordination between workers.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : counter_(key) {}

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix64(counter_);
    }

    // Uniform draw strictly inside (0,1): 53 mantissa bits, half-ulp offset.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the inverse CDF; deterministic across platforms,
    // unlike std::normal_distribution.
    double next_normal() { return norm_quantile(next_uniform()); }

private:
    std::uint64_t counter_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive the stream for (seed, iteration, name). Order-free: any worker can
// reconstruct the draws for any iteration.
inline RandomStream make_stream(std::uint64_t seed, std::uint64_t iteration,
                                std::string_view name) {
    std::uint64_t k = mix64(seed ^ 0x5851f42d4c957f2dULL);
    k = mix64(k ^ fnv1a64(name));
    k = mix64(k ^ (iteration * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL));
    return RandomStream(k);
}

} // namespace cmosim
