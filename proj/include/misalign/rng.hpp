#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace misalign {

// The distributions in <random> are implementation-defined, so every draw that
// feeds a simulation decision goes through the helpers below. std::mt19937_64
// itself is fully specified by the standard.

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stable 64-bit hash of an ordered list of integers, used for seed derivation.
constexpr std::uint64_t hash_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (std::uint64_t p : parts) {
        h = mix64(h ^ mix64(p));
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via the Marsaglia polar method.
    double normal();

    /// Normal with the given standard deviation, resampled until within +-4 sigma.
    double truncated_normal(double stddev);

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace misalign
