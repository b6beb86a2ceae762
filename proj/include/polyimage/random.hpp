#pragma once

#include <cmath>
#include <cstdint>

namespace polyimage {

/// Counter-based generator: output i is SplitMix64's finalizer applied to seed + (i + 1) * golden gamma.
/// Any draw can be recomputed from (seed, counter) alone, which keeps sampling reproducible.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() {
        ++counter_;
        return mix(seed_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace polyimage
