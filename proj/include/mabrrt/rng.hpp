#pragma once

#include <cstdint>
#include <random>

namespace mabrrt {

/// Seeded random stream used by planners, clustering and the regret harness.
/// All draws go through this wrapper so consumption order is well defined
/// and runs replay bit-for-bit under a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform01() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Uniform double in (0, hi]. Used for propagation durations, which must
    /// be strictly positive.
    double uniform_open0(double hi) {
        return hi * (1.0 - uniform01());
    }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    /// Normal draw. The distribution object is rebuilt per call so the
    /// stream has no hidden pair-caching state across copies.
    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace mabrrt
