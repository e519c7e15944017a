#pragma once

// Deterministic random streams for reproducible simulation runs.
//
// Core generator: PCG32 (the minimal pcg32 variant: 64-bit LCG state with
// multiplier 6364136223846793005 and an odd per-stream increment, output
// permuted by xorshift-high + random rotate). The same (seed, stream) pair
// yields the same sequence on every platform, and distinct stream ids give
// unrelated sequences, so parallel replicates can each own stream id ==
// replicate index without coordination.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace treetheta {

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(0u), inc_((stream << 1u) | 1u) {
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // Uniform in [0, 1) with the top 53 bits of a 64-bit draw.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Box-Muller pair of independent standard normals. Consumes exactly two
    // uniforms per call so the draw count per sample is fixed, which keeps
    // replicate streams aligned no matter what is sampled.
    std::pair<double, double> normal_pair() {
        const double u1 = 1.0 - next_double();  // (0, 1], keeps log() finite
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

  private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

}  // namespace treetheta
