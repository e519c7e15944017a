#pragma once

// The angle statistic and its normalization pipeline. estimate_angle is the
// data-side counterpart of the tangent geometry: two lines through a fixed
// vertex that bound at least a (1 - alpha) share of the points, averaged
// over all minimal candidates. tree_delta_theta runs the full pipeline:
// unit-series form -> per-generation increments -> optional sign flip ->
// optional per-generation normalization -> pooled angle at the origin.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "treetheta/tree.hpp"

namespace treetheta {

struct GenerationMoments {
    struct Entry {
        double mean_x = 0.0;
        double mean_y = 0.0;
        double sd_x = 0.0;  // maximum-likelihood sd (divides by n)
        double sd_y = 0.0;
        std::size_t count = 0;
    };

    std::vector<Entry> by_generation;  // index 0 = generation 1
};

GenerationMoments generation_moments(const GenerationIncrements& inc);

using EpsilonFn = std::function<double(int)>;

struct NormalizationConfig {
    double alpha = 0.05;
    double tau = 0.1;
    double sigma2 = 1.0;   // target variance after rescaling
    EpsilonFn epsilon;     // empty -> harmonic schedule
    bool normalize = true;
    bool sign_flip = false;
};

// Per-generation affine map sending generation i to mean exactly
// (mu*_i, mu*_i) and MLE sd exactly sigma: scale by sigma / sd_i, then add
// mu*_i - (sigma / sd_i) * mean_i. A single-observation generation carries
// no spread, so its point maps exactly to (mu*_i, mu*_i) and its variance
// is never used; a constant generation with n >= 2 is an error.
GenerationIncrements normalize_increments(const GenerationIncrements& inc,
                                          const GenerationMoments& moments,
                                          const NormalizationConfig& cfg);

struct AngleEstimate {
    double angle = 0.0;          // radians; mean of the candidate widths
    std::vector<double> widths;  // one entry per retained candidate window
    std::size_t window_size = 0; // points per candidate window (m)
    std::size_t point_count = 0; // n
};

// Angle statistic at a fixed vertex. Sorts the points by polar angle about
// the vertex (linearized at the largest circular gap), slides windows of
// exactly m = ceil((1 - alpha) n) consecutive points, and averages the
// window widths. Windows of width >= pi cannot be realized by two lines and
// are discarded; if none survive the angle is undefined and an error is
// raised. Points coinciding with the vertex are errors.
AngleEstimate estimate_angle(std::span<const IncrementPair> points,
                             double alpha, double vertex_x = 0.0,
                             double vertex_y = 0.0);

// Full pipeline on a paired tree; the pooled angle is taken at the origin.
AngleEstimate tree_delta_theta(const PairedTree& tree,
                               const NormalizationConfig& cfg);

// If the pooled increment correlation is negative, negate every dx (the
// (-dx, dy) reflection); second application is then a no-op. Returns the
// possibly-flipped increments and whether a flip happened.
std::pair<GenerationIncrements, bool> flip_x_if_anticorrelated(
    const GenerationIncrements& inc);

// Pearson correlation over all pooled increments.
double pooled_pearson(const GenerationIncrements& inc);

// Pearson correlation over all (x, y) observations in node storage order.
double pooled_pearson_values(const PairedTree& tree);

// (generation, r) for every generation whose correlation is defined (at
// least two increments, nonzero spread on both coordinates); the rest are
// omitted.
std::vector<std::pair<int, double>> per_generation_pearson(
    const GenerationIncrements& inc);

}  // namespace treetheta
