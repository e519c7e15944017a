#pragma once

// Synthetic paired-tree generators. Increments are drawn per generation as
// bivariate normals whose correlation is damped by generation via f(i);
// non-Gaussian marginals are produced by pushing each coordinate through
// its own normal CDF and the target family's inverse CDF (the correlation
// structure survives, the marginals change), or by discretizing into
// interval indices.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "treetheta/distributions.hpp"
#include "treetheta/rng.hpp"
#include "treetheta/tree.hpp"

namespace treetheta {

enum class DampingKind {
    exponential,  // f(i) = rho^i
    linear,       // f(i) = (1 - (i - 1) / I) * rho
};

double damping_value(DampingKind kind, int generation, double rho,
                     int max_generation);

enum class MarginalKind {
    gaussian,
    gamma,
    fisher_f,
    student_t,
    poisson,
    equal_width,  // increments replaced by equal-width interval indices
    equal_freq,   // increments replaced by equal-frequency interval indices
};

const char* marginal_name(MarginalKind kind);

struct MarginalSpec {
    MarginalKind kind = MarginalKind::gaussian;
    Family family = Family::normal(0.0, 1.0);  // target for the copula kinds
    int bins = 10;                             // for the discretized kinds
};

struct GenConfig {
    int branching = 2;
    int depth = 7;
    int series_length = 1;  // observations per node; 1 = unit-series form
    double mu_x = 2.0;
    double mu_y = 2.0;
    double sigma1_sq = 1.0;
    double sigma2_sq = 1.0;
    double rho = 0.5;
    DampingKind damping = DampingKind::exponential;
    double anchor_x = 0.0;
    double anchor_y = 0.0;
    MarginalSpec marginal;
    std::uint64_t seed = 0;  // used by the self-seeding overload

    void check() const;  // throws std::invalid_argument
};

// One draw from N((mu1, mu2), [[s1^2, r s1 s2], [r s1 s2, s2^2]]) built from
// two independent standard normals through the lower-triangular factor.
std::pair<double, double> sample_bivariate_normal(double mu1, double mu2,
                                                  double sigma1, double sigma2,
                                                  double r, RngStream& rng);

// Full branching^depth tree with node ids n1, n2, ... in breadth-first
// order. Increment draw order is fixed (node storage order, then series
// position), so identical config + stream state ==> identical output.
PairedTree generate_pair(const GenConfig& cfg, RngStream& rng);
PairedTree generate_pair(const GenConfig& cfg);  // seeds RngStream(cfg.seed)

// Continuous-family marginal transform: for each pair, u = Phi((dx - mu_x)
// / sigma1) and dx' = F^-1(u) (same per y). A u that rounds to exactly 0 or
// 1 is an error naming the offending sample.
std::vector<IncrementPair> transform_marginals(
    std::span<const IncrementPair> raw, double mu_x, double mu_y,
    double sigma1, double sigma2, const Family& target);

// Poisson variant using the bracketing rule of inverse_cdf(poisson, .).
std::vector<IncrementPair> transform_marginals_poisson(
    std::span<const IncrementPair> raw, double mu_x, double mu_y,
    double sigma1, double sigma2, double mean);

// Interval index (1-based) per sample. equal_width cuts [min, max] into
// `bins` equal intervals (max lands in the top one); equal_freq assigns by
// rank with ties kept in stable sample order. equal_width needs a
// non-constant sample; equal_freq needs bins <= n.
std::vector<int> discretize(std::span<const double> sample, MarginalKind method,
                            int bins);

}  // namespace treetheta
