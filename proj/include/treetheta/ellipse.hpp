#pragma once

// Closed-form geometry of bivariate Gaussian quantile ellipses: contour
// level and height, tangent lines from an external point, the included
// angle between them, the vertex region where both tangent slopes are
// positive, and the generation-wise marginals of the tree random walk.
// Everything here is deterministic arithmetic; angles are radians.

#include <functional>

namespace treetheta {

struct BivariateGaussian {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double rho = 0.0;

    void check() const;  // throws std::invalid_argument
};

// lambda = -2 ln(alpha). The (1 - alpha) density contour of the
// standardized quadratic form sits at c^2 = (1 - rho^2) * lambda.
double lambda_from_alpha(double alpha);

struct QuantileEllipse {
    BivariateGaussian dist;
    double alpha = 0.05;
    double c2 = 0.0;              // contour level of the quadratic form
    double density_height = 0.0;  // density value along the contour
};

QuantileEllipse quantile_ellipse(const BivariateGaussian& dist, double alpha);

struct TangentSlopes {
    double k1 = 0.0;  // k1 <= k2
    double k2 = 0.0;
};

// Slopes of the two tangent lines to the ellipse through (x0, y0). The
// point must lie strictly outside; a vertical tangent (degenerate leading
// coefficient) is rejected rather than approximated.
TangentSlopes tangent_slopes(const QuantileEllipse& e, double x0, double y0);

// Vertex region guaranteeing two positive tangent slopes:
//   { x0 < mu1 - e1 and y0 < mu2 - e2 }  or  { x0 > mu1 + e1 and y0 > mu2 + e2 },
// with e_i = sigma_i * sqrt(lambda). Boundaries excluded.
bool positive_slope_region_contains(const BivariateGaussian& dist, double alpha,
                                    double x0, double y0);

// Included angle between the two tangent lines from (x0, y0), evaluated by
// the explicit closed form (no root-finding). Requires the vertex to lie in
// the positive-slope region; a negative radicand is an error, not a clamp.
double included_angle(const BivariateGaussian& dist, double alpha, double x0,
                      double y0);

// Generation index (1-based) -> correlation of that generation's increments.
using DampingFn = std::function<double(int)>;

// Marginal distribution of a generation-i node value when each generation-r
// step is bivariate normal with means (mu_x, mu_y), variances
// (sigma1^2, sigma2^2) and correlation f(r):
//   mean (i mu_x, i mu_y), variances (i sigma1^2, i sigma2^2),
//   covariance sigma1 sigma2 sum_{r<=i} f(r).
BivariateGaussian generation_marginal(double mu_x, double mu_y, double sigma1,
                                      double sigma2, const DampingFn& f,
                                      int generation);

// Sufficient condition for the included angle of generation_marginal(i) at
// the origin to be strictly decreasing in i. Requires mu_x, mu_y > 0; the
// rotated-frame angle gamma must satisfy cos(2 gamma) > 0 (reported as a
// distinct error otherwise, although positive means always satisfy it).
bool generation_monotone_condition(double mu_x, double mu_y, double sigma1,
                                   double sigma2, const DampingFn& f,
                                   double alpha);

// Normalization mean schedule: mu*_i = sqrt(eps_i * tau + lambda * sigma^2).
// eps choices: harmonic partial sums, or the damping-exact form
// (1 - f(i)) / (1 - rho) that makes the tangent geometry identical across
// generations.
double epsilon_harmonic(int i);
double epsilon_from_damping(const DampingFn& f, double rho, int i);
double target_mean(double epsilon_i, double tau, double sigma2, double alpha);

}  // namespace treetheta
