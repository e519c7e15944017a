#include "treetheta/ellipse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "treetheta/errors.hpp"

namespace treetheta {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in (0, 1)");
}

// Standardized quadratic form z1^2 - 2 rho z1 z2 + z2^2 at (x0, y0); the
// (1 - alpha) contour is the level set {Q = (1 - rho^2) lambda}.
double quad_form(const BivariateGaussian& d, double x0, double y0) {
    const double z1 = (x0 - d.mu1) / d.sigma1;
    const double z2 = (y0 - d.mu2) / d.sigma2;
    return z1 * z1 - 2.0 * d.rho * z1 * z2 + z2 * z2;
}

}  // namespace

void BivariateGaussian::check() const {
    if (!std::isfinite(mu1) || !std::isfinite(mu2) || !std::isfinite(sigma1) ||
        !std::isfinite(sigma2) || !std::isfinite(rho))
        throw std::invalid_argument("bivariate normal: parameters must be finite");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("bivariate normal: sigmas must be > 0");
    if (!(std::fabs(rho) < 1.0))
        throw std::invalid_argument("bivariate normal: |rho| must be < 1");
}

double lambda_from_alpha(double alpha) {
    check_alpha(alpha);
    return -2.0 * std::log(alpha);
}

QuantileEllipse quantile_ellipse(const BivariateGaussian& dist, double alpha) {
    dist.check();
    const double lambda = lambda_from_alpha(alpha);
    const double one_minus_r2 = 1.0 - dist.rho * dist.rho;
    QuantileEllipse e;
    e.dist = dist;
    e.alpha = alpha;
    e.c2 = one_minus_r2 * lambda;
    e.density_height = alpha / (2.0 * std::numbers::pi * dist.sigma1 *
                                dist.sigma2 * std::sqrt(one_minus_r2));
    return e;
}

TangentSlopes tangent_slopes(const QuantileEllipse& e, double x0, double y0) {
    e.dist.check();
    check_alpha(e.alpha);
    const double lambda = lambda_from_alpha(e.alpha);
    if (!(quad_form(e.dist, x0, y0) > e.c2))
        throw DataError("tangent lines need a point strictly outside the ellipse");

    const double u1 = e.dist.mu1 - x0;
    const double u2 = e.dist.mu2 - y0;
    const double s1 = e.dist.sigma1;
    const double s2 = e.dist.sigma2;
    const double a = u1 * u1 - lambda * s1 * s1;
    const double b = -2.0 * (u1 * u2 - lambda * e.dist.rho * s1 * s2);
    const double c = u2 * u2 - lambda * s2 * s2;
    if (std::fabs(a) < 1e-12)
        throw DataError("vertical tangent: slope quadratic is degenerate");
    const double disc = b * b - 4.0 * a * c;
    if (!(disc > 0.0))
        throw DataError("tangent slopes are not two distinct real roots");

    // Stable quadratic roots: avoid cancellation in -b -+ sqrt(disc).
    const double s = b >= 0.0 ? 1.0 : -1.0;
    const double q = -(b + s * std::sqrt(disc)) / 2.0;
    double k1 = q / a;
    double k2 = c / q;
    if (k1 > k2) std::swap(k1, k2);
    return {k1, k2};
}

bool positive_slope_region_contains(const BivariateGaussian& dist, double alpha,
                                    double x0, double y0) {
    dist.check();
    const double lambda = lambda_from_alpha(alpha);
    const double e1 = dist.sigma1 * std::sqrt(lambda);
    const double e2 = dist.sigma2 * std::sqrt(lambda);
    return (x0 < dist.mu1 - e1 && y0 < dist.mu2 - e2) ||
           (x0 > dist.mu1 + e1 && y0 > dist.mu2 + e2);
}

double included_angle(const BivariateGaussian& dist, double alpha, double x0,
                      double y0) {
    dist.check();
    const double lambda = lambda_from_alpha(alpha);
    if (!positive_slope_region_contains(dist, alpha, x0, y0))
        throw DataError(
            "included angle needs the vertex inside the positive-slope region");

    const double u1 = dist.mu1 - x0;
    const double u2 = dist.mu2 - y0;
    const double s1sq = dist.sigma1 * dist.sigma1;
    const double s2sq = dist.sigma2 * dist.sigma2;
    const double cross = lambda * dist.sigma1 * dist.sigma2 * dist.rho - u1 * u2;
    const double num =
        cross * cross - (lambda * lambda * s1sq * s2sq + u1 * u1 * u2 * u2 -
                         lambda * s1sq * u2 * u2 - lambda * s2sq * u1 * u1);
    if (num < 0.0)
        throw DataError("included angle: negative radicand");
    const double half_trace =
        (lambda * (s1sq + s2sq) - (u1 * u1 + u2 * u2)) / 2.0;
    const double den = half_trace * half_trace;
    if (!(den > 0.0))
        throw DataError("included angle: degenerate denominator");
    return std::atan(std::sqrt(num / den));
}

BivariateGaussian generation_marginal(double mu_x, double mu_y, double sigma1,
                                      double sigma2, const DampingFn& f,
                                      int generation) {
    if (generation < 1)
        throw std::invalid_argument("generation must be >= 1");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("sigmas must be > 0");
    if (!f) throw std::invalid_argument("damping function is empty");
    double sum_f = 0.0;
    for (int r = 1; r <= generation; ++r) sum_f += f(r);
    const double i = generation;
    const double rho_i = sum_f / i;
    if (!(std::fabs(rho_i) < 1.0))
        throw DataError("generation marginal correlation is out of (-1, 1)");
    BivariateGaussian out{i * mu_x, i * mu_y, sigma1 * std::sqrt(i),
                          sigma2 * std::sqrt(i), rho_i};
    out.check();
    return out;
}

bool generation_monotone_condition(double mu_x, double mu_y, double sigma1,
                                   double sigma2, const DampingFn& f,
                                   double alpha) {
    if (!(mu_x > 0.0) || !(mu_y > 0.0))
        throw std::invalid_argument("monotone condition needs mu_x, mu_y > 0");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("sigmas must be > 0");
    if (!f) throw std::invalid_argument("damping function is empty");
    const double lambda = lambda_from_alpha(alpha);

    // Rotated frame aligned with the mean direction.
    const double norm = std::sqrt(mu_x * mu_x + mu_y * mu_y);
    const double half_sqrt2 = std::numbers::sqrt2 / 2.0;
    const double cos_g = half_sqrt2 * (mu_x + mu_y) / norm;
    const double sin_g = half_sqrt2 * (mu_x - mu_y) / norm;
    const double cos_2g = 2.0 * mu_x * mu_y / (norm * norm);
    if (!(cos_2g > 0.0))
        throw DataError("monotone condition: cos(2 gamma) is not positive");

    const double sigma_sq = std::fmax(sigma1 * sigma1, sigma2 * sigma2) * cos_2g;
    const double sigma = std::sqrt(sigma_sq);
    const double mu =
        (sigma / sigma1) * mu_x * cos_g - (sigma / sigma2) * mu_y * sin_g;
    const double bound = std::fmax(f(1) / cos_2g, 1.0);
    return mu * mu / (lambda * sigma_sq) > bound;
}

double epsilon_harmonic(int i) {
    if (i < 1) throw std::invalid_argument("generation must be >= 1");
    double s = 0.0;
    for (int j = 1; j <= i; ++j) s += 1.0 / j;
    return s;
}

double epsilon_from_damping(const DampingFn& f, double rho, int i) {
    if (i < 1) throw std::invalid_argument("generation must be >= 1");
    if (!f) throw std::invalid_argument("damping function is empty");
    if (!(rho < 1.0))
        throw std::invalid_argument("damping-exact schedule needs rho < 1");
    return (1.0 - f(i)) / (1.0 - rho);
}

double target_mean(double epsilon_i, double tau, double sigma2, double alpha) {
    const double lambda = lambda_from_alpha(alpha);
    const double radicand = epsilon_i * tau + lambda * sigma2;
    if (!(radicand > 0.0))
        throw std::invalid_argument("target mean: nonpositive radicand");
    return std::sqrt(radicand);
}

}  // namespace treetheta
