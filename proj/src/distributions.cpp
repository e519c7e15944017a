#include "treetheta/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace treetheta {

namespace {

constexpr int kMaxSeriesIter = 600;
constexpr double kTiny = 1e-300;
constexpr double kConvergeEps = 1e-16;

[[noreturn]] void no_convergence(const char* what) {
    throw std::runtime_error(std::string(what) + " did not converge");
}

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxSeriesIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kConvergeEps)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    no_convergence("incomplete gamma series");
}

// Upper tail Q(a, x) by modified Lentz continued fraction.
double gamma_q_contfrac(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxSeriesIter; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kConvergeEps)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    no_convergence("incomplete gamma continued fraction");
}

double beta_contfrac(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxSeriesIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kConvergeEps) return h;
    }
    no_convergence("incomplete beta continued fraction");
}

// Safeguarded Newton on a monotone CDF: keeps a bracket [lo, hi] with
// cdf(lo) <= p <= cdf(hi) and bisects whenever the Newton step leaves it.
template <class CdfFn, class PdfFn>
double invert_monotone(const CdfFn& cdf_fn, const PdfFn& pdf_fn, double p,
                       double lo, double hi, double x0, const char* what) {
    double x = std::fmin(std::fmax(x0, lo), hi);
    for (int it = 0; it < 300; ++it) {
        const double f = cdf_fn(x) - p;
        // At the CDF's own rounding floor the residual carries no more
        // information; without this stop a root much smaller than the
        // bracket scale (t quantile near p = 0.5) never meets the relative
        // tolerances below. The factor absorbs the incomplete-beta noise,
        // which grows with its parameters.
        if (std::fabs(f) <= 512.0 * std::numeric_limits<double>::epsilon() * p)
            return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        double next = 0.5 * (lo + hi);
        const double d = pdf_fn(x);
        if (d > 0.0) {
            const double newton = x - f / d;
            if (newton > lo && newton < hi) next = newton;
        }
        const double scale = std::fabs(x) + 1e-300;
        if (std::fabs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * scale)
            return next;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                           (std::fabs(lo) + std::fabs(hi) + 1e-300))
            return next;
        x = next;
    }
    no_convergence(what);
}

// Expands hi geometrically until cdf(hi) >= p. lo stays a valid lower end.
template <class CdfFn>
double expand_upper(const CdfFn& cdf_fn, double p, double start,
                    const char* what) {
    double hi = start;
    for (int i = 0; i < 2200; ++i) {
        if (cdf_fn(hi) >= p) return hi;
        hi *= 2.0;
    }
    no_convergence(what);
}

void check_probability_open(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("probability must be in (0, 1)");
}

}  // namespace

Family Family::normal(double mu, double sigma) {
    Family f{Kind::normal, mu, sigma};
    f.check();
    return f;
}

Family Family::gamma(double shape, double scale) {
    Family f{Kind::gamma, shape, scale};
    f.check();
    return f;
}

Family Family::fisher_f(double d1, double d2) {
    Family f{Kind::fisher_f, d1, d2};
    f.check();
    return f;
}

Family Family::student_t(double nu) {
    Family f{Kind::student_t, nu, 0.0};
    f.check();
    return f;
}

Family Family::poisson(double mean) {
    Family f{Kind::poisson, mean, 0.0};
    f.check();
    return f;
}

const char* Family::name() const {
    switch (kind) {
        case Kind::normal: return "normal";
        case Kind::gamma: return "gamma";
        case Kind::fisher_f: return "f";
        case Kind::student_t: return "student_t";
        case Kind::poisson: return "poisson";
    }
    return "?";
}

void Family::check() const {
    const bool finite = std::isfinite(p1) && std::isfinite(p2);
    switch (kind) {
        case Kind::normal:
            if (!finite || !(p2 > 0.0))
                throw std::invalid_argument("normal: sigma must be > 0");
            return;
        case Kind::gamma:
            if (!finite || !(p1 > 0.0) || !(p2 > 0.0))
                throw std::invalid_argument("gamma: shape and scale must be > 0");
            return;
        case Kind::fisher_f:
            if (!finite || !(p1 > 0.0) || !(p2 > 0.0))
                throw std::invalid_argument("f: d1 and d2 must be > 0");
            return;
        case Kind::student_t:
            if (!std::isfinite(p1) || !(p1 > 0.0))
                throw std::invalid_argument("student_t: nu must be > 0");
            return;
        case Kind::poisson:
            if (!std::isfinite(p1) || !(p1 > 0.0))
                throw std::invalid_argument("poisson: mean must be > 0");
            return;
    }
    throw std::invalid_argument("unknown family");
}

double lower_incomplete_gamma_reg(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("incomplete gamma: a must be > 0");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double incomplete_beta_reg(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("incomplete beta: a, b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                  std::lgamma(b) + a * std::log(x) +
                                  b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_contfrac(a, b, x) / a;
    return 1.0 - front * beta_contfrac(b, a, 1.0 - x) / b;
}

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double standard_normal_quantile(double p) {
    check_probability_open(p);
    // Rational approximation (Acklam's coefficients), |error| < 1.15e-9,
    // then one Halley step against erfc-based Phi for full precision.
    static const double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
            ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) *
            q /
            (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
            ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
    }
    const double e = standard_normal_cdf(x) - p;
    const double u =
        e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    x -= u / (1.0 + x * u / 2.0);
    return x;
}

double cdf(const Family& f, double x) {
    f.check();
    switch (f.kind) {
        case Family::Kind::normal:
            return standard_normal_cdf((x - f.p1) / f.p2);
        case Family::Kind::gamma:
            if (x <= 0.0) return 0.0;
            return lower_incomplete_gamma_reg(f.p1, x / f.p2);
        case Family::Kind::fisher_f: {
            if (x <= 0.0) return 0.0;
            const double w = f.p1 * x / (f.p1 * x + f.p2);
            return incomplete_beta_reg(f.p1 / 2.0, f.p2 / 2.0, w);
        }
        case Family::Kind::student_t: {
            if (x == 0.0) return 0.5;
            const double nu = f.p1;
            const double w = nu / (nu + x * x);
            const double half = 0.5 * incomplete_beta_reg(nu / 2.0, 0.5, w);
            return x > 0.0 ? 1.0 - half : half;
        }
        case Family::Kind::poisson: {
            if (x < 0.0) return 0.0;
            const double k = std::floor(x);
            // P(X <= k) = Q(k + 1, mean), the upper regularized gamma.
            return 1.0 - lower_incomplete_gamma_reg(k + 1.0, f.p1);
        }
    }
    throw std::invalid_argument("unknown family");
}

double pdf(const Family& f, double x) {
    f.check();
    switch (f.kind) {
        case Family::Kind::normal: {
            const double z = (x - f.p1) / f.p2;
            return std::exp(-0.5 * z * z) /
                   (f.p2 * std::sqrt(2.0 * std::numbers::pi));
        }
        case Family::Kind::gamma: {
            if (x <= 0.0) return 0.0;
            const double a = f.p1;
            const double s = f.p2;
            return std::exp((a - 1.0) * std::log(x) - x / s - std::lgamma(a) -
                            a * std::log(s));
        }
        case Family::Kind::fisher_f: {
            if (x <= 0.0) return 0.0;
            const double d1 = f.p1;
            const double d2 = f.p2;
            const double lg = std::lgamma((d1 + d2) / 2.0) -
                              std::lgamma(d1 / 2.0) - std::lgamma(d2 / 2.0);
            return std::exp(lg + (d1 / 2.0) * std::log(d1 / d2) +
                            (d1 / 2.0 - 1.0) * std::log(x) -
                            ((d1 + d2) / 2.0) * std::log1p(d1 * x / d2));
        }
        case Family::Kind::student_t: {
            const double nu = f.p1;
            const double lg =
                std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                0.5 * std::log(nu * std::numbers::pi);
            return std::exp(lg - ((nu + 1.0) / 2.0) * std::log1p(x * x / nu));
        }
        case Family::Kind::poisson:
            throw std::invalid_argument("pdf: poisson has no density");
    }
    throw std::invalid_argument("unknown family");
}

double inverse_cdf(const Family& f, double p) {
    f.check();
    switch (f.kind) {
        case Family::Kind::normal:
            check_probability_open(p);
            return f.p1 + f.p2 * standard_normal_quantile(p);
        case Family::Kind::gamma: {
            check_probability_open(p);
            const double a = f.p1;
            const double s = f.p2;
            // Wilson-Hilferty starting point.
            const double z = standard_normal_quantile(p);
            const double cube =
                1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
            double x0 = a * cube * cube * cube * s;
            if (!(x0 > 0.0) || !std::isfinite(x0)) x0 = a * s * 1e-3;
            const auto cdf_fn = [&](double x) { return cdf(f, x); };
            const auto pdf_fn = [&](double x) { return pdf(f, x); };
            const double hi =
                expand_upper(cdf_fn, p, std::fmax(x0 * 2.0, a * s), "gamma quantile bracket");
            return invert_monotone(cdf_fn, pdf_fn, p, 0.0, hi, x0,
                                   "gamma quantile");
        }
        case Family::Kind::fisher_f: {
            check_probability_open(p);
            const auto cdf_fn = [&](double x) { return cdf(f, x); };
            const auto pdf_fn = [&](double x) { return pdf(f, x); };
            const double hi = expand_upper(cdf_fn, p, 1.0, "f quantile bracket");
            return invert_monotone(cdf_fn, pdf_fn, p, 0.0, hi, hi / 2.0,
                                   "f quantile");
        }
        case Family::Kind::student_t: {
            check_probability_open(p);
            if (p == 0.5) return 0.0;
            if (p < 0.5) {
                Family mirror = f;
                return -inverse_cdf(mirror, 1.0 - p);
            }
            const auto cdf_fn = [&](double x) { return cdf(f, x); };
            const auto pdf_fn = [&](double x) { return pdf(f, x); };
            const double hi = expand_upper(cdf_fn, p, 1.0, "t quantile bracket");
            const double x0 = std::fmin(standard_normal_quantile(p), hi);
            return invert_monotone(cdf_fn, pdf_fn, p, 0.0, hi, x0, "t quantile");
        }
        case Family::Kind::poisson: {
            if (!(p >= 0.0 && p < 1.0))
                throw std::invalid_argument(
                    "poisson inverse: probability must be in [0, 1)");
            const double m = f.p1;
            // Largest integer k with F(k) <= p; below F(0) clamp to 0.
            double pmf = std::exp(-m);
            double acc = pmf;
            if (p < acc) return 0.0;
            const double cap = m + 40.0 * std::sqrt(m) + 120.0;
            double k = 0.0;
            while (acc <= p) {
                k += 1.0;
                if (k > cap) no_convergence("poisson bracket");
                pmf *= m / k;
                acc += pmf;
            }
            return k - 1.0;
        }
    }
    throw std::invalid_argument("unknown family");
}

}  // namespace treetheta
