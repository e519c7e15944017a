#pragma once

// Scalar distribution kit used by the copula-style generators: CDFs and
// inverse CDFs for the normal, gamma, Fisher F, Student t and Poisson
// families. Continuous inversions are safeguarded Newton iterations on the
// CDF seeded by an analytic guess; the special functions underneath are the
// classic series / continued-fraction forms of the regularized incomplete
// gamma and beta.

namespace treetheta {

struct Family {
    enum class Kind { normal, gamma, fisher_f, student_t, poisson };

    Kind kind = Kind::normal;
    double p1 = 0.0;  // normal: mu     gamma: shape  f: d1  t: nu  poisson: mean
    double p2 = 1.0;  // normal: sigma  gamma: scale  f: d2  (unused otherwise)

    static Family normal(double mu, double sigma);
    static Family gamma(double shape, double scale);
    static Family fisher_f(double d1, double d2);
    static Family student_t(double nu);
    static Family poisson(double mean);

    const char* name() const;
    void check() const;  // throws std::invalid_argument on bad parameters
};

// Regularized lower incomplete gamma P(a, x); series for x < a + 1,
// continued fraction otherwise.
double lower_incomplete_gamma_reg(double a, double x);

// Regularized incomplete beta I_x(a, b); continued fraction with the
// symmetry switch at x = (a + 1) / (a + b + 2).
double incomplete_beta_reg(double a, double b, double x);

double standard_normal_cdf(double x);

// Inverse of the standard normal CDF for p in (0, 1); rational
// approximation polished by one Halley step against the exact CDF.
double standard_normal_quantile(double p);

double cdf(const Family& f, double x);

// Density, continuous families only (used by the Newton inversions and by
// quadrature cross-checks).
double pdf(const Family& f, double x);

// Inverse CDF. Continuous families: the usual quantile, p in (0, 1).
// Poisson: the bracketing rule "largest integer x with F(x) <= p", clamped
// to 0 when p < F(0); p in [0, 1).
double inverse_cdf(const Family& f, double p);

}  // namespace treetheta
