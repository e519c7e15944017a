#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "treetheta/distributions.hpp"
#include "treetheta/rng.hpp"

namespace tt = treetheta;

namespace {

// Composite Simpson integral of the family density, used as an independent
// cross-check of the closed-form CDFs.
double simpson_pdf(const tt::Family& f, double a, double b, int panels) {
    const double h = (b - a) / (2.0 * panels);
    double sum = tt::pdf(f, a) + tt::pdf(f, b);
    for (int i = 1; i < 2 * panels; ++i)
        sum += tt::pdf(f, a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace

TEST_CASE("family constructors validate parameters") {
    CHECK_THROWS_AS(tt::Family::normal(0.0, 0.0).check(), std::invalid_argument);
    CHECK_THROWS_AS(tt::Family::gamma(-1.0, 1.0).check(), std::invalid_argument);
    CHECK_THROWS_AS(tt::Family::gamma(1.0, 0.0).check(), std::invalid_argument);
    CHECK_THROWS_AS(tt::Family::fisher_f(0.0, 3.0).check(),
                    std::invalid_argument);
    CHECK_THROWS_AS(tt::Family::student_t(0.0).check(), std::invalid_argument);
    CHECK_THROWS_AS(tt::Family::poisson(-2.0).check(), std::invalid_argument);
    CHECK_NOTHROW(tt::Family::gamma(2.0, 0.5).check());
    CHECK(std::string(tt::Family::student_t(3.0).name()) == "student_t");
}

TEST_CASE("standard normal cdf and quantile") {
    CHECK(tt::standard_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tt::standard_normal_cdf(1.959963984540054) ==
          doctest::Approx(0.975).epsilon(1e-12));
    // Symmetry.
    for (double x : {0.3, 1.1, 2.7, 4.0})
        CHECK(tt::standard_normal_cdf(-x) ==
              doctest::Approx(1.0 - tt::standard_normal_cdf(x)).epsilon(1e-13));
    CHECK(tt::standard_normal_quantile(0.975) ==
          doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(tt::standard_normal_quantile(0.5) == doctest::Approx(0.0));
    // Round trips, including deep tails (relative error on p).
    for (double p : {1e-10, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99,
                     1.0 - 1e-6}) {
        const double q = tt::standard_normal_quantile(p);
        CHECK(std::fabs(tt::standard_normal_cdf(q) - p) <= 1e-9 * p + 1e-15);
    }
    CHECK_THROWS_AS(tt::standard_normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(tt::standard_normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("incomplete gamma and beta special values") {
    // P(1, x) = 1 - exp(-x).
    for (double x : {0.1, 1.0, 2.5})
        CHECK(tt::lower_incomplete_gamma_reg(1.0, x) ==
              doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-14));
    // P(1/2, x) = erf(sqrt(x)).
    CHECK(tt::lower_incomplete_gamma_reg(0.5, 1.0) ==
          doctest::Approx(0.8427007929497149).epsilon(1e-13));
    // I_x(1, 1) = x; midpoint symmetry I_{1/2}(a, a) = 1/2.
    for (double x : {0.2, 0.5, 0.9})
        CHECK(tt::incomplete_beta_reg(1.0, 1.0, x) ==
              doctest::Approx(x).epsilon(1e-14));
    CHECK(tt::incomplete_beta_reg(2.0, 2.0, 0.5) ==
          doctest::Approx(0.5).epsilon(1e-14));
    // Reflection identity.
    CHECK(tt::incomplete_beta_reg(3.2, 1.7, 0.34) +
              tt::incomplete_beta_reg(1.7, 3.2, 0.66) ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(tt::lower_incomplete_gamma_reg(0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("family cdf closed-form spot values") {
    // Exponential(1) == gamma(shape 1, scale 1).
    CHECK(tt::cdf(tt::Family::gamma(1.0, 1.0), 1.0) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    // gamma(2, 3) at 6: P(2, 2) = 1 - 3 e^-2.
    CHECK(tt::cdf(tt::Family::gamma(2.0, 3.0), 6.0) ==
          doctest::Approx(1.0 - 3.0 * std::exp(-2.0)).epsilon(1e-13));
    // Student t with 1 df is Cauchy: F(x) = 1/2 + atan(x)/pi.
    CHECK(tt::cdf(tt::Family::student_t(1.0), 1.0) ==
          doctest::Approx(0.75).epsilon(1e-13));
    // Student t with 2 df: F(x) = 1/2 + x / (2 sqrt(2 + x^2)).
    CHECK(tt::cdf(tt::Family::student_t(2.0), 1.0) ==
          doctest::Approx(0.5 + 1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-13));
    CHECK(tt::cdf(tt::Family::student_t(7.0), 0.0) == doctest::Approx(0.5));
    // F(2, 2): F(x) = x / (1 + x).
    CHECK(tt::cdf(tt::Family::fisher_f(2.0, 2.0), 1.0) ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK(tt::cdf(tt::Family::fisher_f(2.0, 2.0), 3.0) ==
          doctest::Approx(0.75).epsilon(1e-13));
    // Equal dfs put the median at 1.
    CHECK(tt::cdf(tt::Family::fisher_f(9.0, 9.0), 1.0) ==
          doctest::Approx(0.5).epsilon(1e-13));
    // Normal family wraps the standard cdf.
    CHECK(tt::cdf(tt::Family::normal(2.0, 3.0), 2.0) == doctest::Approx(0.5));
}

TEST_CASE("cdf differences match Simpson quadrature of the density") {
    struct Case {
        tt::Family f;
        double a, b;
    };
    const std::vector<Case> cases{
        {tt::Family::gamma(2.5, 1.3), 0.3, 4.1},
        {tt::Family::fisher_f(7.0, 11.0), 0.2, 3.0},
        {tt::Family::student_t(6.5), -2.0, 1.5},
        {tt::Family::normal(0.7, 1.9), -1.0, 2.0},
    };
    for (const auto& c : cases) {
        const double by_cdf = tt::cdf(c.f, c.b) - tt::cdf(c.f, c.a);
        const double by_quad = simpson_pdf(c.f, c.a, c.b, 2000);
        CHECK(by_cdf == doctest::Approx(by_quad).epsilon(1e-8));
    }
}

TEST_CASE("poisson cdf and bracketing inverse") {
    const tt::Family pois = tt::Family::poisson(2.0);
    CHECK(tt::cdf(pois, 0.0) ==
          doctest::Approx(0.1353352832366127).epsilon(1e-13));
    CHECK(tt::cdf(pois, 1.0) ==
          doctest::Approx(0.4060058497098381).epsilon(1e-13));
    // Largest integer k with F(k) <= p; below F(0) clamps to 0.
    CHECK(tt::inverse_cdf(pois, 0.01) == 0.0);
    CHECK(tt::inverse_cdf(pois, 0.4) == 0.0);   // F(1) = 0.406 > 0.4
    CHECK(tt::inverse_cdf(pois, 0.41) == 1.0);  // F(1) <= 0.41 < F(2)
    CHECK(tt::inverse_cdf(pois, 0.0) == 0.0);
    CHECK_THROWS_AS(tt::inverse_cdf(pois, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(tt::pdf(pois, 1.0), std::invalid_argument);
}

TEST_CASE("continuous quantiles are exact inverses") {
    const std::vector<tt::Family> families{
        tt::Family::gamma(0.7, 2.0),    tt::Family::gamma(4.0, 0.5),
        tt::Family::fisher_f(3.0, 8.0), tt::Family::fisher_f(12.0, 20.0),
        tt::Family::student_t(1.0),     tt::Family::student_t(4.5),
        tt::Family::student_t(30.0),    tt::Family::normal(-1.0, 2.5),
    };
    for (const auto& f : families) {
        for (double p : {0.001, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999}) {
            const double q = tt::inverse_cdf(f, p);
            CHECK(std::fabs(tt::cdf(f, q) - p) <= 1e-9);
        }
        CHECK_THROWS_AS(tt::inverse_cdf(f, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(tt::inverse_cdf(f, 1.0), std::invalid_argument);
    }
    // Cauchy quartile is exactly 1.
    CHECK(tt::inverse_cdf(tt::Family::student_t(1.0), 0.75) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // F(2,2) quartile: F(x) = x/(1+x) => q(0.75) = 3.
    CHECK(tt::inverse_cdf(tt::Family::fisher_f(2.0, 2.0), 0.75) ==
          doctest::Approx(3.0).epsilon(1e-10));
    // Exponential median.
    CHECK(tt::inverse_cdf(tt::Family::gamma(1.0, 1.0), 0.5) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("t quantile stays convergent next to the median") {
    // Near p = 0.5 the root is tiny relative to the search bracket; these
    // exact inputs used to stall the safeguarded Newton loop.
    const double nu = 3.5145790203626084;
    const double p = 0.50052878089731301;
    const double q = tt::inverse_cdf(tt::Family::student_t(nu), p);
    CHECK(std::fabs(tt::cdf(tt::Family::student_t(nu), q) - p) <= 1e-12);
    for (double nu2 : {8.0, 12.0, 20.0}) {
        for (double dp : {1e-4, 1e-7, 1e-10}) {
            const tt::Family f = tt::Family::student_t(nu2);
            const double hi = tt::inverse_cdf(f, 0.5 + dp);
            const double lo = tt::inverse_cdf(f, 0.5 - dp);
            // The forward CDF computes 1 - nu/(nu + x^2), which cancels
            // catastrophically for tiny x; 1e-8 is its own noise floor
            // here, not the inverter's.
            CHECK(std::fabs(tt::cdf(f, hi) - (0.5 + dp)) <= 1e-8);
            CHECK(hi >= 0.0);
            CHECK(std::fabs(hi + lo) <= 1e-9);  // odd symmetry about 0
        }
    }
    CHECK(tt::inverse_cdf(tt::Family::student_t(5.0), 0.5) == 0.0);
}

TEST_CASE("random quantile round trips across the parameter space") {
    tt::RngStream rng(20240817);
    for (int i = 0; i < 300; ++i) {
        const double p = rng.uniform(1e-6, 1.0 - 1e-6);
        tt::Family f = tt::Family::normal(0.0, 1.0);
        switch (i % 3) {
            case 0:
                f = tt::Family::gamma(rng.uniform(0.3, 6.0),
                                      rng.uniform(0.2, 3.0));
                break;
            case 1:
                f = tt::Family::fisher_f(rng.uniform(1.0, 30.0),
                                         rng.uniform(2.0, 30.0));
                break;
            default:
                f = tt::Family::student_t(rng.uniform(0.5, 40.0));
                break;
        }
        const double q = tt::inverse_cdf(f, p);
        CHECK(std::fabs(tt::cdf(f, q) - p) <= 1e-8);
    }
}
