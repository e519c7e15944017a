#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "treetheta/datagen.hpp"
#include "treetheta/errors.hpp"
#include "treetheta/estimation.hpp"
#include "treetheta/rng.hpp"
#include "treetheta/tree.hpp"

namespace tt = treetheta;

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t j = 0; j < order.size(); ++j)
        r[order[j]] = static_cast<double>(j + 1);
    return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks(x), ranks(y));
}

}  // namespace

TEST_CASE("damping schedules: exponential powers and linear decay") {
    CHECK(tt::damping_value(tt::DampingKind::exponential, 3, 0.5, 7) ==
          doctest::Approx(0.125).epsilon(1e-14));
    CHECK(tt::damping_value(tt::DampingKind::linear, 7, 0.6, 7) ==
          doctest::Approx(0.6 / 7.0).epsilon(1e-12));
    CHECK(tt::damping_value(tt::DampingKind::linear, 1, 0.6, 7) ==
          doctest::Approx(0.6).epsilon(1e-14));
    CHECK_THROWS_AS(tt::damping_value(tt::DampingKind::linear, 8, 0.6, 7),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        tt::damping_value(tt::DampingKind::exponential, 0, 0.6, 7),
        std::invalid_argument);
}

TEST_CASE("config validation") {
    tt::GenConfig cfg;
    CHECK_NOTHROW(cfg.check());
    cfg.rho = 1.0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.sigma1_sq = 0.0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.depth = 0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.marginal.kind = tt::MarginalKind::gamma;  // family left at normal
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.branching = 2;
    cfg.depth = 30;  // 2^30 nodes: too large
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
}

TEST_CASE("generated topology is a full breadth-first tree") {
    tt::GenConfig cfg;
    cfg.branching = 3;
    cfg.depth = 4;
    cfg.seed = 11;
    const tt::PairedTree t = tt::generate_pair(cfg);
    CHECK(t.nodes.size() == 1 + 3 + 9 + 27);
    CHECK(tt::validate(t).ok());
    const std::vector<int> g = tt::node_generations(t);
    CHECK(std::count(g.begin(), g.end(), 1) == 1);
    CHECK(std::count(g.begin(), g.end(), 4) == 27);
    CHECK(t.nodes[0].id == "n1");
    CHECK(t.nodes[1].parent_id == "n1");
    CHECK(t.nodes[4].parent_id == "n2");  // first child of the second node
}

TEST_CASE("identical config and seed reproduce the tree bit for bit") {
    tt::GenConfig cfg;
    cfg.seed = 99;
    const tt::PairedTree a = tt::generate_pair(cfg);
    const tt::PairedTree b = tt::generate_pair(cfg);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].x == b.nodes[i].x);
        CHECK(a.nodes[i].y == b.nodes[i].y);
    }
}

TEST_CASE("path sums of increments reconstruct every node value") {
    tt::GenConfig cfg;
    cfg.depth = 7;
    cfg.anchor_x = 5.0;
    cfg.anchor_y = -1.0;
    cfg.seed = 31;
    const tt::PairedTree t = tt::generate_pair(cfg);

    std::map<std::string, const tt::TreeNode*> by_id;
    for (const auto& n : t.nodes) by_id[n.id] = &n;
    for (const auto& n : t.nodes) {
        // Sum the per-step differences up the lineage by brute force.
        double sum_x = 0.0, sum_y = 0.0;
        for (const tt::TreeNode* cur = &n; cur != nullptr;) {
            const bool root = cur->parent_id.empty();
            const double px = root ? t.anchor_x : by_id.at(cur->parent_id)->x[0];
            const double py = root ? t.anchor_y : by_id.at(cur->parent_id)->y[0];
            sum_x += cur->x[0] - px;
            sum_y += cur->y[0] - py;
            cur = root ? nullptr : by_id.at(cur->parent_id);
        }
        CHECK(std::fabs(t.anchor_x + sum_x - n.x[0]) < 1e-12);
        CHECK(std::fabs(t.anchor_y + sum_y - n.y[0]) < 1e-12);
    }
}

TEST_CASE("series nodes advance the damping one step per observation") {
    // With series length 3 and depth 2, increments must use damping indices
    // 1..6, which is observable through the unit-series expansion depth.
    tt::GenConfig cfg;
    cfg.depth = 2;
    cfg.series_length = 3;
    cfg.branching = 2;
    cfg.seed = 8;
    const tt::PairedTree t = tt::generate_pair(cfg);
    const tt::PairedTree unit = tt::expand_to_unit_series(t);
    const tt::GenerationIncrements inc = tt::extract_increments(unit);
    CHECK(inc.max_generation() == 6);
    CHECK(inc.total() == 9);  // 3 obs for the root + 3 each for 2 children
}

TEST_CASE("copula trees are the marginal transform of the gaussian tree") {
    tt::GenConfig gauss;
    gauss.depth = 5;
    gauss.seed = 606;
    tt::GenConfig gamma_cfg = gauss;
    gamma_cfg.marginal.kind = tt::MarginalKind::gamma;
    gamma_cfg.marginal.family = tt::Family::gamma(2.0, 1.5);

    const tt::PairedTree gt = tt::generate_pair(gauss);
    const tt::PairedTree mt = tt::generate_pair(gamma_cfg);

    // Same seed, same draw order: the gamma increments equal the copula
    // transform of the gaussian increments (up to increment-recovery
    // rounding when differencing node values).
    const tt::GenerationIncrements gi = tt::extract_increments(gt);
    const tt::GenerationIncrements mi = tt::extract_increments(mt);
    std::vector<tt::IncrementPair> graw, mraw;
    for (const auto& g : gi.by_generation)
        graw.insert(graw.end(), g.begin(), g.end());
    for (const auto& g : mi.by_generation)
        mraw.insert(mraw.end(), g.begin(), g.end());
    const std::vector<tt::IncrementPair> expect = tt::transform_marginals(
        graw, gauss.mu_x, gauss.mu_y, 1.0, 1.0, gamma_cfg.marginal.family);
    REQUIRE(expect.size() == mraw.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(mraw[i].dx == doctest::Approx(expect[i].dx).epsilon(1e-9));
        CHECK(mraw[i].dy == doctest::Approx(expect[i].dy).epsilon(1e-9));
        CHECK(mraw[i].dx > 0.0);  // gamma support
    }
}

TEST_CASE("marginal transforms preserve ranks exactly") {
    tt::RngStream rng(5150);
    std::vector<tt::IncrementPair> raw;
    for (int i = 0; i < 500; ++i) {
        const auto [a, b] = rng.normal_pair();
        raw.push_back({2.0 + a, 2.0 + 0.7 * a + std::sqrt(0.51) * b});
    }
    std::vector<double> rx, ry;
    for (const auto& p : raw) {
        rx.push_back(p.dx);
        ry.push_back(p.dy);
    }
    for (const tt::Family& fam :
         {tt::Family::gamma(2.0, 1.0), tt::Family::fisher_f(6.0, 12.0),
          tt::Family::student_t(5.0)}) {
        const auto out = tt::transform_marginals(raw, 2.0, 2.0, 1.0, 1.0, fam);
        std::vector<double> ox, oy;
        for (const auto& p : out) {
            ox.push_back(p.dx);
            oy.push_back(p.dy);
        }
        CHECK(ranks(ox) == ranks(rx));
        CHECK(ranks(oy) == ranks(ry));
        CHECK(spearman(ox, oy) == spearman(rx, ry));
    }
}

TEST_CASE("poisson transform clamps the low tail and rejects u == 1") {
    std::vector<tt::IncrementPair> raw{{-10.0, 2.0}, {2.0, 2.0}};
    const auto out = tt::transform_marginals_poisson(raw, 2.0, 2.0, 1.0, 1.0,
                                                     4.0);
    CHECK(out[0].dx == 0.0);  // u below F(0) clamps to count 0
    CHECK(out[1].dx >= 0.0);
    CHECK(out[1].dx == std::floor(out[1].dx));

    std::vector<tt::IncrementPair> sat{{1e9, 2.0}};
    CHECK_THROWS_WITH_AS(
        tt::transform_marginals_poisson(sat, 2.0, 2.0, 1.0, 1.0, 4.0),
        doctest::Contains("copula value"), tt::DataError);
}

TEST_CASE("continuous transform rejects saturated copula values") {
    std::vector<tt::IncrementPair> sat{{1e9, 2.0}};
    CHECK_THROWS_AS(tt::transform_marginals(sat, 2.0, 2.0, 1.0, 1.0,
                                            tt::Family::gamma(2.0, 1.0)),
                    tt::DataError);
    CHECK_THROWS_AS(tt::transform_marginals(sat, 2.0, 2.0, 1.0, 1.0,
                                            tt::Family::poisson(2.0)),
                    std::invalid_argument);
}

TEST_CASE("equal-width discretization splits the observed range") {
    const std::vector<double> s{0.0, 1.0, 2.0, 3.0};
    CHECK(tt::discretize(s, tt::MarginalKind::equal_width, 2) ==
          std::vector<int>{1, 1, 2, 2});
    // The maximum lands in the top bin, not one past it.
    const std::vector<double> t{0.0, 10.0};
    CHECK(tt::discretize(t, tt::MarginalKind::equal_width, 5) ==
          std::vector<int>{1, 5});
    const std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK_THROWS_AS(tt::discretize(flat, tt::MarginalKind::equal_width, 3),
                    tt::DataError);
}

TEST_CASE("equal-frequency discretization assigns by rank") {
    const std::vector<double> s{5.0, 1.0, 3.0, 9.0};
    CHECK(tt::discretize(s, tt::MarginalKind::equal_freq, 2) ==
          std::vector<int>{2, 1, 1, 2});
    // Ties keep stable sample order.
    const std::vector<double> tie{1.0, 1.0, 2.0, 2.0};
    CHECK(tt::discretize(tie, tt::MarginalKind::equal_freq, 2) ==
          std::vector<int>{1, 1, 2, 2});
    CHECK_THROWS_AS(tt::discretize(std::vector<double>{1.0},
                                   tt::MarginalKind::equal_freq, 2),
                    tt::DataError);
    CHECK_THROWS_AS(tt::discretize(s, tt::MarginalKind::gaussian, 2),
                    std::invalid_argument);
}

TEST_CASE("discretized trees carry 1-based interval indices") {
    tt::GenConfig cfg;
    cfg.depth = 4;
    cfg.seed = 17;
    cfg.marginal.kind = tt::MarginalKind::equal_freq;
    cfg.marginal.bins = 4;
    const tt::PairedTree t = tt::generate_pair(cfg);
    const tt::GenerationIncrements inc = tt::extract_increments(t);
    int lo = 1000, hi = -1000;
    for (const auto& g : inc.by_generation)
        for (const auto& p : g) {
            lo = std::min(lo, static_cast<int>(std::lround(p.dx)));
            hi = std::max(hi, static_cast<int>(std::lround(p.dx)));
        }
    CHECK(lo == 1);
    CHECK(hi == 4);
}
