#include "treetheta/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "treetheta/ellipse.hpp"
#include "treetheta/errors.hpp"

namespace treetheta {

namespace {

struct Moments2 {
    double mean_x = 0.0, mean_y = 0.0;
    double var_x = 0.0, var_y = 0.0;  // maximum-likelihood (divide by n)
    double cov = 0.0;
    std::size_t n = 0;
};

Moments2 moments2(std::span<const IncrementPair> pts) {
    Moments2 m;
    m.n = pts.size();
    if (m.n == 0) return m;
    for (const auto& p : pts) {
        m.mean_x += p.dx;
        m.mean_y += p.dy;
    }
    m.mean_x /= static_cast<double>(m.n);
    m.mean_y /= static_cast<double>(m.n);
    for (const auto& p : pts) {
        const double ax = p.dx - m.mean_x;
        const double ay = p.dy - m.mean_y;
        m.var_x += ax * ax;
        m.var_y += ay * ay;
        m.cov += ax * ay;
    }
    m.var_x /= static_cast<double>(m.n);
    m.var_y /= static_cast<double>(m.n);
    m.cov /= static_cast<double>(m.n);
    return m;
}

std::vector<IncrementPair> pool(const GenerationIncrements& inc) {
    std::vector<IncrementPair> all;
    all.reserve(inc.total());
    for (const auto& g : inc.by_generation)
        all.insert(all.end(), g.begin(), g.end());
    return all;
}

double pearson_or_throw(std::span<const IncrementPair> pts, const char* what) {
    const Moments2 m = moments2(pts);
    if (m.n < 2)
        throw DataError(std::string(what) + ": needs at least 2 observations");
    if (!(m.var_x > 0.0) || !(m.var_y > 0.0))
        throw DataError(std::string(what) + ": zero variance");
    return m.cov / std::sqrt(m.var_x * m.var_y);
}

}  // namespace

GenerationMoments generation_moments(const GenerationIncrements& inc) {
    GenerationMoments out;
    out.by_generation.reserve(inc.by_generation.size());
    for (const auto& g : inc.by_generation) {
        const Moments2 m = moments2(g);
        out.by_generation.push_back({m.mean_x, m.mean_y, std::sqrt(m.var_x),
                                     std::sqrt(m.var_y), m.n});
    }
    return out;
}

GenerationIncrements normalize_increments(const GenerationIncrements& inc,
                                          const GenerationMoments& moments,
                                          const NormalizationConfig& cfg) {
    if (moments.by_generation.size() != inc.by_generation.size())
        throw std::invalid_argument("moments do not match the increments");
    if (!(cfg.sigma2 > 0.0))
        throw std::invalid_argument("target variance must be > 0");
    const EpsilonFn eps = cfg.epsilon ? cfg.epsilon : EpsilonFn(epsilon_harmonic);
    const double sigma = std::sqrt(cfg.sigma2);

    GenerationIncrements out;
    out.by_generation.resize(inc.by_generation.size());
    for (std::size_t gi = 0; gi < inc.by_generation.size(); ++gi) {
        const auto& src = inc.by_generation[gi];
        const auto& mom = moments.by_generation[gi];
        const int generation = static_cast<int>(gi) + 1;
        const double mu_star =
            target_mean(eps(generation), cfg.tau, cfg.sigma2, cfg.alpha);
        auto& dst = out.by_generation[gi];
        dst.reserve(src.size());
        if (src.size() == 1) {
            // One point carries no spread: it maps exactly to the target
            // mean and the (undefined) sample sd is never consulted.
            dst.push_back({mu_star, mu_star});
            continue;
        }
        if (!src.empty() && (!(mom.sd_x > 0.0) || !(mom.sd_y > 0.0)))
            throw DataError("generation " + std::to_string(generation) +
                            ": degenerate variance (constant increments)");
        const double scale_x = sigma / mom.sd_x;
        const double scale_y = sigma / mom.sd_y;
        for (const auto& p : src)
            dst.push_back({scale_x * (p.dx - mom.mean_x) + mu_star,
                           scale_y * (p.dy - mom.mean_y) + mu_star});
    }
    return out;
}

AngleEstimate estimate_angle(std::span<const IncrementPair> points,
                             double alpha, double vertex_x, double vertex_y) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in (0, 1)");
    const std::size_t n = points.size();
    if (n < 2) throw DataError("angle statistic needs at least 2 points");

    std::vector<double> ang;
    ang.reserve(n);
    for (const auto& p : points) {
        const double dx = p.dx - vertex_x;
        const double dy = p.dy - vertex_y;
        if (dx == 0.0 && dy == 0.0)
            throw DataError("a point coincides with the vertex");
        ang.push_back(std::atan2(dy, dx));
    }
    std::sort(ang.begin(), ang.end());

    // Cut the circle at the largest empty gap; the candidate windows then
    // live on one increasing linear sequence.
    const double two_pi = 2.0 * std::numbers::pi;
    std::size_t cut = 0;
    double best_gap = ang.front() + two_pi - ang.back();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double gap = ang[i + 1] - ang[i];
        if (gap > best_gap) {
            best_gap = gap;
            cut = i + 1;
        }
    }
    std::vector<double> lin(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = cut + j;
        lin[j] = k < n ? ang[k] : ang[k - n] + two_pi;
    }

    // m = ceil((1 - alpha) n) == n - floor(alpha n); the epsilon absorbs
    // representation error in alpha * n.
    const auto m = static_cast<std::size_t>(
        static_cast<double>(n) -
        std::floor(alpha * static_cast<double>(n) + 1e-12));

    AngleEstimate est;
    est.window_size = m;
    est.point_count = n;
    for (std::size_t j = 0; j + m <= n; ++j) {
        const double width = lin[j + m - 1] - lin[j];
        if (width < std::numbers::pi) est.widths.push_back(width);
    }
    if (est.widths.empty())
        throw DataError(
            "angular span >= pi: no candidate window fits between two lines");
    double sum = 0.0;
    for (const double w : est.widths) sum += w;
    est.angle = sum / static_cast<double>(est.widths.size());
    return est;
}

AngleEstimate tree_delta_theta(const PairedTree& tree,
                               const NormalizationConfig& cfg) {
    const PairedTree unit = expand_to_unit_series(tree);
    GenerationIncrements inc = extract_increments(unit);
    if (cfg.sign_flip) inc = flip_x_if_anticorrelated(inc).first;
    if (cfg.normalize) {
        const GenerationMoments moments = generation_moments(inc);
        inc = normalize_increments(inc, moments, cfg);
    }
    const std::vector<IncrementPair> all = pool(inc);
    return estimate_angle(all, cfg.alpha);
}

std::pair<GenerationIncrements, bool> flip_x_if_anticorrelated(
    const GenerationIncrements& inc) {
    const double r = pooled_pearson(inc);
    if (r >= 0.0) return {inc, false};
    GenerationIncrements flipped = inc;
    for (auto& g : flipped.by_generation)
        for (auto& p : g) p.dx = -p.dx;
    return {flipped, true};
}

double pooled_pearson(const GenerationIncrements& inc) {
    const std::vector<IncrementPair> all = pool(inc);
    return pearson_or_throw(all, "pooled correlation");
}

double pooled_pearson_values(const PairedTree& tree) {
    std::vector<IncrementPair> values;
    for (const auto& node : tree.nodes)
        for (std::size_t k = 0; k < node.x.size(); ++k)
            values.push_back({node.x[k], node.y[k]});
    return pearson_or_throw(values, "value correlation");
}

std::vector<std::pair<int, double>> per_generation_pearson(
    const GenerationIncrements& inc) {
    std::vector<std::pair<int, double>> out;
    for (std::size_t gi = 0; gi < inc.by_generation.size(); ++gi) {
        const auto& g = inc.by_generation[gi];
        const Moments2 m = moments2(g);
        if (m.n < 2 || !(m.var_x > 0.0) || !(m.var_y > 0.0)) continue;
        out.emplace_back(static_cast<int>(gi) + 1,
                         m.cov / std::sqrt(m.var_x * m.var_y));
    }
    return out;
}

}  // namespace treetheta
