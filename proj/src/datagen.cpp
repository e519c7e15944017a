#include "treetheta/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>

#include "treetheta/errors.hpp"

namespace treetheta {

namespace {

constexpr std::uint64_t kMaxObservations = 1u << 22;

std::uint64_t full_tree_nodes(int branching, int depth) {
    std::uint64_t total = 0;
    std::uint64_t level = 1;
    for (int d = 0; d < depth; ++d) {
        total += level;
        if (total > kMaxObservations)
            throw std::invalid_argument("tree too large");
        level *= static_cast<std::uint64_t>(branching);
    }
    return total;
}

[[noreturn]] void bad_copula_value(std::size_t sample, char coord) {
    throw DataError("sample " + std::to_string(sample + 1) + " (" + coord +
                    "): copula value rounds to exactly 0 or 1");
}

}  // namespace

double damping_value(DampingKind kind, int generation, double rho,
                     int max_generation) {
    if (generation < 1)
        throw std::invalid_argument("generation must be >= 1");
    switch (kind) {
        case DampingKind::exponential:
            return std::pow(rho, generation);
        case DampingKind::linear:
            if (max_generation < generation)
                throw std::invalid_argument(
                    "linear damping needs generation <= max generation");
            return (1.0 - (generation - 1.0) / max_generation) * rho;
    }
    throw std::invalid_argument("unknown damping kind");
}

const char* marginal_name(MarginalKind kind) {
    switch (kind) {
        case MarginalKind::gaussian: return "gaussian";
        case MarginalKind::gamma: return "gamma";
        case MarginalKind::fisher_f: return "f";
        case MarginalKind::student_t: return "student_t";
        case MarginalKind::poisson: return "poisson";
        case MarginalKind::equal_width: return "equal_width";
        case MarginalKind::equal_freq: return "equal_freq";
    }
    return "?";
}

void GenConfig::check() const {
    if (branching < 1) throw std::invalid_argument("branching must be >= 1");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (series_length < 1)
        throw std::invalid_argument("series length must be >= 1");
    if (!std::isfinite(mu_x) || !std::isfinite(mu_y) ||
        !std::isfinite(anchor_x) || !std::isfinite(anchor_y))
        throw std::invalid_argument("means and anchor must be finite");
    if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0))
        throw std::invalid_argument("variances must be > 0");
    if (!(std::fabs(rho) < 1.0))
        throw std::invalid_argument("|rho| must be < 1");
    if (marginal.bins < 1) throw std::invalid_argument("bins must be >= 1");
    const auto want = [&](Family::Kind k) {
        if (marginal.family.kind != k)
            throw std::invalid_argument(
                "marginal family does not match the marginal kind");
        marginal.family.check();
    };
    switch (marginal.kind) {
        case MarginalKind::gamma: want(Family::Kind::gamma); break;
        case MarginalKind::fisher_f: want(Family::Kind::fisher_f); break;
        case MarginalKind::student_t: want(Family::Kind::student_t); break;
        case MarginalKind::poisson: want(Family::Kind::poisson); break;
        default: break;  // gaussian and the discretized kinds ignore family
    }
    const std::uint64_t nodes = full_tree_nodes(branching, depth);
    if (nodes * static_cast<std::uint64_t>(series_length) > kMaxObservations)
        throw std::invalid_argument("tree too large");
}

std::pair<double, double> sample_bivariate_normal(double mu1, double mu2,
                                                  double sigma1, double sigma2,
                                                  double r, RngStream& rng) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("sigmas must be > 0");
    if (!(std::fabs(r) < 1.0))
        throw std::invalid_argument("|r| must be < 1");
    const auto [z1, z2] = rng.normal_pair();
    return {mu1 + sigma1 * z1,
            mu2 + sigma2 * (r * z1 + std::sqrt(1.0 - r * r) * z2)};
}

PairedTree generate_pair(const GenConfig& cfg, RngStream& rng) {
    cfg.check();
    const auto n_nodes =
        static_cast<std::size_t>(full_tree_nodes(cfg.branching, cfg.depth));

    // Breadth-first topology: children of node k are appended level by
    // level, so parents always precede children in storage order.
    std::vector<std::ptrdiff_t> parent(n_nodes, -1);
    std::vector<int> level(n_nodes, 1);
    std::size_t next = 1;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        if (level[k] >= cfg.depth) continue;
        for (int c = 0; c < cfg.branching; ++c) {
            parent[next] = static_cast<std::ptrdiff_t>(k);
            level[next] = level[k] + 1;
            ++next;
        }
    }

    // Raw Gaussian increments, one per (node, series position), drawn in
    // storage order. The damping index counts unit-series steps, so a node
    // series advances the generation one step per observation.
    const int len = cfg.series_length;
    const int max_g = cfg.depth * len;
    const double s1 = std::sqrt(cfg.sigma1_sq);
    const double s2 = std::sqrt(cfg.sigma2_sq);
    std::vector<IncrementPair> raw;
    raw.reserve(n_nodes * static_cast<std::size_t>(len));
    for (std::size_t k = 0; k < n_nodes; ++k) {
        for (int t = 1; t <= len; ++t) {
            const int g = (level[k] - 1) * len + t;
            const double f = damping_value(cfg.damping, g, cfg.rho, max_g);
            const auto [dx, dy] =
                sample_bivariate_normal(cfg.mu_x, cfg.mu_y, s1, s2, f, rng);
            raw.push_back({dx, dy});
        }
    }

    std::vector<IncrementPair> inc;
    switch (cfg.marginal.kind) {
        case MarginalKind::gaussian:
            inc = raw;
            break;
        case MarginalKind::gamma:
        case MarginalKind::fisher_f:
        case MarginalKind::student_t:
            inc = transform_marginals(raw, cfg.mu_x, cfg.mu_y, s1, s2,
                                      cfg.marginal.family);
            break;
        case MarginalKind::poisson:
            inc = transform_marginals_poisson(raw, cfg.mu_x, cfg.mu_y, s1, s2,
                                              cfg.marginal.family.p1);
            break;
        case MarginalKind::equal_width:
        case MarginalKind::equal_freq: {
            std::vector<double> xs, ys;
            xs.reserve(raw.size());
            ys.reserve(raw.size());
            for (const auto& p : raw) {
                xs.push_back(p.dx);
                ys.push_back(p.dy);
            }
            const auto bx = discretize(xs, cfg.marginal.kind, cfg.marginal.bins);
            const auto by = discretize(ys, cfg.marginal.kind, cfg.marginal.bins);
            inc.reserve(raw.size());
            for (std::size_t i = 0; i < raw.size(); ++i)
                inc.push_back({static_cast<double>(bx[i]),
                               static_cast<double>(by[i])});
            break;
        }
    }

    PairedTree tree;
    tree.anchor_x = cfg.anchor_x;
    tree.anchor_y = cfg.anchor_y;
    tree.nodes.resize(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        auto& node = tree.nodes[k];
        node.id = "n" + std::to_string(k + 1);
        node.parent_id =
            parent[k] < 0 ? std::string()
                          : tree.nodes[static_cast<std::size_t>(parent[k])].id;
        double vx = tree.anchor_x;
        double vy = tree.anchor_y;
        if (parent[k] >= 0) {
            const auto& p = tree.nodes[static_cast<std::size_t>(parent[k])];
            vx = p.x.back();
            vy = p.y.back();
        }
        node.x.reserve(len);
        node.y.reserve(len);
        for (int t = 0; t < len; ++t) {
            const auto& d = inc[k * static_cast<std::size_t>(len) +
                                static_cast<std::size_t>(t)];
            vx += d.dx;
            vy += d.dy;
            node.x.push_back(vx);
            node.y.push_back(vy);
        }
    }
    return tree;
}

PairedTree generate_pair(const GenConfig& cfg) {
    RngStream rng(cfg.seed);
    return generate_pair(cfg, rng);
}

std::vector<IncrementPair> transform_marginals(
    std::span<const IncrementPair> raw, double mu_x, double mu_y,
    double sigma1, double sigma2, const Family& target) {
    target.check();
    if (target.kind == Family::Kind::poisson)
        throw std::invalid_argument("poisson targets use the poisson variant");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("sigmas must be > 0");
    std::vector<IncrementPair> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double ux = standard_normal_cdf((raw[i].dx - mu_x) / sigma1);
        const double uy = standard_normal_cdf((raw[i].dy - mu_y) / sigma2);
        if (!(ux > 0.0 && ux < 1.0)) bad_copula_value(i, 'x');
        if (!(uy > 0.0 && uy < 1.0)) bad_copula_value(i, 'y');
        out.push_back({inverse_cdf(target, ux), inverse_cdf(target, uy)});
    }
    return out;
}

std::vector<IncrementPair> transform_marginals_poisson(
    std::span<const IncrementPair> raw, double mu_x, double mu_y,
    double sigma1, double sigma2, double mean) {
    const Family target = Family::poisson(mean);
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("sigmas must be > 0");
    std::vector<IncrementPair> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double ux = standard_normal_cdf((raw[i].dx - mu_x) / sigma1);
        const double uy = standard_normal_cdf((raw[i].dy - mu_y) / sigma2);
        // u == 0 is fine here (the bracketing rule clamps to 0); u == 1 has
        // no bracketing answer.
        if (ux >= 1.0) bad_copula_value(i, 'x');
        if (uy >= 1.0) bad_copula_value(i, 'y');
        out.push_back({inverse_cdf(target, ux), inverse_cdf(target, uy)});
    }
    return out;
}

std::vector<int> discretize(std::span<const double> sample, MarginalKind method,
                            int bins) {
    if (bins < 1) throw std::invalid_argument("bins must be >= 1");
    const std::size_t n = sample.size();
    std::vector<int> out(n, 1);
    switch (method) {
        case MarginalKind::equal_width: {
            if (n == 0) return out;
            const auto [lo_it, hi_it] =
                std::minmax_element(sample.begin(), sample.end());
            const double lo = *lo_it;
            const double hi = *hi_it;
            if (!(hi > lo))
                throw DataError(
                    "equal-width discretization needs a non-constant sample");
            const double w = (hi - lo) / bins;
            for (std::size_t i = 0; i < n; ++i) {
                const int b = 1 + static_cast<int>(
                                      std::floor((sample[i] - lo) / w));
                out[i] = std::clamp(b, 1, bins);
            }
            return out;
        }
        case MarginalKind::equal_freq: {
            if (static_cast<std::size_t>(bins) > n)
                throw DataError(
                    "equal-frequency discretization needs bins <= sample size");
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0u);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return sample[a] < sample[b];
                             });
            for (std::size_t j = 0; j < n; ++j) {
                const auto bin = (j * static_cast<std::size_t>(bins)) / n;
                out[order[j]] = static_cast<int>(bin) + 1;
            }
            return out;
        }
        default:
            throw std::invalid_argument(
                "discretize handles only the interval-index kinds");
    }
}

}  // namespace treetheta
