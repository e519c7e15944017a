#include "treetheta/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "treetheta/errors.hpp"

namespace treetheta {

namespace {

struct Range {
    double lo, hi;
};

// Nuisance-parameter strata. The shared setting draws once from the wide
// ranges and reuses the draw for both pairs. The different-parameters
// setting gives pair 1 a tight, far-from-vertex stratum and pair 2 a wide,
// close one, so the raw (unnormalized) angle ordering is driven by the
// nuisance parameters instead of the correlation difference.
constexpr Range kMuShared{2.0, 3.0}, kVarShared{0.5, 1.25};
constexpr Range kMuFirst{2.5, 3.0}, kVarFirst{0.5, 0.75};
constexpr Range kMuSecond{2.0, 2.5}, kVarSecond{1.0, 1.25};
constexpr Range kGammaShapeShared{1.0, 3.0}, kGammaShapeFirst{2.0, 3.0},
    kGammaShapeSecond{1.0, 2.0}, kGammaScale{0.5, 2.0};
constexpr Range kFD1Shared{3.0, 12.0}, kFD1First{6.0, 12.0},
    kFD1Second{3.0, 6.0}, kFD2{8.0, 20.0};
// nu >= 5 keeps the fourth moment finite so per-generation scale estimates
// stay usable during normalization.
constexpr Range kTNuShared{5.0, 15.0}, kTNuFirst{10.0, 15.0},
    kTNuSecond{5.0, 10.0};
constexpr Range kPoisShared{8.0, 20.0}, kPoisFirst{14.0, 20.0},
    kPoisSecond{8.0, 14.0};

enum class Stratum { shared, first, second };

Range pick(Stratum s, Range shared, Range first, Range second) {
    switch (s) {
        case Stratum::shared: return shared;
        case Stratum::first: return first;
        case Stratum::second: return second;
    }
    return shared;
}

struct Nuisance {
    double mu_x = 2.0, mu_y = 2.0;
    double s1sq = 1.0, s2sq = 1.0;
    Family family = Family::normal(0.0, 1.0);
};

double draw(RngStream& rng, Range r) { return rng.uniform(r.lo, r.hi); }

// Fixed draw order: mu_x, mu_y, var_x, var_y, then family parameters.
Nuisance draw_nuisance(RngStream& rng, MarginalKind family, Stratum s) {
    Nuisance n;
    n.mu_x = draw(rng, pick(s, kMuShared, kMuFirst, kMuSecond));
    n.mu_y = draw(rng, pick(s, kMuShared, kMuFirst, kMuSecond));
    n.s1sq = draw(rng, pick(s, kVarShared, kVarFirst, kVarSecond));
    n.s2sq = draw(rng, pick(s, kVarShared, kVarFirst, kVarSecond));
    switch (family) {
        case MarginalKind::gamma:
            n.family = Family::gamma(
                draw(rng, pick(s, kGammaShapeShared, kGammaShapeFirst,
                               kGammaShapeSecond)),
                draw(rng, kGammaScale));
            break;
        case MarginalKind::fisher_f:
            n.family = Family::fisher_f(
                draw(rng, pick(s, kFD1Shared, kFD1First, kFD1Second)),
                draw(rng, kFD2));
            break;
        case MarginalKind::student_t:
            n.family = Family::student_t(
                draw(rng, pick(s, kTNuShared, kTNuFirst, kTNuSecond)));
            break;
        case MarginalKind::poisson:
            n.family = Family::poisson(
                draw(rng, pick(s, kPoisShared, kPoisFirst, kPoisSecond)));
            break;
        default:
            break;  // gaussian and the discretized kinds have no extra knobs
    }
    return n;
}

GenConfig make_gen_config(const ExperimentSpec& spec, const Nuisance& n,
                          double rho) {
    GenConfig cfg;
    cfg.branching = spec.branching;
    cfg.depth = spec.depth;
    cfg.series_length = 1;
    cfg.mu_x = n.mu_x;
    cfg.mu_y = n.mu_y;
    cfg.sigma1_sq = n.s1sq;
    cfg.sigma2_sq = n.s2sq;
    cfg.rho = rho;
    cfg.damping = spec.damping;
    cfg.marginal.kind = spec.family;
    cfg.marginal.family = n.family;
    cfg.marginal.bins = spec.bins;
    return cfg;
}

// Runs fn(i) for i in [0, total). Work is chunked contiguously across
// threads; fn writes only to slot i, so reducing the slots in index order
// afterwards gives the same bytes for every thread count.
template <class Fn>
void parallel_for(std::uint64_t total, int threads, const Fn& fn) {
    std::uint64_t t = threads > 0
                          ? static_cast<std::uint64_t>(threads)
                          : std::max(1u, std::thread::hardware_concurrency());
    t = std::clamp<std::uint64_t>(t, 1, std::max<std::uint64_t>(total, 1));
    if (t == 1) {
        for (std::uint64_t i = 0; i < total; ++i) fn(i);
        return;
    }
    const std::uint64_t chunk = (total + t - 1) / t;
    std::vector<std::thread> pool;
    std::mutex mu;
    std::exception_ptr first_error;
    for (std::uint64_t w = 0; w < t; ++w) {
        const std::uint64_t lo = w * chunk;
        const std::uint64_t hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::uint64_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Batch reduction shared by the harness and the mimic bootstrap.
void reduce_batches(const std::vector<unsigned char>& win,
                    const std::vector<unsigned char>& fail, int reps,
                    int batches, ExperimentResult& out) {
    out.batch_proportions.clear();
    out.failures = 0;
    for (int b = 0; b < batches; ++b) {
        std::uint64_t wins = 0, fails = 0;
        const std::uint64_t base =
            static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(reps);
        for (int r = 0; r < reps; ++r) {
            wins += win[base + static_cast<std::uint64_t>(r)];
            fails += fail[base + static_cast<std::uint64_t>(r)];
        }
        const std::uint64_t completed =
            static_cast<std::uint64_t>(reps) - fails;
        if (completed == 0)
            throw DataError("batch " + std::to_string(b + 1) +
                            ": every replicate failed");
        out.failures += fails;
        out.batch_proportions.push_back(static_cast<double>(wins) /
                                        static_cast<double>(completed));
    }
    double sum = 0.0;
    for (const double p : out.batch_proportions) sum += p;
    out.mean = sum / static_cast<double>(batches);
    double ss = 0.0;
    for (const double p : out.batch_proportions) {
        const double d = p - out.mean;
        ss += d * d;
    }
    out.sd = batches > 1 ? std::sqrt(ss / (batches - 1.0)) : 0.0;
}

double clamp_corr(double r) { return std::clamp(r, -0.999, 0.999); }

double pearson_flat(std::span<const IncrementPair> pts) {
    GenerationIncrements tmp;
    tmp.by_generation.emplace_back(pts.begin(), pts.end());
    return pooled_pearson(tmp);
}

// Redraws a unit-series tree: same ids, parents and anchor, increments
// sampled from the per-generation fit, values accumulated along the paths.
PairedTree synthesize(const PairedTree& unit,
                      const std::vector<std::ptrdiff_t>& parent_index,
                      const std::vector<int>& generations,
                      const GenerationFit& fit, RngStream& rng,
                      std::vector<IncrementPair>& drawn) {
    PairedTree out;
    out.anchor_x = unit.anchor_x;
    out.anchor_y = unit.anchor_y;
    out.nodes.resize(unit.nodes.size());
    drawn.clear();
    drawn.reserve(unit.nodes.size());
    for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
        const auto& g =
            fit.by_generation[static_cast<std::size_t>(generations[i]) - 1];
        const auto [dx, dy] = sample_bivariate_normal(g.mean_x, g.mean_y,
                                                      g.sd_x, g.sd_y, g.corr,
                                                      rng);
        drawn.push_back({dx, dy});
        double vx = out.anchor_x;
        double vy = out.anchor_y;
        if (parent_index[i] >= 0) {
            const auto& p = out.nodes[static_cast<std::size_t>(parent_index[i])];
            vx = p.x[0];
            vy = p.y[0];
        }
        auto& node = out.nodes[i];
        node.id = unit.nodes[i].id;
        node.parent_id = unit.nodes[i].parent_id;
        node.x = {vx + dx};
        node.y = {vy + dy};
    }
    return out;
}

std::vector<std::ptrdiff_t> parent_indices(const PairedTree& unit) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(unit.nodes.size());
    for (std::size_t i = 0; i < unit.nodes.size(); ++i)
        index.emplace(unit.nodes[i].id, i);
    std::vector<std::ptrdiff_t> out(unit.nodes.size(), -1);
    for (std::size_t i = 0; i < unit.nodes.size(); ++i)
        if (!unit.nodes[i].parent_id.empty())
            out[i] = static_cast<std::ptrdiff_t>(
                index.at(unit.nodes[i].parent_id));
    return out;
}

std::string shortest_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const char* setting_name(ParamSetting s) {
    return s == ParamSetting::same ? "same" : "different";
}

}  // namespace

void ExperimentSpec::check() const {
    if (!(std::fabs(rho) < 1.0))
        throw std::invalid_argument("|rho| must be < 1");
    if (!std::isfinite(eta) || !(std::fabs(rho + eta) < 1.0))
        throw std::invalid_argument("rho + eta must stay inside (-1, 1)");
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    if (batches < 1) throw std::invalid_argument("batches must be >= 1");
    if (depth < 1 || branching < 1)
        throw std::invalid_argument("depth and branching must be >= 1");
    if (bins < 1) throw std::invalid_argument("bins must be >= 1");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
    if (static_cast<std::uint64_t>(reps) * static_cast<std::uint64_t>(batches) >
        (1ull << 32))
        throw std::invalid_argument("too many replicates");
}

ExperimentResult run_comparison(const ExperimentSpec& spec) {
    spec.check();
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t total = static_cast<std::uint64_t>(spec.reps) *
                                static_cast<std::uint64_t>(spec.batches);
    std::vector<unsigned char> win(total, 0), fail(total, 0);

    parallel_for(total, spec.threads, [&](std::uint64_t ridx) {
        RngStream rng(spec.seed, ridx);
        try {
            const Nuisance a =
                draw_nuisance(rng, spec.family,
                              spec.setting == ParamSetting::same
                                  ? Stratum::shared
                                  : Stratum::first);
            const Nuisance b = spec.setting == ParamSetting::same
                                   ? a
                                   : draw_nuisance(rng, spec.family,
                                                   Stratum::second);
            const PairedTree ta =
                generate_pair(make_gen_config(spec, a, spec.rho), rng);
            const PairedTree tb = generate_pair(
                make_gen_config(spec, b, spec.rho + spec.eta), rng);
            NormalizationConfig ncfg;
            ncfg.normalize = spec.normalize;
            const double angle_a = tree_delta_theta(ta, ncfg).angle;
            const double angle_b = tree_delta_theta(tb, ncfg).angle;
            win[ridx] = angle_a > angle_b ? 1 : 0;
        } catch (const DataError&) {
            fail[ridx] = 1;
        }
    });

    ExperimentResult res;
    res.spec = spec;
    reduce_batches(win, fail, spec.reps, spec.batches, res);
    res.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
}

GenerationFit fit_generations(const GenerationIncrements& inc) {
    std::vector<IncrementPair> all;
    all.reserve(inc.total());
    for (const auto& g : inc.by_generation)
        all.insert(all.end(), g.begin(), g.end());
    const double pooled_r = clamp_corr(pearson_flat(all));

    const GenerationMoments pooled_src = [&] {
        GenerationIncrements one;
        one.by_generation.push_back(all);
        return generation_moments(one);
    }();
    const auto& pooled = pooled_src.by_generation[0];

    const GenerationMoments moments = generation_moments(inc);
    std::unordered_map<int, double> gen_corr;
    for (const auto& [gen, r] : per_generation_pearson(inc))
        gen_corr.emplace(gen, r);

    GenerationFit fit;
    fit.pooled_corr = pooled_r;
    fit.by_generation.reserve(inc.by_generation.size());
    for (std::size_t gi = 0; gi < inc.by_generation.size(); ++gi) {
        const auto& g = inc.by_generation[gi];
        const auto& m = moments.by_generation[gi];
        FittedGeneration f;
        f.count = g.size();
        f.mean_x = g.empty() ? pooled.mean_x : m.mean_x;
        f.mean_y = g.empty() ? pooled.mean_y : m.mean_y;
        f.sd_x = (g.size() < 2 || !(m.sd_x > 0.0)) ? pooled.sd_x : m.sd_x;
        f.sd_y = (g.size() < 2 || !(m.sd_y > 0.0)) ? pooled.sd_y : m.sd_y;
        f.corr = pooled_r;
        const auto it = gen_corr.find(static_cast<int>(gi) + 1);
        if (g.size() >= 3 && it != gen_corr.end()) f.corr = clamp_corr(it->second);
        fit.by_generation.push_back(f);
    }
    return fit;
}

MimicResult mimic_bootstrap(const PairedTree& a, const PairedTree& b, int reps,
                            int batches, std::uint64_t seed,
                            const NormalizationConfig& cfg, int threads) {
    if (reps < 1 || batches < 1)
        throw std::invalid_argument("reps and batches must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();

    const PairedTree unit_a = expand_to_unit_series(a);
    const PairedTree unit_b = expand_to_unit_series(b);
    const GenerationIncrements inc_a = extract_increments(unit_a);
    const GenerationIncrements inc_b = extract_increments(unit_b);

    MimicResult out;
    out.fit_a = fit_generations(inc_a);
    out.fit_b = fit_generations(inc_b);

    const std::vector<std::ptrdiff_t> par_a = parent_indices(unit_a);
    const std::vector<std::ptrdiff_t> par_b = parent_indices(unit_b);
    const std::vector<int> gen_a = node_generations(unit_a);
    const std::vector<int> gen_b = node_generations(unit_b);

    const std::uint64_t total = static_cast<std::uint64_t>(reps) *
                                static_cast<std::uint64_t>(batches);
    std::vector<unsigned char> win_angle(total, 0), win_pearson(total, 0),
        fail(total, 0);

    parallel_for(total, threads, [&](std::uint64_t ridx) {
        RngStream rng(seed, ridx);
        std::vector<IncrementPair> drawn_a, drawn_b;
        try {
            const PairedTree syn_a =
                synthesize(unit_a, par_a, gen_a, out.fit_a, rng, drawn_a);
            const PairedTree syn_b =
                synthesize(unit_b, par_b, gen_b, out.fit_b, rng, drawn_b);
            const double angle_a = tree_delta_theta(syn_a, cfg).angle;
            const double angle_b = tree_delta_theta(syn_b, cfg).angle;
            // The flat baseline sees each mimic dataset as one vector of
            // (x, y) observations — node values, no per-generation
            // treatment — so generation drift contaminates it by design.
            const double r_a = pooled_pearson_values(syn_a);
            const double r_b = pooled_pearson_values(syn_b);
            win_angle[ridx] = angle_a > angle_b ? 1 : 0;
            win_pearson[ridx] = r_a < r_b ? 1 : 0;
        } catch (const DataError&) {
            fail[ridx] = 1;
        }
    });

    ExperimentSpec spec;
    spec.rho = out.fit_a.pooled_corr;
    spec.eta = out.fit_b.pooled_corr - out.fit_a.pooled_corr;
    spec.setting = ParamSetting::different;
    spec.normalize = cfg.normalize;
    spec.reps = reps;
    spec.batches = batches;
    spec.seed = seed;
    spec.threads = threads;

    out.angle.spec = spec;
    reduce_batches(win_angle, fail, reps, batches, out.angle);
    out.pearson.spec = spec;
    reduce_batches(win_pearson, fail, reps, batches, out.pearson);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    out.angle.seconds = seconds;
    out.pearson.seconds = seconds;
    return out;
}

std::string format_cell(double mean, double sd) {
    char mb[64];
    std::snprintf(mb, sizeof mb, "%.2f", mean);
    std::string m(mb);
    if (m.find('.') != std::string::npos) {
        while (!m.empty() && m.back() == '0') m.pop_back();
        if (!m.empty() && m.back() == '.') m.pop_back();
    }
    char sb[64];
    std::snprintf(sb, sizeof sb, "%.0e", sd);
    return m + " (" + sb + ")";
}

std::vector<SummaryRow> summarize(std::span<const ExperimentResult> results) {
    std::vector<SummaryRow> rows;
    rows.reserve(results.size());
    for (const auto& r : results) {
        SummaryRow row;
        row.rho = r.spec.rho;
        row.eta = r.spec.eta;
        row.setting = setting_name(r.spec.setting);
        row.normalize = r.spec.normalize;
        row.family = marginal_name(r.spec.family);
        row.mean = r.mean;
        row.sd = r.sd;
        row.reps = r.spec.reps;
        row.batches = r.spec.batches;
        row.seed = r.spec.seed;
        row.failures = r.failures;
        row.cell = format_cell(r.mean, r.sd);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_table(std::span<const SummaryRow> rows) {
    std::string out =
        "   rho    eta  setting    norm  family      reps  batches  failures"
        "  result\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line,
                      "%6.2f %6.2f  %-9s %-5s %-10s %5d %8d %9llu  %s\n",
                      r.rho, r.eta, r.setting.c_str(),
                      r.normalize ? "yes" : "no", r.family.c_str(), r.reps,
                      r.batches, static_cast<unsigned long long>(r.failures),
                      r.cell.c_str());
        out += line;
    }
    return out;
}

std::string render_csv(std::span<const SummaryRow> rows) {
    std::string out =
        "rho,eta,setting,normalize,family,mean,sd,reps,batches,seed\n";
    for (const auto& r : rows) {
        out += shortest_double(r.rho);
        out += ',';
        out += shortest_double(r.eta);
        out += ',';
        out += r.setting;
        out += ',';
        out += r.normalize ? "true" : "false";
        out += ',';
        out += r.family;
        out += ',';
        out += shortest_double(r.mean);
        out += ',';
        out += shortest_double(r.sd);
        out += ',';
        out += std::to_string(r.reps);
        out += ',';
        out += std::to_string(r.batches);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

}  // namespace treetheta
