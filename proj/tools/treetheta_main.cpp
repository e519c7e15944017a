// Command-line front end: closed-form ellipse geometry, synthetic tree
// generation, the angle statistic on tree files, the Monte-Carlo comparison
// harness, and dataset analysis / mimic bootstrap.
//
// Exit codes: 0 success, 2 bad usage, 3 data error. Timing goes to stderr
// only, so stdout bytes depend only on the inputs.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treetheta/datagen.hpp"
#include "treetheta/ellipse.hpp"
#include "treetheta/errors.hpp"
#include "treetheta/estimation.hpp"
#include "treetheta/simulation.hpp"
#include "treetheta/tree_io.hpp"

namespace tt = treetheta;

namespace {

double to_degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

int env_threads() {
    const char* v = std::getenv("TREETHETA_THREADS");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 0 || n > 4096)
        throw std::invalid_argument(
            "TREETHETA_THREADS must be an integer in [0, 4096]");
    return static_cast<int>(n);
}

tt::DampingFn damping_fn(tt::DampingKind kind, double rho, int max_gen) {
    return [kind, rho, max_gen](int i) {
        return tt::damping_value(kind, i, rho, max_gen);
    };
}

tt::PairedTree load_tree_arg(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return tt::parse_paired_tree(buf.str());
    }
    return tt::load_paired_tree(path);
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw tt::DataError("cannot open file for writing: " + path);
    const std::size_t n = std::fwrite(text.data(), 1, text.size(), f);
    const bool ok = n == text.size() && std::fclose(f) == 0;
    if (!ok) throw tt::DataError("failed writing file: " + path);
}

void print_fit(const char* label, const tt::GenerationFit& fit) {
    std::printf("%s: generations=%zu pooled_corr=%.6g\n", label,
                fit.by_generation.size(), fit.pooled_corr);
    for (std::size_t i = 0; i < fit.by_generation.size(); ++i) {
        const auto& g = fit.by_generation[i];
        std::printf(
            "  gen %zu: n=%zu mean=(%.6g, %.6g) sd=(%.6g, %.6g) corr=%.6g\n",
            i + 1, g.count, g.mean_x, g.mean_y, g.sd_x, g.sd_y, g.corr);
    }
}

struct TheoryOpts {
    double mu1 = 3.0, mu2 = 3.0, sigma1 = 1.0, sigma2 = 1.0, rho = 0.5;
    double alpha = 0.05;
    double x0 = 0.0, y0 = 0.0;
    int schedule = 0;
    double tau = 0.1, target_var = 1.0;
    tt::DampingKind damping = tt::DampingKind::exponential;
    std::string epsilon = "harmonic";
};

void run_theory(const TheoryOpts& o) {
    const double lambda = tt::lambda_from_alpha(o.alpha);
    if (o.schedule > 0) {
        // Normalized-pipeline schedule: target mean, damped correlation and
        // closed-form angle of the generation-i ellipse seen from the origin.
        const auto f = damping_fn(o.damping, o.rho, o.schedule);
        std::printf("lambda=%.12g tau=%.12g target_var=%.12g\n", lambda, o.tau,
                    o.target_var);
        const double sigma = std::sqrt(o.target_var);
        for (int i = 1; i <= o.schedule; ++i) {
            const double eps = o.epsilon == "exact"
                                   ? tt::epsilon_from_damping(f, o.rho, i)
                                   : tt::epsilon_harmonic(i);
            const double mu =
                tt::target_mean(eps, o.tau, o.target_var, o.alpha);
            const tt::BivariateGaussian gen{mu, mu, sigma, sigma, f(i)};
            const double angle = tt::included_angle(gen, o.alpha, 0.0, 0.0);
            std::printf(
                "i=%d f=%.12g eps=%.12g mu_star=%.12g angle_radians=%.12g "
                "angle_degrees=%.12g\n",
                i, f(i), eps, mu, angle, to_degrees(angle));
        }
        return;
    }
    const tt::BivariateGaussian dist{o.mu1, o.mu2, o.sigma1, o.sigma2, o.rho};
    const tt::QuantileEllipse e = tt::quantile_ellipse(dist, o.alpha);
    std::printf("lambda=%.12g\n", lambda);
    std::printf("c2=%.12g\n", e.c2);
    std::printf("density_height=%.12g\n", e.density_height);
    const bool in_region =
        tt::positive_slope_region_contains(dist, o.alpha, o.x0, o.y0);
    std::printf("positive_slope_region=%s\n", in_region ? "yes" : "no");
    const tt::TangentSlopes k = tt::tangent_slopes(e, o.x0, o.y0);
    std::printf("k1=%.12g\nk2=%.12g\n", k.k1, k.k2);
    if (in_region) {
        const double angle = tt::included_angle(dist, o.alpha, o.x0, o.y0);
        std::printf("angle_radians=%.12g\n", angle);
        std::printf("angle_degrees=%.12g\n", to_degrees(angle));
    }
}

struct GenerateOpts {
    std::string out = "-";
    tt::GenConfig cfg;
    std::string family = "gaussian";
    double shape = 2.0, scale = 1.0, d1 = 6.0, d2 = 12.0, nu = 5.0,
           pois_mean = 10.0;
};

void run_generate(GenerateOpts& o) {
    static const std::map<std::string, tt::MarginalKind> kinds{
        {"gaussian", tt::MarginalKind::gaussian},
        {"gamma", tt::MarginalKind::gamma},
        {"f", tt::MarginalKind::fisher_f},
        {"student_t", tt::MarginalKind::student_t},
        {"poisson", tt::MarginalKind::poisson},
        {"equal_width", tt::MarginalKind::equal_width},
        {"equal_freq", tt::MarginalKind::equal_freq}};
    o.cfg.marginal.kind = kinds.at(o.family);
    switch (o.cfg.marginal.kind) {
        case tt::MarginalKind::gamma:
            o.cfg.marginal.family = tt::Family::gamma(o.shape, o.scale);
            break;
        case tt::MarginalKind::fisher_f:
            o.cfg.marginal.family = tt::Family::fisher_f(o.d1, o.d2);
            break;
        case tt::MarginalKind::student_t:
            o.cfg.marginal.family = tt::Family::student_t(o.nu);
            break;
        case tt::MarginalKind::poisson:
            o.cfg.marginal.family = tt::Family::poisson(o.pois_mean);
            break;
        default:
            break;
    }
    const tt::PairedTree tree = tt::generate_pair(o.cfg);
    write_output(o.out, tt::serialize_paired_tree(tree));
}

struct AngleOpts {
    std::string input;
    double alpha = 0.05, tau = 0.1, target_var = 1.0;
    bool normalize = true;
    bool sign_flip = false;
    std::string epsilon = "harmonic";
    double rho = 0.5;
    tt::DampingKind damping = tt::DampingKind::exponential;
    std::string format = "text";
};

void run_angle(const AngleOpts& o) {
    const tt::PairedTree tree = load_tree_arg(o.input);
    tt::NormalizationConfig cfg;
    cfg.alpha = o.alpha;
    cfg.tau = o.tau;
    cfg.sigma2 = o.target_var;
    cfg.normalize = o.normalize;
    cfg.sign_flip = o.sign_flip;
    if (o.epsilon == "exact") {
        const tt::PairedTree unit = tt::expand_to_unit_series(tree);
        const int max_gen = tt::extract_increments(unit).max_generation();
        const auto f = damping_fn(o.damping, o.rho, max_gen);
        const double rho = o.rho;
        cfg.epsilon = [f, rho](int i) {
            return tt::epsilon_from_damping(f, rho, i);
        };
    }
    const tt::AngleEstimate est = tt::tree_delta_theta(tree, cfg);
    const tt::GenerationIncrements inc =
        tt::extract_increments(tt::expand_to_unit_series(tree));
    const double pearson = tt::pooled_pearson(inc);
    if (o.format == "csv") {
        std::printf("angle_radians,angle_degrees,n,m,candidates,pearson\n");
        std::printf("%.17g,%.17g,%zu,%zu,%zu,%.17g\n", est.angle,
                    to_degrees(est.angle), est.point_count, est.window_size,
                    est.widths.size(), pearson);
        return;
    }
    std::printf("angle_degrees=%.12g\n", to_degrees(est.angle));
    std::printf("angle_radians=%.12g\n", est.angle);
    std::printf("n=%zu\n", est.point_count);
    std::printf("m=%zu\n", est.window_size);
    std::printf("candidates=%zu\n", est.widths.size());
    std::printf("pearson=%.12g\n", pearson);
}

struct SimulateOpts {
    tt::ExperimentSpec spec;
    std::string family = "gaussian";
    std::string setting = "same";
    std::string damping = "exp";
    std::string preset;
    std::string format = "table";
    std::string out = "-";
};

void run_simulate(SimulateOpts& o, bool reps_given, bool batches_given,
                  bool threads_given) {
    static const std::map<std::string, tt::MarginalKind> kinds{
        {"gaussian", tt::MarginalKind::gaussian},
        {"gamma", tt::MarginalKind::gamma},
        {"f", tt::MarginalKind::fisher_f},
        {"student_t", tt::MarginalKind::student_t},
        {"poisson", tt::MarginalKind::poisson},
        {"equal_width", tt::MarginalKind::equal_width},
        {"equal_freq", tt::MarginalKind::equal_freq}};
    o.spec.family = kinds.at(o.family);
    o.spec.setting = o.setting == "same" ? tt::ParamSetting::same
                                         : tt::ParamSetting::different;
    o.spec.damping = o.damping == "linear" ? tt::DampingKind::linear
                                           : tt::DampingKind::exponential;
    if (o.preset == "full") {
        if (!reps_given) o.spec.reps = 1000;
        if (!batches_given) o.spec.batches = 100;
    } else if (o.preset == "desk" || o.preset.empty()) {
        if (!reps_given) o.spec.reps = 200;
        if (!batches_given) o.spec.batches = 20;
    }
    if (!threads_given) o.spec.threads = env_threads();

    const tt::ExperimentResult res = tt::run_comparison(o.spec);
    const std::vector<tt::SummaryRow> rows =
        tt::summarize(std::span(&res, 1));
    const std::string text = o.format == "csv" ? tt::render_csv(rows)
                                               : tt::render_table(rows);
    write_output(o.out, text);
    std::fprintf(stderr, "elapsed_seconds=%.3f\n", res.seconds);
}

struct AnalyzeOpts {
    std::vector<std::string> inputs;
    int reps = 200, batches = 20;
    std::uint64_t seed = 0;
    int threads = 0;
    double alpha = 0.05, tau = 0.1, target_var = 1.0;
    bool normalize = true;
    bool sign_flip = false;
};

void run_analyze(const AnalyzeOpts& o, bool mimic_given, bool threads_given) {
    tt::NormalizationConfig cfg;
    cfg.alpha = o.alpha;
    cfg.tau = o.tau;
    cfg.sigma2 = o.target_var;
    cfg.normalize = o.normalize;
    cfg.sign_flip = o.sign_flip;

    const tt::PairedTree a = load_tree_arg(o.inputs[0]);
    const tt::GenerationIncrements inc_a =
        tt::extract_increments(tt::expand_to_unit_series(a));
    print_fit("dataset A", tt::fit_generations(inc_a));
    const double angle_a = tt::tree_delta_theta(a, cfg).angle;
    std::printf("A: angle_radians=%.12g angle_degrees=%.12g pearson_inc=%.12g "
                "pearson_flat=%.12g\n",
                angle_a, to_degrees(angle_a), tt::pooled_pearson(inc_a),
                tt::pooled_pearson_values(a));
    if (o.inputs.size() == 1) return;

    const tt::PairedTree b = load_tree_arg(o.inputs[1]);
    const tt::GenerationIncrements inc_b =
        tt::extract_increments(tt::expand_to_unit_series(b));
    print_fit("dataset B", tt::fit_generations(inc_b));
    const double angle_b = tt::tree_delta_theta(b, cfg).angle;
    std::printf("B: angle_radians=%.12g angle_degrees=%.12g pearson_inc=%.12g "
                "pearson_flat=%.12g\n",
                angle_b, to_degrees(angle_b), tt::pooled_pearson(inc_b),
                tt::pooled_pearson_values(b));
    if (!mimic_given) return;

    const int threads = threads_given ? o.threads : env_threads();
    const tt::MimicResult mimic = tt::mimic_bootstrap(
        a, b, o.reps, o.batches, o.seed, cfg, threads);
    std::printf("mimic: reps=%d batches=%d seed=%llu\n", o.reps, o.batches,
                static_cast<unsigned long long>(o.seed));
    std::printf("angle ordering (A wider than B): %s failures=%llu\n",
                tt::format_cell(mimic.angle.mean, mimic.angle.sd).c_str(),
                static_cast<unsigned long long>(mimic.angle.failures));
    std::printf("flat pearson ordering (A below B): %s failures=%llu\n",
                tt::format_cell(mimic.pearson.mean, mimic.pearson.sd).c_str(),
                static_cast<unsigned long long>(mimic.pearson.failures));
    std::fprintf(stderr, "elapsed_seconds=%.3f\n", mimic.angle.seconds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree-correlation angle statistic toolkit"};
    app.require_subcommand(1);

    const std::map<std::string, tt::DampingKind> damping_map{
        {"exp", tt::DampingKind::exponential},
        {"linear", tt::DampingKind::linear}};
    const std::vector<std::string> family_names{
        "gaussian", "gamma", "f", "student_t", "poisson", "equal_width",
        "equal_freq"};

    TheoryOpts th;
    auto* theory = app.add_subcommand(
        "theory", "Quantile-ellipse geometry and angle schedules");
    theory->add_option("--mu1", th.mu1, "Center x");
    theory->add_option("--mu2", th.mu2, "Center y");
    theory->add_option("--sigma1", th.sigma1, "Sd of x");
    theory->add_option("--sigma2", th.sigma2, "Sd of y");
    theory->add_option("--rho", th.rho, "Correlation");
    theory->add_option("--alpha", th.alpha, "Contour level");
    theory->add_option("--x0", th.x0, "Vertex x");
    theory->add_option("--y0", th.y0, "Vertex y");
    theory->add_option("--schedule", th.schedule,
                       "Print the normalized generation schedule up to this "
                       "generation instead");
    theory->add_option("--tau", th.tau, "Schedule spacing");
    theory->add_option("--schedule-var,--target-var", th.target_var,
                       "Normalized variance target for the schedule");
    theory->add_option("--f,--damping", th.damping, "Damping pattern")
        ->transform(CLI::CheckedTransformer(damping_map));
    theory->add_option("--epsilon", th.epsilon, "Schedule kind")
        ->check(CLI::IsMember({"harmonic", "exact"}));
    theory->callback([&] { run_theory(th); });

    GenerateOpts gen;
    auto* generate =
        app.add_subcommand("generate", "Write one synthetic tree pair");
    generate->add_option("--out", gen.out, "Output path ('-' = stdout)");
    generate->add_option("--seed", gen.cfg.seed, "Stream seed");
    generate->add_option("--branching", gen.cfg.branching, "Children per node");
    generate->add_option("--depth", gen.cfg.depth, "Generations");
    generate->add_option("--series-length", gen.cfg.series_length,
                         "Observations per node");
    generate->add_option("--mu-x", gen.cfg.mu_x, "Increment mean x");
    generate->add_option("--mu-y", gen.cfg.mu_y, "Increment mean y");
    generate->add_option("--var-x", gen.cfg.sigma1_sq, "Increment variance x");
    generate->add_option("--var-y", gen.cfg.sigma2_sq, "Increment variance y");
    generate->add_option("--rho", gen.cfg.rho, "Base correlation");
    generate->add_option("--f,--damping", gen.cfg.damping, "Damping pattern")
        ->transform(CLI::CheckedTransformer(damping_map));
    generate->add_option("--anchor-x", gen.cfg.anchor_x, "Anchor x");
    generate->add_option("--anchor-y", gen.cfg.anchor_y, "Anchor y");
    generate->add_option("--family", gen.family, "Marginal family")
        ->check(CLI::IsMember(family_names));
    generate->add_option("--shape", gen.shape, "Gamma shape");
    generate->add_option("--scale", gen.scale, "Gamma scale");
    generate->add_option("--d1", gen.d1, "F numerator df");
    generate->add_option("--d2", gen.d2, "F denominator df");
    generate->add_option("--nu", gen.nu, "Student t df");
    generate->add_option("--mean", gen.pois_mean, "Poisson mean");
    generate->add_option("--bins", gen.cfg.marginal.bins,
                         "Bins for the discretized families");
    generate->callback([&] { run_generate(gen); });

    AngleOpts ang;
    auto* angle =
        app.add_subcommand("angle", "Angle statistic of a tree pair file");
    angle->add_option("input", ang.input, "Tree file ('-' = stdin)")
        ->required();
    angle->add_option("--alpha", ang.alpha, "Excluded share");
    angle->add_option("--tau", ang.tau, "Schedule spacing");
    angle->add_option("--sigma2,--target-var", ang.target_var,
                      "Normalized variance target");
    angle->add_flag("--normalize,!--no-normalize", ang.normalize,
                    "Per-generation normalization (default on)");
    angle->add_flag("--sign-flip", ang.sign_flip,
                    "Reflect x when the pooled correlation is negative");
    angle->add_option("--epsilon", ang.epsilon, "Schedule kind")
        ->check(CLI::IsMember({"harmonic", "exact"}));
    angle->add_option("--rho", ang.rho,
                      "Correlation for the exact schedule");
    angle->add_option("--f,--damping", ang.damping,
                      "Damping pattern for the exact schedule")
        ->transform(CLI::CheckedTransformer(damping_map));
    angle->add_option("--format", ang.format, "Output format")
        ->check(CLI::IsMember({"text", "csv"}));
    angle->callback([&] { run_angle(ang); });

    SimulateOpts sim;
    auto* simulate =
        app.add_subcommand("simulate", "Monte-Carlo ordering comparison");
    simulate->add_option("--rho", sim.spec.rho, "First pair correlation");
    simulate->add_option("--eta", sim.spec.eta, "Correlation offset");
    simulate->add_option("--family", sim.family, "Marginal family")
        ->check(CLI::IsMember(family_names));
    simulate->add_option("--setting", sim.setting, "Nuisance drawing")
        ->check(CLI::IsMember({"same", "different", "diff"}));
    simulate->add_flag("--normalize,!--no-normalize", sim.spec.normalize,
                       "Per-generation normalization (default on)");
    simulate->add_option("--f,--damping", sim.damping, "Damping pattern")
        ->check(CLI::IsMember({"exp", "linear"}));
    auto* reps_opt =
        simulate->add_option("--reps", sim.spec.reps, "Replicates per batch");
    auto* batches_opt =
        simulate->add_option("--batches", sim.spec.batches, "Batches");
    simulate->add_option("--depth", sim.spec.depth, "Generations");
    simulate->add_option("--branching", sim.spec.branching,
                         "Children per node");
    simulate->add_option("--bins", sim.spec.bins,
                         "Bins for the discretized families");
    simulate->add_option("--seed", sim.spec.seed, "Stream seed");
    auto* threads_opt = simulate->add_option(
        "--threads", sim.spec.threads,
        "Worker threads (0 = hardware; default from TREETHETA_THREADS)");
    simulate->add_option("--preset", sim.preset, "Scale preset")
        ->check(CLI::IsMember({"desk", "full"}));
    simulate->add_option("--format", sim.format, "Output format")
        ->check(CLI::IsMember({"table", "csv"}));
    simulate->add_option("--out", sim.out, "Output path ('-' = stdout)");
    simulate->callback([&] {
        run_simulate(sim, reps_opt->count() > 0, batches_opt->count() > 0,
                     threads_opt->count() > 0);
    });

    AnalyzeOpts ana;
    auto* analyze = app.add_subcommand(
        "analyze", "Fit tree pair files and compare their angle statistics; "
                   "--mimic-reps adds the parametric bootstrap comparison");
    analyze->add_option("inputs", ana.inputs, "One or two tree files")
        ->expected(1, 2)
        ->required();
    auto* mimic_opt = analyze->add_option(
        "--mimic-reps", ana.reps,
        "Run the mimic bootstrap on two files with this many replicates "
        "per batch");
    analyze->add_option("--batches", ana.batches, "Mimic batches");
    analyze->add_option("--seed", ana.seed, "Stream seed");
    auto* ana_threads = analyze->add_option(
        "--threads", ana.threads,
        "Worker threads (0 = hardware; default from TREETHETA_THREADS)");
    analyze->add_option("--alpha", ana.alpha, "Excluded share");
    analyze->add_option("--tau", ana.tau, "Schedule spacing");
    analyze->add_option("--sigma2,--target-var", ana.target_var,
                        "Normalized variance target");
    analyze->add_flag("--normalize,!--no-normalize", ana.normalize,
                      "Per-generation normalization (default on)");
    analyze->add_flag("--sign-flip", ana.sign_flip,
                      "Reflect x when the pooled correlation is negative");
    analyze->callback([&] {
        run_analyze(ana, mimic_opt->count() > 0 && ana.inputs.size() == 2,
                    ana_threads->count() > 0);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const tt::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
