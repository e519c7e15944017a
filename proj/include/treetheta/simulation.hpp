#pragma once

// Monte-Carlo comparison harness. Each replicate generates two tree pairs
// whose increment correlations differ (rho vs rho + eta), runs the angle
// pipeline on both, and records whether the less-correlated pair produced
// the larger angle. Replicates are independent deterministic streams
// (stream id = replicate index) and are reduced in index order, so results
// are byte-identical for any thread count.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treetheta/datagen.hpp"
#include "treetheta/estimation.hpp"

namespace treetheta {

enum class ParamSetting {
    same,       // both pairs share one nuisance-parameter draw
    different,  // each pair draws its own (stratified ranges; see source)
};

struct ExperimentSpec {
    double rho = 0.1;
    double eta = 0.05;  // second pair runs at rho + eta
    MarginalKind family = MarginalKind::gaussian;
    DampingKind damping = DampingKind::exponential;
    ParamSetting setting = ParamSetting::same;
    bool normalize = true;
    int reps = 200;    // replicates per batch (desk scale; full scale 1000)
    int batches = 20;  // desk scale; full scale 100
    int depth = 7;
    int branching = 2;
    int bins = 10;  // for the discretized families
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware concurrency

    void check() const;  // throws std::invalid_argument (e.g. rho + eta >= 1)
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<double> batch_proportions;  // share of replicates with
                                            // angle(rho) > angle(rho + eta)
    double mean = 0.0;  // mean of batch proportions
    double sd = 0.0;    // sample sd over batches
    std::uint64_t failures = 0;  // replicates aborted by pipeline errors
    double seconds = 0.0;        // wall clock; never serialized
};

ExperimentResult run_comparison(const ExperimentSpec& spec);

// Per-generation fit of increment moments and correlation used by the mimic
// bootstrap. Generations too small to carry their own second moments
// (n < 2 for sd, n < 3 for correlation) or with zero spread fall back to
// the pooled values; correlations are clamped away from +-1.
struct FittedGeneration {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sd_x = 0.0;
    double sd_y = 0.0;
    double corr = 0.0;
    std::size_t count = 0;
};

struct GenerationFit {
    std::vector<FittedGeneration> by_generation;
    double pooled_corr = 0.0;
};

GenerationFit fit_generations(const GenerationIncrements& inc);

// Parametric bootstrap for two observed datasets: fit each, synthesize
// mimic pairs on each dataset's own topology, and compare both by the angle
// pipeline and by the flat Pearson baseline, which treats each synthesized
// dataset as one pooled vector of (x, y) node values with no per-generation
// treatment. Both proportions count the orderings "A less correlated than
// B": angle_A > angle_B and pearson_A < pearson_B.
struct MimicResult {
    ExperimentResult angle;
    ExperimentResult pearson;
    GenerationFit fit_a;
    GenerationFit fit_b;
};

MimicResult mimic_bootstrap(const PairedTree& a, const PairedTree& b, int reps,
                            int batches, std::uint64_t seed,
                            const NormalizationConfig& cfg = {}, int threads = 0);

// "mean (sd)" cell: mean printed to two decimals with trailing zeros
// dropped, sd in one-significant-digit scientific form, e.g. "0.54 (3e-04)".
std::string format_cell(double mean, double sd);

struct SummaryRow {
    double rho = 0.0;
    double eta = 0.0;
    std::string setting;
    bool normalize = true;
    std::string family;
    double mean = 0.0;
    double sd = 0.0;
    int reps = 0;
    int batches = 0;
    std::uint64_t seed = 0;
    std::uint64_t failures = 0;
    std::string cell;
};

std::vector<SummaryRow> summarize(std::span<const ExperimentResult> results);

// Plain-text table with one line per row (includes cell and failures).
std::string render_table(std::span<const SummaryRow> rows);

// Machine-readable CSV, header
// rho,eta,setting,normalize,family,mean,sd,reps,batches,seed
// with shortest-round-trip number formatting. Timing never appears, so
// output bytes depend only on the experiment parameters and seed.
std::string render_csv(std::span<const SummaryRow> rows);

}  // namespace treetheta
