#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfx/discovery.hpp"
#include "cfx/model.hpp"
#include "cfx/scm.hpp"
#include "cfx/scoring.hpp"

namespace cfx {

// ---------------------------------------------------------------------------
// Metrics

// Mean absolute error per variable averaged over trials, then averaged over
// variables. Both matrices are trials x variables and must agree in shape;
// every row needs at least one variable.
double mae_bar(const std::vector<std::vector<double>>& true_scores,
               const std::vector<std::vector<double>>& est_scores);

// Spearman rank correlation: average ranks for ties, then Pearson on the rank
// vectors. Identical rank vectors give exactly 1, exactly reversed ranks give
// exactly -1. Throws ShapeMismatchError on length mismatch, Error below two
// elements, ConstantVectorError when either input has no variation.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// The per-variable maxNesuf vector of a report, in report order. Throws
// NoValidPairError when any variable ended up without a scored pair.
std::vector<double> score_vector(const ScoreReport& report);

// ---------------------------------------------------------------------------
// PC extension selection

struct ExtensionSelection {
    ScoreReport max_report;  // extension whose ranking best matches the truth
    ScoreReport min_report;  // and the one that matches it worst
    int max_index = 0;
    int min_index = 0;
    // Ranking agreement of the chosen extensions; empty when every extension
    // produced a rank-degenerate (constant) score vector.
    std::optional<double> max_spr;
    std::optional<double> min_spr;
};

// Scores every DAG extension and picks the reports attaining the largest and
// smallest rank correlation against true_scores. Extensions whose score
// vector is constant cannot be ranked and are passed over unless every
// extension is; ties resolve to the earliest extension. Throws
// NoExtensionError when extensions is empty.
ExtensionSelection select_extension_minmax(const Scorer& scorer,
                                           const std::vector<Dag>& extensions,
                                           int target,
                                           const std::vector<double>& true_scores);
ExtensionSelection select_extension_minmax(const std::vector<Dag>& extensions,
                                           const DiscretizedDataset& data,
                                           const std::vector<int>& labels,
                                           const std::vector<double>& true_scores,
                                           const Classifier* model = nullptr,
                                           int target = -1);

// ---------------------------------------------------------------------------
// Names and parsers shared by the experiment config and the command line.
// Parsers throw SchemaMismatchError on unrecognized text.
const char* form_name(MechanismKind form);
const char* noise_name(NoiseFamily noise);
MechanismKind parse_form(const std::string& text);
NoiseFamily parse_noise(const std::string& text);
DiscoveryMethod parse_method(const std::string& text);
PriorMode parse_mode(const std::string& text);

// ---------------------------------------------------------------------------
// Trial orchestration over the eight-variable benchmark

struct ExperimentCell {
    DiscoveryMethod method = DiscoveryMethod::pc;
    PriorMode mode = PriorMode::mode0;
};

struct ExperimentConfig {
    MechanismKind form = MechanismKind::linear;
    NoiseFamily noise = NoiseFamily::uniform;
    int sample_size = 5000;
    int bins = 10;
    int trials = 20;
    std::uint64_t base_seed = 1;
    ForestConfig forest{};
    DiscoveryConfig discovery{};
    std::vector<ExperimentCell> cells;  // empty = every supported combination
    int jobs = 0;  // 0 = read CFX_JOBS, falling back to 1

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
};

// Every method x mode combination the discovery layer supports, ending with
// the no-graph baseline.
std::vector<ExperimentCell> default_cells();

// One table row produced by one trial. PC cells yield two rows (pc_max and
// pc_min); every trial also carries a "true" row scored with the generating
// graph, whose MAE is zero by definition.
struct TrialResult {
    std::uint64_t seed = 0;
    std::string method;  // "lingam", "pc_max", "pc_min", ..., "nograph", "true"
    PriorMode mode = PriorMode::mode0;
    std::vector<double> true_scores;
    std::vector<double> est_scores;
    double mae = 0.0;                // mean |true - est| over variables
    std::optional<double> spr;       // empty when the estimate cannot be ranked
    std::string error;               // nonempty marks a failed cell

    bool ok() const { return error.empty(); }
};

// Runs one seeded trial end to end: sample the benchmark, discretize,
// binarize the target, fit the classifier, then for every configured cell
// discover a structure and score it against the shared predicted labels.
// A failing cell is recorded in its rows' error field; other cells proceed.
std::vector<TrialResult> run_trial(const ExperimentConfig& config,
                                   std::uint64_t seed);

// All trials, seeded base_seed + index, run on min(jobs, trials) worker
// threads. Row order is deterministic: trial-major, cells in config order.
// A trial whose shared pipeline stage fails contributes error rows for every
// cell instead of aborting the run.
std::vector<TrialResult> run_trials(const ExperimentConfig& config);

// The names run_trial gives its rows for this config, in emission order.
std::vector<std::pair<std::string, PriorMode>> row_labels(
    const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Summaries

struct CellSummary {
    std::string method;
    PriorMode mode = PriorMode::mode0;
    int n_trials = 0;        // rows contributing to the MAE statistics
    int n_spr = 0;           // rows contributing to the SPR mean
    double mae_mean = 0.0;
    double mae_stderr = 0.0;         // sample sd / sqrt(n_trials)
    std::optional<double> spr_mean;  // empty when no row could be ranked
    int rank_degenerate = 0;         // rows excluded from the SPR mean only
    int failed = 0;                  // rows excluded from everything
};

struct MetricsSummary {
    std::vector<CellSummary> cells;  // first-appearance order of the rows

    const CellSummary* find(const std::string& method, PriorMode mode) const;
    // Header method,mode,mae_mean,mae_stderr,spr_mean,n_trials; spr_mean is
    // left blank for cells with no rankable row.
    std::string to_csv() const;
};

MetricsSummary summarize(const std::vector<TrialResult>& trials);

/// Worker count resolution: explicit value if positive, else the CFX_JOBS
// environment variable, else 1.
int resolve_jobs(int requested);

}  // namespace cfx
