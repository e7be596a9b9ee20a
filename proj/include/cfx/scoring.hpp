#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfx/data.hpp"
#include "cfx/discovery.hpp"
#include "cfx/graph.hpp"
#include "cfx/model.hpp"

namespace cfx {

// One necessity/sufficiency query: explanatory column `variable` with the
// ordered code pair high > low. The positive outcome is label 1 throughout.
struct ScoreQuery {
    int variable = 0;
    int high = 0;
    int low = 0;
};

// Necessity, sufficiency, and combined scores for one code pair. The
// identification formulas can leave [0, 1] when monotonicity fails, so the
// clamped values are reported alongside the raw ones with per-score flags.
struct ScoreTriple {
    double nec = 0.0;
    double suf = 0.0;
    double nesuf = 0.0;
    double raw_nec = 0.0;
    double raw_suf = 0.0;
    double raw_nesuf = 0.0;
    bool nec_clamped = false;
    bool suf_clamped = false;
    bool nesuf_clamped = false;
};

struct PairScores {
    int high = 0;
    int low = 0;
    ScoreTriple scores;
};

struct SkippedPair {
    int variable = 0;
    int high = 0;
    int low = 0;
    std::string reason;
};

// Sparse-cell record for one interventional estimate P(event | do(X=code)).
// `coverage` is the stratum-weight mass kept after skipping empty strata
// (1.0 when the classifier imputed them instead); `imputed` counts the
// classifier-backed fills.
struct AdjustmentDiagnostic {
    int variable = 0;
    int code = 0;
    int strata = 0;
    int empty = 0;
    double coverage = 1.0;
    int imputed = 0;
};

struct VariableScores {
    int variable = 0;
    std::string name;
    std::vector<int> codes;         // distinct observed codes, ascending
    std::vector<PairScores> pairs;  // scored (high, low) pairs
    bool has_max = false;           // false when every pair was skipped
    double max_nesuf = 0.0;         // max clamped nesuf over scored pairs
};

struct ScoreReport {
    std::optional<Dag> graph;  // nullopt = conditional-only scoring
    std::vector<VariableScores> variables;
    std::vector<SkippedPair> skipped;
    std::vector<AdjustmentDiagnostic> adjustments;
    std::vector<int> reverse_causation;  // variables adjusted on the label column

    const VariableScores& variable(int v) const;
    std::string to_json() const;
    // Flat rows: variable,x,x_prime,nec,suf,nesuf,clamped,max_nesuf.
    std::string to_csv() const;
};

// #(rows matching every condition with label `event`) / #(rows matching).
// `conditions` maps column index to code; empty conditions give the marginal
// label frequency. Throws EmptyCellError (naming the condition tuple) when
// no row matches.
double cond_prob(const DiscretizedDataset& data, const std::vector<int>& labels,
                 int event, const std::map<int, int>& conditions);

// P(event | do(variable = code)) by backdoor adjustment over the graph
// parents of `variable`, restricted to the data's columns. graph == nullptr
// (no-graph scoring) or an empty parent set reduce to the plain conditional.
// Empty strata are skipped and the remaining stratum weights renormalized;
// EmptyCellError only when every stratum is empty for the code.
double do_prob(const DiscretizedDataset& data, const std::vector<int>& labels,
               const Dag* graph, int variable, int code, int event);

// Scores one ordered pair from empirical estimates. Throws
// UndefinedScoreError when a denominator's conditioning event has zero
// frequency (code unobserved, P(o|high) = 0, or P(o'|low) = 0).
ScoreTriple scores_for_pair(const ScoreQuery& query, const DiscretizedDataset& data,
                            const std::vector<int>& labels, const Dag* graph);

// Maximum clamped nesuf over all ordered pairs of observed codes; pairs with
// undefined scores are excluded. Throws NoValidPairError when no pair scores.
double max_nesuf(const DiscretizedDataset& data, const std::vector<int>& labels,
                 const Dag* graph, int variable);

// Scoring engine for one (data, labels, classifier) triple. Reports for
// different graphs share the engine's caches: counterfactual predictions
// depend only on the data and the model, so re-scoring every PC extension
// stays cheap. Not safe for concurrent use; give each worker its own engine.
//
// With a classifier, interventional probabilities are estimated by forcing
// the queried column to the queried code on the observed rows and reading
// the model's predictions, which shares the stratum weights of the backdoor
// sum across codes. Columns the graph marks as descendants of the queried
// variable cannot be held fixed that way, so those queries keep the
// empirical cell conditionals, with empty cells imputed from the forced
// predictions. Without a classifier every estimate is empirical and empty
// cells are skipped with renormalized weights.
class Scorer {
  public:
    // `model` may be null (labels-only scoring). Graphs passed later either
    // cover exactly the feature columns (target = -1) or the features plus
    // one outcome node whose index is given as `target`.
    Scorer(const DiscretizedDataset& data, std::vector<int> labels,
           const Classifier* model = nullptr);

    int num_rows() const { return n_; }
    int num_variables() const { return p_; }

    double do_prob(const Dag* graph, int target, int variable, int code, int event,
                   AdjustmentDiagnostic* diag = nullptr) const;
    ScoreTriple pair(const ScoreQuery& query, const Dag* graph, int target) const;
    double max_nesuf(const Dag* graph, int target, int variable) const;

    ScoreReport report(const Dag* graph, int target = -1) const;
    ScoreReport report_no_graph() const;
    // One report per discovered dag; a no-graph output gives one
    // conditional-only report.
    std::vector<ScoreReport> reports(const DiscoveryOutput& graphs, int target) const;

  private:
    struct Strata {
        std::vector<int> of_row;
        std::vector<int> size;
    };
    struct CellTable {
        // per stratum: code -> (rows, rows with label 1)
        std::vector<std::map<int, std::pair<int, int>>> cells;
    };
    struct Adjustment {
        std::vector<int> zcols;  // column ids; p_ stands for the label column
        bool uses_label = false;
    };

    double conditional(int variable, int code, int event) const;
    Adjustment adjustment_columns(const Dag& graph, int target, int variable) const;
    bool descendant_free(const Dag& graph, int target, int variable) const;
    const std::vector<int>& forced(int variable, int code) const;
    double forced_mean(int variable, int code, int event) const;
    const Strata& strata_for(const std::vector<int>& zcols) const;
    const CellTable& cells_for(const std::vector<int>& zcols, int variable) const;
    double cell_sum(const std::vector<int>& zcols, int variable, int code, int event,
                    bool impute, AdjustmentDiagnostic* diag) const;
    void check_graph(const Dag& graph, int target, int variable) const;

    const DiscretizedDataset* data_;
    const Classifier* model_;
    std::vector<int> labels_;
    int n_ = 0;
    int p_ = 0;
    std::vector<std::vector<int>> codes_;  // observed codes per column
    // per column: code -> (rows, rows with label 1)
    std::vector<std::map<int, std::pair<int, int>>> marginals_;
    mutable std::map<std::pair<int, int>, std::vector<int>> forced_;
    mutable std::map<std::vector<int>, Strata> strata_;
    mutable std::map<std::pair<std::vector<int>, int>, CellTable> cell_tables_;
};

// Convenience wrappers constructing a Scorer per call.
ScoreReport explain(const DiscretizedDataset& data, const std::vector<int>& labels,
                    const Dag* graph, const Classifier* model = nullptr, int target = -1);
std::vector<ScoreReport> explain(const DiscretizedDataset& data,
                                 const std::vector<int>& labels,
                                 const DiscoveryOutput& graphs, int target,
                                 const Classifier* model = nullptr);

}  // namespace cfx
