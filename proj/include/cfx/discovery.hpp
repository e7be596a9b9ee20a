#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cfx/data.hpp"
#include "cfx/graph.hpp"
#include "cfx/stats.hpp"

namespace cfx {

// Prior knowledge about the target supplied to discovery:
//   mode0   no prior, discover over all columns
//   modeA   every explanatory variable is a direct parent of the target
//   modeB   the target is a sink
//   noGraph sentinel: no structure; scoring falls back to plain conditionals
enum class PriorMode { mode0, modeA, modeB, noGraph };

enum class DiscoveryMethod { pc, lingam, resit, notears };

const char* method_name(DiscoveryMethod m);
const char* mode_name(PriorMode m);

// PC over continuous columns with Fisher-z conditional-independence tests:
// PC-stable skeleton, separating sets, v-structures, Meek closure.
struct PcResult {
    Pdag pdag;
    SepsetTable sepsets;
    std::vector<OrientationConflict> conflicts;
    int ci_tests = 0;
};
PcResult pc(const Dataset& data, const CiTestConfig& cfg = {},
            const BackgroundKnowledge& bk = {});

// Causal order by repeated root extraction (the candidate whose pairwise
// regression residuals look most independent, measured through the
// negentropy-based entropy approximation), then least-squares edges over
// order predecessors on standardized data, pruned at |coef| < threshold.
// bk.exogenous nodes are placed first in the order, bk.sinks last.
Dag direct_lingam(const Dataset& data, const BackgroundKnowledge& bk = {},
                  double prune_threshold = 0.05);

struct ResitConfig {
    int tree_depth = 6;
    int tree_min_leaf = 5;
    double hsic_alpha = 0.05;
};

// Additive-noise discovery: repeatedly peel off the variable whose
// tree-regression residual has the smallest HSIC statistic against the
// remaining columns, then prune candidate parents whose removal keeps the
// residual independent of all order predecessors. bk.sinks are peeled first.
// hsic_tests, when given, receives the number of independence tests run.
Dag resit(const Dataset& data, const BackgroundKnowledge& bk = {},
          const ResitConfig& cfg = {}, int* hsic_tests = nullptr);

struct NotearsConfig {
    double lambda = 0.1;           // l1 penalty
    double weight_threshold = 0.3; // edges kept where |w| exceeds this
    double h_tol = 1e-8;           // acyclicity tolerance
    int max_outer = 100;           // augmented-Lagrangian rounds
    double rho_growth = 10.0;
};

struct NotearsResult {
    Dag dag;
    Eigen::MatrixXd weights;  // final unthresholded W
    int outer_iterations = 0;
    double final_h = 0.0;
    bool converged = true;  // h reached tolerance before the outer cap
};

// Continuous structure search: minimize (1/2n)||X - XW||^2 + lambda*||W||_1
// subject to tr(exp(W o W)) = d, by augmented Lagrangian with a projected
// quasi-Newton inner solver on the (w+, w-) split. The thresholded result is
// made acyclic by dropping the weakest edge on any remaining cycle. A run
// that exhausts max_outer with h above tolerance returns converged = false.
NotearsResult notears_linear(const Dataset& data, const NotearsConfig& cfg = {},
                             const BackgroundKnowledge& bk = {});

// tr(exp(W o W)) - d and its gradient (exp(W o W))^T o 2W.
double notears_h(const Eigen::MatrixXd& w);
Eigen::MatrixXd notears_h_gradient(const Eigen::MatrixXd& w);

struct DiscoveryConfig {
    CiTestConfig ci{};
    double lingam_prune_threshold = 0.05;
    ResitConfig resit{};
    NotearsConfig notears{};
    std::size_t extension_cap = 10000;
};

struct DiscoveryDiagnostics {
    int ci_tests = 0;          // PC
    int hsic_tests = 0;        // RESIT
    int outer_iterations = 0;  // NOTEARS
    double final_h = 0.0;      // NOTEARS
    bool converged = true;     // NOTEARS
};

// Unified discovery result. Single-DAG methods fill dags with one entry; PC
// fills pdag and enumerates every DAG extension into dags. noGraph carries no
// structure at all.
struct DiscoveryOutput {
    DiscoveryMethod method = DiscoveryMethod::pc;
    PriorMode mode = PriorMode::mode0;
    bool no_graph = false;
    std::vector<Dag> dags;
    std::optional<Pdag> pdag;
    bool extensions_capped = false;
    std::vector<OrientationConflict> conflicts;
    DiscoveryDiagnostics diagnostics;
};

// Runs the method under the prior mode. modeA drops the target column,
// discovers among the explanatory variables, then attaches Xi -> target for
// every Xi. modeB constrains the target to be a sink, which RESIT and
// NOTEARS cannot honor: UnsupportedModeError. Every returned Dag is verified
// acyclic and mode-consistent.
DiscoveryOutput discover_with_prior(DiscoveryMethod method, PriorMode mode,
                                    const Dataset& data, int target,
                                    const DiscoveryConfig& config = {});

}  // namespace cfx
