#include <algorithm>
#include <limits>

#include "cfx/discovery.hpp"
#include "cfx/errors.hpp"

namespace cfx {

namespace {

std::vector<std::vector<double>> collect(const Dataset& data,
                                         const std::vector<int>& which) {
    std::vector<std::vector<double>> cols;
    cols.reserve(which.size());
    for (int c : which) cols.push_back(data.columns[c]);
    return cols;
}

}  // namespace

Dag resit(const Dataset& data, const BackgroundKnowledge& bk, const ResitConfig& cfg,
          int* hsic_tests) {
    int tests = 0;
    int p = data.num_cols();
    if (p < 1) throw SchemaMismatchError("resit: no columns");
    Dag dag(data.labels);
    if (p == 1) {
        if (hsic_tests) *hsic_tests = 0;
        return dag;
    }

    std::vector<int> active(p);
    for (int v = 0; v < p; ++v) active[v] = v;
    std::vector<std::vector<int>> candidate_parents(p);
    std::vector<int> peel_order;  // sinks first

    while (active.size() > 1) {
        std::vector<int> pool;
        for (int v : active)
            if (bk.is_sink(v)) pool.push_back(v);
        if (pool.empty()) pool = active;

        int chosen = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int k : pool) {
            std::vector<int> rest;
            for (int v : active)
                if (v != k) rest.push_back(v);
            auto predictors = collect(data, rest);
            auto fit = tree_regress(data.columns[k], predictors, cfg.tree_depth,
                                    cfg.tree_min_leaf);
            auto test = hsic_statistic({fit.residuals}, predictors, cfg.hsic_alpha);
            ++tests;
            if (test.statistic < best) {
                best = test.statistic;
                chosen = k;
            }
        }

        for (int v : active)
            if (v != chosen) candidate_parents[chosen].push_back(v);
        peel_order.push_back(chosen);
        active.erase(std::find(active.begin(), active.end(), chosen));
    }

    // Pruning pass: a candidate parent is dropped when the regression without
    // it still leaves the residual independent of every order predecessor.
    for (int k : peel_order) {
        const std::vector<int> preceding = candidate_parents[k];
        if (preceding.empty()) continue;
        auto preceding_cols = collect(data, preceding);
        std::vector<int> kept = preceding;
        for (int l : preceding) {
            std::vector<int> without;
            for (int v : kept)
                if (v != l) without.push_back(v);
            if (without.size() == kept.size()) continue;  // already dropped
            auto fit = tree_regress(data.columns[k], collect(data, without),
                                    cfg.tree_depth, cfg.tree_min_leaf);
            auto test =
                hsic_statistic({fit.residuals}, preceding_cols, cfg.hsic_alpha);
            ++tests;
            if (test.independent()) kept = without;
        }
        for (int parent : kept) dag.add_edge(parent, k);
    }
    if (hsic_tests) *hsic_tests = tests;
    return dag;
}

}  // namespace cfx
