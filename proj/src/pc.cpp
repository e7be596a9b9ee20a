#include <algorithm>
#include <functional>
#include <set>

#include "cfx/discovery.hpp"
#include "cfx/errors.hpp"

namespace cfx {

namespace {

// Visits every size-k subset of pool in lexicographic order until the
// callback returns true; reports whether it did.
bool for_each_subset(const std::vector<int>& pool, int k,
                     const std::function<bool(const std::vector<int>&)>& fn) {
    int m = static_cast<int>(pool.size());
    if (k > m) return false;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    std::vector<int> subset(k);
    while (true) {
        for (int i = 0; i < k; ++i) subset[i] = pool[idx[i]];
        if (fn(subset)) return true;
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

bool pair_required(const BackgroundKnowledge& bk, int i, int j) {
    for (auto [a, b] : bk.required)
        if ((a == i && b == j) || (a == j && b == i)) return true;
    return false;
}

}  // namespace

PcResult pc(const Dataset& data, const CiTestConfig& cfg, const BackgroundKnowledge& bk) {
    int p = data.num_cols();
    int n = data.num_rows();
    if (p < 2) throw SchemaMismatchError("pc: need at least 2 columns");
    if (n <= p + 3)
        throw InsufficientSamplesError("pc: need more rows than columns + 3");

    Eigen::MatrixXd corr = correlation_matrix(data.columns);

    std::vector<std::set<int>> adj(p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            // A pair forbidden in both directions cannot carry an edge at all.
            if (bk.direction_forbidden(i, j) && bk.direction_forbidden(j, i)) continue;
            adj[i].insert(j);
            adj[j].insert(i);
        }

    PcResult result{Pdag(data.labels), {}, {}, 0};

    for (int level = 0;; ++level) {
        bool possible = false;
        for (int i = 0; i < p; ++i)
            if (!adj[i].empty() && static_cast<int>(adj[i].size()) - 1 >= level)
                possible = true;
        if (!possible || level > p - 2) break;

        // PC-stable: conditioning pools frozen at the level start, so removals
        // inside a level cannot influence which tests the level runs.
        std::vector<std::set<int>> frozen = adj;
        for (int i = 0; i < p; ++i) {
            std::vector<int> neighbors(frozen[i].begin(), frozen[i].end());
            for (int j : neighbors) {
                if (!adj[i].count(j)) continue;  // removed earlier this level
                if (pair_required(bk, i, j)) continue;
                std::vector<int> pool;
                for (int u : frozen[i])
                    if (u != j) pool.push_back(u);
                if (static_cast<int>(pool.size()) < level) continue;
                for_each_subset(pool, level, [&](const std::vector<int>& s) {
                    ++result.ci_tests;
                    double r = partial_correlation(corr, i, j, s);
                    if (!fisher_z_independent(r, n, level, cfg)) return false;
                    adj[i].erase(j);
                    adj[j].erase(i);
                    result.sepsets.set(i, j, s);
                    return true;
                });
            }
        }
    }

    Pdag skeleton(data.labels);
    for (int i = 0; i < p; ++i)
        for (int j : adj[i])
            if (i < j) skeleton.add_undirected(i, j);

    auto oriented = orient_v_structures(skeleton, result.sepsets, bk);
    result.conflicts = std::move(oriented.conflicts);
    result.pdag = std::move(oriented.pdag);
    apply_meek_rules(result.pdag, bk);
    return result;
}

}  // namespace cfx
