#include <cmath>
#include <limits>

#include "cfx/discovery.hpp"
#include "cfx/errors.hpp"

namespace cfx {

namespace {

constexpr double kGaussianEntropy = 1.4189385332046727;  // (1 + log 2*pi) / 2

double entropy_of(const std::vector<double>& standardized) {
    return kGaussianEntropy - neg_entropy_approx(standardized);
}

// Residual of b on a, both standardized, restandardized to unit variance.
// Throws RankDeficientError when the pair is (numerically) collinear.
std::vector<double> pair_residual(const std::vector<double>& b,
                                  const std::vector<double>& a, double rho) {
    double denom = 1.0 - rho * rho;
    if (denom < 1e-12)
        throw RankDeficientError("direct_lingam: collinear column pair");
    double scale = 1.0 / std::sqrt(denom);
    std::vector<double> out(b.size());
    for (std::size_t r = 0; r < b.size(); ++r) out[r] = (b[r] - rho * a[r]) * scale;
    return out;
}

double correlation_of(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) s += a[r] * b[r];
    return s / static_cast<double>(a.size());
}

}  // namespace

Dag direct_lingam(const Dataset& data, const BackgroundKnowledge& bk,
                  double prune_threshold) {
    int p = data.num_cols();
    if (p < 2) throw SchemaMismatchError("direct_lingam: need at least 2 columns");

    std::vector<std::vector<double>> work(p);
    for (int c = 0; c < p; ++c) work[c] = standardize(data.columns[c]);
    std::vector<std::vector<double>> original = work;

    std::vector<int> order;
    order.reserve(p);
    std::vector<char> placed(p, 0);

    for (int step = 0; step < p; ++step) {
        bool exo_left = false, non_sink_left = false;
        for (int v = 0; v < p; ++v) {
            if (placed[v]) continue;
            if (bk.is_exogenous(v)) exo_left = true;
            if (!bk.is_sink(v)) non_sink_left = true;
        }
        std::vector<int> candidates, others;
        for (int v = 0; v < p; ++v) {
            if (placed[v]) continue;
            others.push_back(v);
            if (exo_left && !bk.is_exogenous(v)) continue;
            if (!exo_left && non_sink_left && bk.is_sink(v)) continue;
            candidates.push_back(v);
        }

        int root = candidates[0];
        if (candidates.size() > 1) {
            std::vector<double> entropy(p, 0.0);
            for (int v : others) entropy[v] = entropy_of(work[v]);
            double best = std::numeric_limits<double>::infinity();
            for (int i : candidates) {
                double total = 0.0;
                for (int j : others) {
                    if (j == i) continue;
                    double rho = correlation_of(work[i], work[j]);
                    // Entropy gap between the two pairwise direction models;
                    // nonnegative for every j exactly when i is upstream.
                    double diff = entropy[j] + entropy_of(pair_residual(work[i], work[j], rho)) -
                                  entropy[i] - entropy_of(pair_residual(work[j], work[i], rho));
                    double v = std::min(0.0, diff);
                    total += v * v;
                }
                if (total < best) {
                    best = total;
                    root = i;
                }
            }
        }

        order.push_back(root);
        placed[root] = 1;
        for (int j = 0; j < p; ++j) {
            if (placed[j]) continue;
            double rho = correlation_of(work[j], work[root]);
            work[j] = pair_residual(work[j], work[root], rho);
        }
    }

    // Edges by least squares of each variable on its order predecessors,
    // kept when the standardized coefficient clears the threshold.
    Dag dag(data.labels);
    for (int k = 1; k < p; ++k) {
        int v = order[k];
        std::vector<std::vector<double>> predictors;
        predictors.reserve(k);
        for (int q = 0; q < k; ++q) predictors.push_back(original[order[q]]);
        auto fit = ols_fit(original[v], predictors);
        for (int q = 0; q < k; ++q)
            if (std::abs(fit.coefs[q]) >= prune_threshold) dag.add_edge(order[q], v);
    }
    return dag;
}

}  // namespace cfx
