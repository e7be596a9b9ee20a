#include "cfx/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfx/errors.hpp"
#include "cfx/rng.hpp"
#include "json.hpp"

namespace cfx {

namespace {

int walk(const std::vector<TreeNode>& tree,
         const std::vector<std::vector<int>>& columns, int row) {
    int at = 0;
    while (tree[at].feature >= 0) {
        const TreeNode& node = tree[at];
        at = columns[node.feature][row] <= node.threshold ? node.left : node.right;
    }
    return tree[at].label;
}

class TreeBuilder {
  public:
    TreeBuilder(const std::vector<const std::vector<int>*>& columns,
                const std::vector<int>& max_code, const std::vector<int>& labels,
                int max_depth, int mtry, Rng& rng)
        : columns_(columns),
          max_code_(max_code),
          labels_(labels),
          max_depth_(max_depth),
          mtry_(mtry),
          rng_(rng) {}

    std::vector<TreeNode> build(std::vector<int> rows) {
        nodes_.clear();
        // Complexity pruning in the rpart tradition: a split must lower the
        // tree's total Gini risk by at least 1% of the root's risk, otherwise
        // features carrying no signal get split on in-bag noise and the
        // ensemble memorizes spurious cell majorities.
        int n = static_cast<int>(rows.size());
        int ones = 0;
        for (int r : rows) ones += labels_[r];
        int zeros = n - ones;
        double root_fit =
            (static_cast<double>(zeros) * zeros + static_cast<double>(ones) * ones) / n;
        min_gain_ = std::max(1e-9, 0.01 * (n - root_fit));
        grow(rows, 0, n, 0);
        return std::move(nodes_);
    }

  private:
    int leaf(int label) {
        TreeNode node;
        node.label = label;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Grows the subtree over rows[lo, hi) and returns its root index.
    int grow(std::vector<int>& rows, int lo, int hi, int depth) {
        int n = hi - lo;
        int ones = 0;
        for (int i = lo; i < hi; ++i) ones += labels_[rows[i]];
        int zeros = n - ones;
        int majority = 2 * ones >= n ? 1 : 0;
        if (depth >= max_depth_ || zeros == 0 || ones == 0 || n < 2)
            return leaf(majority);

        // Sample mtry features without replacement, then keep the first
        // strict improvement encountered; scan order fixes all ties.
        int p = static_cast<int>(columns_.size());
        scratch_.resize(p);
        std::iota(scratch_.begin(), scratch_.end(), 0);
        for (int i = 0; i < mtry_; ++i) {
            int j = i + static_cast<int>(rng_.below(static_cast<std::uint64_t>(p - i)));
            std::swap(scratch_[i], scratch_[j]);
        }

        // Minimizing weighted child Gini is the same as maximizing
        // sum_children (c0^2 + c1^2) / size, so track that score directly;
        // in these count units the complexity threshold adds on linearly.
        double base =
            (static_cast<double>(zeros) * zeros + static_cast<double>(ones) * ones) / n;
        double best = base + min_gain_;
        int best_feature = -1, best_threshold = 0;
        for (int s = 0; s < mtry_; ++s) {
            int f = scratch_[s];
            int codes = max_code_[f] + 1;
            hist0_.assign(codes, 0);
            hist1_.assign(codes, 0);
            const auto& col = *columns_[f];
            for (int i = lo; i < hi; ++i) {
                int v = col[rows[i]];
                if (labels_[rows[i]])
                    ++hist1_[v];
                else
                    ++hist0_[v];
            }
            int l0 = 0, l1 = 0;
            for (int t = 0; t + 1 < codes; ++t) {
                l0 += hist0_[t];
                l1 += hist1_[t];
                int nl = l0 + l1, nr = n - nl;
                if (nl == 0 || nr == 0) continue;
                int r0 = zeros - l0, r1 = ones - l1;
                double score =
                    (static_cast<double>(l0) * l0 + static_cast<double>(l1) * l1) / nl +
                    (static_cast<double>(r0) * r0 + static_cast<double>(r1) * r1) / nr;
                if (score > best) {
                    best = score;
                    best_feature = f;
                    best_threshold = t;
                }
            }
        }
        if (best_feature < 0) return leaf(majority);

        const auto& col = *columns_[best_feature];
        int threshold = best_threshold;
        auto mid_it = std::stable_partition(
            rows.begin() + lo, rows.begin() + hi,
            [&](int r) { return col[r] <= threshold; });
        int mid = static_cast<int>(mid_it - rows.begin());

        int at = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_[at].feature = best_feature;
        nodes_[at].threshold = threshold;
        int left = grow(rows, lo, mid, depth + 1);
        int right = grow(rows, mid, hi, depth + 1);
        nodes_[at].left = left;
        nodes_[at].right = right;
        return at;
    }

    const std::vector<const std::vector<int>*>& columns_;
    const std::vector<int>& max_code_;
    const std::vector<int>& labels_;
    int max_depth_, mtry_;
    Rng& rng_;
    double min_gain_ = 1e-9;
    std::vector<TreeNode> nodes_;
    std::vector<int> scratch_, hist0_, hist1_;
};

}  // namespace

Forest fit_forest(const DiscretizedDataset& features, const std::vector<int>& labels,
                  ForestConfig config) {
    int p = features.num_cols();
    int n = features.num_rows();
    if (p < 1) throw SchemaMismatchError("fit_forest: no feature columns");
    if (static_cast<int>(labels.size()) != n)
        throw SchemaMismatchError("fit_forest: label count does not match row count");
    if (n < 2) throw InsufficientSamplesError("fit_forest: need at least 2 rows");
    if (config.trees < 1 || config.max_depth < 1)
        throw Error("fit_forest: trees and max_depth must be at least 1");
    int ones = 0;
    for (int label : labels) {
        if (label != 0 && label != 1)
            throw SchemaMismatchError("fit_forest: labels must be 0 or 1");
        ones += label;
    }
    if (ones == 0 || ones == n)
        throw SingleClassError("fit_forest: both classes must be present");

    if (config.features_per_split == 0)
        config.features_per_split =
            static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
    config.features_per_split = std::clamp(config.features_per_split, 1, p);

    std::vector<const std::vector<int>*> columns(p);
    std::vector<int> max_code(p, 0);
    for (int c = 0; c < p; ++c) {
        columns[c] = &features.codes(c);
        for (int v : *columns[c]) max_code[c] = std::max(max_code[c], v);
    }

    Forest forest;
    forest.config_ = config;
    forest.feature_labels_ = features.labels;
    forest.trees_.reserve(config.trees);
    std::vector<int> rows(n);
    for (int t = 0; t < config.trees; ++t) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
        if (config.bootstrap) {
            for (int& r : rows)
                r = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        TreeBuilder builder(columns, max_code, labels, config.max_depth,
                            config.features_per_split, rng);
        forest.trees_.push_back(builder.build(rows));
    }
    return forest;
}

std::vector<int> Forest::predict_codes(
    const std::vector<std::vector<int>>& columns) const {
    if (columns.size() != feature_labels_.size())
        throw SchemaMismatchError("predict: column count does not match the fit schema");
    std::size_t n = columns.empty() ? 0 : columns[0].size();
    for (const auto& col : columns)
        if (col.size() != n)
            throw SchemaMismatchError("predict: ragged code columns");

    std::vector<int> out(n);
    int total = static_cast<int>(trees_.size());
    for (std::size_t r = 0; r < n; ++r) {
        int votes = 0;
        for (const auto& tree : trees_)
            votes += walk(tree, columns, static_cast<int>(r));
        out[r] = 2 * votes >= total ? 1 : 0;
    }
    return out;
}

std::vector<int> Forest::predict(const DiscretizedDataset& features) const {
    if (features.labels != feature_labels_)
        throw SchemaMismatchError("predict: feature schema does not match the fit schema");
    std::vector<std::vector<int>> columns;
    columns.reserve(features.num_cols());
    for (int c = 0; c < features.num_cols(); ++c) columns.push_back(features.codes(c));
    return predict_codes(columns);
}

std::string Forest::to_json() const {
    nlohmann::json j;
    j["feature_labels"] = feature_labels_;
    j["config"] = {{"trees", config_.trees},
                   {"max_depth", config_.max_depth},
                   {"features_per_split", config_.features_per_split},
                   {"bootstrap", config_.bootstrap},
                   {"seed", config_.seed}};
    auto trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
        auto nodes = nlohmann::json::array();
        for (const auto& node : tree) {
            if (node.feature < 0)
                nodes.push_back({{"label", node.label}});
            else
                nodes.push_back({{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right}});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j.dump(2);
}

Forest Forest::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatchError(std::string("forest json: ") + e.what());
    }
    if (!j.contains("feature_labels") || !j.contains("trees"))
        throw SchemaMismatchError("forest json: missing feature_labels or trees");

    Forest forest;
    forest.feature_labels_ = j["feature_labels"].get<std::vector<std::string>>();
    int p = static_cast<int>(forest.feature_labels_.size());
    if (j.contains("config")) {
        const auto& c = j["config"];
        forest.config_.trees = c.value("trees", 100);
        forest.config_.max_depth = c.value("max_depth", 6);
        forest.config_.features_per_split = c.value("features_per_split", 0);
        forest.config_.bootstrap = c.value("bootstrap", true);
        forest.config_.seed = c.value("seed", std::uint64_t{0});
    }
    for (const auto& tree_json : j["trees"]) {
        std::vector<TreeNode> tree;
        int count = static_cast<int>(tree_json.size());
        if (count == 0) throw SchemaMismatchError("forest json: empty tree");
        for (const auto& node_json : tree_json) {
            TreeNode node;
            if (node_json.contains("label")) {
                node.label = node_json["label"].get<int>();
                if (node.label != 0 && node.label != 1)
                    throw SchemaMismatchError("forest json: leaf label outside {0,1}");
            } else {
                node.feature = node_json.value("feature", -1);
                node.threshold = node_json.value("threshold", 0);
                node.left = node_json.value("left", -1);
                node.right = node_json.value("right", -1);
                if (node.feature < 0 || node.feature >= p)
                    throw SchemaMismatchError("forest json: split feature out of range");
                // Children must sit later in the array; that is how the
                // builder lays trees out, and it rules out cycles.
                int at = static_cast<int>(tree.size());
                if (node.left <= at || node.left >= count || node.right <= at ||
                    node.right >= count)
                    throw SchemaMismatchError("forest json: child index out of range");
            }
            tree.push_back(node);
        }
        forest.trees_.push_back(std::move(tree));
    }
    if (forest.trees_.empty()) throw SchemaMismatchError("forest json: no trees");
    forest.config_.trees = static_cast<int>(forest.trees_.size());
    return forest;
}

}  // namespace cfx
