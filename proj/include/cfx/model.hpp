#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfx/data.hpp"

namespace cfx {

// Behavioral contract for the black-box binary classifier the scoring engine
// queries. Implementations must be deterministic once fitted; predictions are
// labels in {0, 1}, one per row.
class Classifier {
  public:
    virtual ~Classifier() = default;

    // Column-major code matrix in the training column order. Codes outside
    // the training range are legal: tree thresholds route them by comparison.
    virtual std::vector<int> predict_codes(
        const std::vector<std::vector<int>>& columns) const = 0;

    // Schema-checked variant: labels must match the training schema exactly.
    virtual std::vector<int> predict(const DiscretizedDataset& features) const = 0;
};

struct ForestConfig {
    int trees = 100;
    int max_depth = 6;
    int features_per_split = 0;  // 0 = ceil(sqrt(#features)), resolved at fit
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;   // -1 marks a leaf
    int threshold = 0;  // go left when code <= threshold
    int left = -1;
    int right = -1;
    int label = 0;      // leaf vote
};

// Bagged CART trees over integer codes: Gini impurity splits with
// rpart-style complexity pruning (a split must cut total risk by 1% of the
// root's), per-split feature subsampling, majority vote with ties broken
// toward 1. All randomness flows from per-tree streams of config.seed, so
// fits are reproducible and row order never matters.
class Forest : public Classifier {
  public:
    std::vector<int> predict_codes(
        const std::vector<std::vector<int>>& columns) const override;
    std::vector<int> predict(const DiscretizedDataset& features) const override;

    const ForestConfig& config() const { return config_; }
    const std::vector<std::string>& feature_labels() const { return feature_labels_; }
    const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }

    std::string to_json() const;
    static Forest from_json(const std::string& text);

    friend Forest fit_forest(const DiscretizedDataset& features,
                             const std::vector<int>& labels, ForestConfig config);

  private:
    ForestConfig config_;
    std::vector<std::string> feature_labels_;
    std::vector<std::vector<TreeNode>> trees_;
};

// Throws SingleClassError when labels are all one class,
// InsufficientSamplesError below two rows, SchemaMismatchError when the label
// vector does not line up with the features or holds values outside {0, 1}.
Forest fit_forest(const DiscretizedDataset& features, const std::vector<int>& labels,
                  ForestConfig config = {});

}  // namespace cfx
