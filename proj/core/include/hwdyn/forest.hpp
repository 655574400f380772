#pragma once

// Bagged CART ensembles for regression and binary classification.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace hwdyn::learn {

enum class ForestMode { regression, classification };

struct ForestConfig {
  int n_trees = 1200;
  int min_leaf = 2;
  int max_depth = 0;           // 0: unbounded
  int features_per_split = 0;  // 0: sqrt(p) for classification, max(1, p/3) for regression
  std::uint64_t seed = 0;

  void validate() const;
  int candidates(ForestMode mode, int n_features) const;
};

/// Flat binary tree. Internal nodes send rows with x[feature] <= threshold
/// left. A classification leaf holds its vote for class 1: 1, 0, or 0.5
/// when the leaf is tied.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int depth() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct Forest {
  ForestMode mode = ForestMode::regression;
  int n_features = 0;
  std::vector<Tree> trees;

  /// Regression: mean of tree outputs. Classification: fraction of trees
  /// voting for class 1.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  friend bool operator==(const Forest&, const Forest&) = default;
};

/// Each tree grows on a bootstrap resample drawn from its own substream of
/// cfg.seed, so the forest does not depend on the thread count. Splits
/// minimize summed squared error (regression) or weighted Gini impurity
/// (classification, labels 0/1) over the candidate features; every leaf
/// keeps at least min_leaf rows.
Forest fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg,
                  ForestMode mode);

}  // namespace hwdyn::learn
