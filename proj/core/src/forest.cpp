#include "hwdyn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hwdyn/error.hpp"
#include "hwdyn/parallel.hpp"
#include "hwdyn/synth.hpp"

namespace hwdyn::learn {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
  std::size_t n_left = 0;
};

class Grower {
 public:
  Grower(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg,
         ForestMode mode, std::uint64_t seed)
      : X_(X), y_(y), cfg_(cfg), mode_(mode), rng_(seed) {
    features_.resize(static_cast<std::size_t>(X.cols()));
    std::iota(features_.begin(), features_.end(), 0);
    n_candidates_ = cfg.candidates(mode, static_cast<int>(X.cols()));
  }

  Tree grow() {
    const auto n = static_cast<std::size_t>(X_.rows());
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng_);
    build(rows, 0);
    return std::move(tree_);
  }

 private:
  double leaf_value(const std::vector<std::size_t>& rows) const {
    double sum = 0.0;
    for (auto r : rows) sum += y_(static_cast<Eigen::Index>(r));
    const double mean = sum / static_cast<double>(rows.size());
    if (mode_ == ForestMode::regression) return mean;
    return mean > 0.5 ? 1.0 : (mean < 0.5 ? 0.0 : 0.5);
  }

  bool pure(const std::vector<std::size_t>& rows) const {
    const double first = y_(static_cast<Eigen::Index>(rows.front()));
    return std::all_of(rows.begin(), rows.end(),
                       [&](std::size_t r) { return y_(static_cast<Eigen::Index>(r)) == first; });
  }

  // Impurity of a side, scaled by its size so sides add up.
  double impurity(double n, double sum, double sum_sq) const {
    if (mode_ == ForestMode::regression) return sum_sq - sum * sum / n;
    const double p = sum / n;
    return n * 2.0 * p * (1.0 - p);
  }

  Split best_split(std::vector<std::size_t>& rows) {
    const std::size_t n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_leaf);
    double total = 0.0, total_sq = 0.0;
    for (auto r : rows) {
      const double v = y_(static_cast<Eigen::Index>(r));
      total += v;
      total_sq += v * v;
    }
    const double parent = impurity(static_cast<double>(n), total, total_sq);

    // Partial Fisher-Yates draw of the candidate features.
    for (int k = 0; k < n_candidates_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k),
                                                      features_.size() - 1);
      std::swap(features_[static_cast<std::size_t>(k)], features_[pick(rng_)]);
    }

    Split best;
    best.score = parent;
    std::vector<std::pair<double, double>> sorted(n);
    for (int k = 0; k < n_candidates_; ++k) {
      const int f = features_[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        sorted[i] = {X_(r, f), y_(r)};
      }
      std::sort(sorted.begin(), sorted.end());
      double left = 0.0, left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left += sorted[i].second;
        left_sq += sorted[i].second * sorted[i].second;
        const std::size_t nl = i + 1;
        if (nl < min_leaf || n - nl < min_leaf) continue;
        if (!(sorted[i].first < sorted[i + 1].first)) continue;
        const double score = impurity(static_cast<double>(nl), left, left_sq) +
                             impurity(static_cast<double>(n - nl), total - left, total_sq - left_sq);
        if (score < best.score) {
          best.feature = f;
          best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
          // Midpoints can round onto the upper value; keep the partition exact.
          if (!(best.threshold < sorted[i + 1].first)) best.threshold = sorted[i].first;
          best.score = score;
          best.n_left = nl;
        }
      }
    }
    return best;
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const bool depth_limited = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
    if (depth_limited || rows.size() < 2 * static_cast<std::size_t>(cfg_.min_leaf) || pure(rows)) {
      tree_.nodes[static_cast<std::size_t>(index)].value = leaf_value(rows);
      return index;
    }
    const Split s = best_split(rows);
    if (s.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(index)].value = leaf_value(rows);
      return index;
    }
    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (X_(static_cast<Eigen::Index>(r), s.feature) <= s.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  const ForestConfig& cfg_;
  ForestMode mode_;
  std::mt19937_64 rng_;
  std::vector<int> features_;
  int n_candidates_ = 1;
  Tree tree_;
};

}  // namespace

void ForestConfig::validate() const {
  if (n_trees < 1) throw ConfigError("n-trees must be >= 1");
  if (min_leaf < 1) throw ConfigError("min-leaf must be >= 1");
  if (max_depth < 0) throw ConfigError("max-depth must be >= 0");
  if (features_per_split < 0) throw ConfigError("features-per-split must be >= 0");
}

int ForestConfig::candidates(ForestMode mode, int n_features) const {
  int k = features_per_split;
  if (k == 0) {
    k = mode == ForestMode::classification
            ? static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features))))
            : n_features / 3;
  }
  return std::clamp(k, 1, std::max(1, n_features));
}

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int i = 0;
  for (;;) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    if (node.feature < 0) return node.value;
    i = row(node.feature) <= node.threshold ? node.left : node.right;
  }
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.feature < 0) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    deepest = std::max(deepest, d[i] + 1);
  }
  return deepest;
}

Eigen::VectorXd Forest::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features) throw ConfigError("forest: column count mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(X.row(i));
    out(i) = sum / static_cast<double>(trees.size());
  }
  return out;
}

Forest fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg,
                  ForestMode mode) {
  cfg.validate();
  if (X.rows() != y.size()) throw ConfigError("fit_forest: row count mismatch");
  if (X.cols() < 1) throw ConfigError("fit_forest: no features");
  if (X.rows() < 2 * cfg.min_leaf) throw ConfigError("fit_forest: needs at least 2 * min_leaf rows");
  if (!X.allFinite() || !y.allFinite()) throw DataError("fit_forest: non-finite input");
  if (mode == ForestMode::classification) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) != 0.0 && y(i) != 1.0) throw DataError("fit_forest: labels must be 0 or 1");
    }
  }
  Forest forest;
  forest.mode = mode;
  forest.n_features = static_cast<int>(X.cols());
  forest.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  parallel_for(forest.trees.size(), [&](std::size_t t) {
    Grower g(X, y, cfg, mode, synth::substream(cfg.seed, t));
    forest.trees[t] = g.grow();
  });
  return forest;
}

}  // namespace hwdyn::learn
