#include "hwdyn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "hwdyn/diagnostics.hpp"
#include "hwdyn/error.hpp"

namespace hwdyn::eval {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

void check_label(int v) {
  if (v != 0 && v != 1) throw ConfigError("labels must be 0 or 1");
}

}  // namespace

Confusion& Confusion::operator+=(const Confusion& o) {
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  tp += o.tp;
  return *this;
}

RegressionMetrics r2_rmse(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.empty() || truth.size() != predicted.size()) {
    throw ConfigError("r2_rmse: inputs must be non-empty and of equal length");
  }
  const double n = static_cast<double>(truth.size());
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  RegressionMetrics m;
  m.n = truth.size();
  m.rmse = std::sqrt(ss_res / n);
  if (ss_tot > 0.0) {
    m.r2 = 1.0 - ss_res / ss_tot;
  } else {
    m.r2 = kNaN;
    warn("R^2 undefined: true values have zero variance");
  }
  return m;
}

double rank_auc(std::span<const int> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) throw ConfigError("rank_auc: length mismatch");
  const auto ranks = average_ranks(scores);
  double n_pos = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    check_label(truth[i]);
    if (truth[i] == 1) {
      n_pos += 1.0;
      rank_sum += ranks[i];
    }
  }
  const double n_neg = static_cast<double>(truth.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    warn("AUC undefined: truth has a single class");
    return kNaN;
  }
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

ClassificationMetrics classification_metrics(std::span<const int> truth,
                                             std::span<const int> predicted,
                                             std::span<const double> scores) {
  if (truth.empty() || truth.size() != predicted.size() || truth.size() != scores.size()) {
    throw ConfigError("classification_metrics: inputs must be non-empty and of equal length");
  }
  ClassificationMetrics m;
  m.n = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    check_label(truth[i]);
    check_label(predicted[i]);
    if (truth[i] == 1) {
      (predicted[i] == 1 ? m.confusion.tp : m.confusion.fn)++;
    } else {
      (predicted[i] == 1 ? m.confusion.fp : m.confusion.tn)++;
    }
  }
  const auto& c = m.confusion;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(m.n);
  m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  const std::size_t f1_den = 2 * c.tp + c.fp + c.fn;
  m.f1 = c.tp > 0 ? static_cast<double>(2 * c.tp) / static_cast<double>(f1_den) : 0.0;
  m.auc = rank_auc(truth, scores);
  return m;
}

double majority_baseline(std::span<const int> labels) {
  if (labels.empty()) throw ConfigError("majority_baseline: no labels");
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  std::size_t best = 0;
  for (const auto& [label, n] : counts) best = std::max(best, n);
  return static_cast<double>(best) / static_cast<double>(labels.size());
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("spearman: need two equal-length series");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw ConfigError("quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile: q outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace hwdyn::eval
