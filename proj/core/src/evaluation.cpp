#include "hwdyn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "hwdyn/diagnostics.hpp"
#include "hwdyn/error.hpp"
#include "hwdyn/synth.hpp"

namespace hwdyn::eval {
namespace {

void record(std::vector<std::string>& sink, const std::string& msg) {
  sink.push_back(msg);
  warn(msg);
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::grade: return "grade";
    case Task::gender: return "gender";
    case Task::performance: return "performance";
  }
  return "grade";
}

std::string to_string(ModelChoice m) {
  switch (m) {
    case ModelChoice::linear: return "linear";
    case ModelChoice::logistic: return "logistic";
    case ModelChoice::forest: return "forest";
  }
  return "linear";
}

Task parse_task(const std::string& s) {
  for (Task t : {Task::grade, Task::gender, Task::performance}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown task '" + s + "' (expected grade, gender or performance)");
}

ModelChoice parse_model(const std::string& s) {
  for (ModelChoice m : {ModelChoice::linear, ModelChoice::logistic, ModelChoice::forest}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown model '" + s + "' (expected linear, logistic or forest)");
}

bool is_classification(Task t) { return t != Task::grade; }

learn::ModelKind model_kind(Task t, ModelChoice m) {
  if (m == ModelChoice::forest) {
    return is_classification(t) ? learn::ModelKind::forest_classifier
                                : learn::ModelKind::forest_regressor;
  }
  if (is_classification(t)) {
    if (m == ModelChoice::linear) {
      throw ConfigError("task '" + to_string(t) + "' is binary: use --model logistic or forest");
    }
    return learn::ModelKind::logistic;
  }
  if (m == ModelChoice::logistic) {
    throw ConfigError("task 'grade' is a regression: use --model linear or forest");
  }
  return learn::ModelKind::ols;
}

std::vector<ModelChoice> models_for(Task t) {
  if (is_classification(t)) return {ModelChoice::logistic, ModelChoice::forest};
  return {ModelChoice::linear, ModelChoice::forest};
}

double task_target(const features::StudentInfo& s, Task t) {
  switch (t) {
    case Task::grade: return s.grade;
    case Task::gender: return s.gender == ink::Gender::female ? 1.0 : 0.0;
    case Task::performance: return s.perfect_ratio > kPerformanceThreshold ? 1.0 : 0.0;
  }
  return 0.0;
}

int stratum(const features::StudentInfo& s, Task t) {
  return static_cast<int>(task_target(s, t));
}

FoldPlan make_folds(const std::vector<std::string>& ids, const std::vector<int>& strata,
                    std::uint64_t seed, int k) {
  if (ids.size() != strata.size()) throw ConfigError("make_folds: ids and labels differ in length");
  if (k < 2) throw ConfigError("make_folds: need at least two folds");
  if (ids.size() < 10) throw DataError("make_folds: need at least 10 students");
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
    throw DataError("make_folds: duplicate student ids");
  }
  FoldPlan plan;
  std::map<int, std::vector<std::size_t>> by_stratum;
  for (std::size_t i = 0; i < ids.size(); ++i) by_stratum[strata[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order;
  for (auto& [label, rows] : by_stratum) {
    if (static_cast<int>(rows.size()) < k) {
      record(plan.warnings, "stratum " + std::to_string(label) + " has " +
                                std::to_string(rows.size()) + " members (< " + std::to_string(k) +
                                "); stratification is best effort");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    order.insert(order.end(), rows.begin(), rows.end());
  }
  plan.folds.resize(static_cast<std::size_t>(k));
  plan.fold_of.assign(ids.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int f = static_cast<int>(pos % static_cast<std::size_t>(k));
    plan.fold_of[order[pos]] = f;
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    plan.folds[static_cast<std::size_t>(plan.fold_of[i])].push_back(ids[i]);
  }
  return plan;
}

FoldPlan make_folds(const features::FeatureTable& table, Task task, std::uint64_t seed) {
  std::vector<std::string> ids;
  std::vector<int> strata;
  for (const auto& s : table.students) {
    ids.push_back(s.student_id);
    strata.push_back(stratum(s, task));
  }
  return make_folds(ids, strata, seed);
}

learn::DesignMatrix design_matrix(const features::FeatureTable& table, Task task) {
  learn::DesignMatrix m;
  m.names = table.names;
  const auto n = static_cast<Eigen::Index>(table.n_rows());
  m.X.resize(n, static_cast<Eigen::Index>(table.n_cols()));
  m.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    if (row.size() != table.n_cols()) throw DataError("feature table: ragged row");
    for (Eigen::Index j = 0; j < m.X.cols(); ++j) m.X(i, j) = row[static_cast<std::size_t>(j)];
    m.y(i) = task_target(table.students[static_cast<std::size_t>(i)], task);
  }
  m.validate();
  return m;
}

EvaluationReport run_task(const features::FeatureTable& table, Task task, ModelChoice model,
                          const EvaluationConfig& cfg) {
  EvaluationReport rep;
  rep.task = task;
  rep.family = table.family;
  rep.model = model;
  rep.kind = model_kind(task, model);
  rep.seed = cfg.seed;

  const learn::DesignMatrix all = design_matrix(table, task);
  const FoldPlan plan = make_folds(table, task, cfg.seed);
  for (const auto& w : plan.warnings) rep.warnings.push_back(w);

  const std::size_t n = table.n_rows();
  rep.fold = plan.fold_of;
  rep.truth.resize(n);
  rep.prediction.resize(n);
  if (is_classification(task)) rep.predicted_label.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.student_ids.push_back(table.students[i].student_id);
    rep.truth[i] = all.y(static_cast<Eigen::Index>(i));
  }

  for (int f = 0; f < kFolds; ++f) {
    FoldResult fr;
    fr.fold = f;
    std::vector<Eigen::Index> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) {
      (plan.fold_of[i] == f ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(i));
      (plan.fold_of[i] == f ? fr.test_ids : fr.train_ids).push_back(rep.student_ids[i]);
    }
    const std::set<std::string> train_set(fr.train_ids.begin(), fr.train_ids.end());
    for (const auto& id : fr.test_ids) {
      if (train_set.count(id)) {
        throw NumericError("fold " + std::to_string(f) + ": student '" + id +
                           "' is in both the training and test rows");
      }
    }
    learn::TrainingOptions opts = cfg.training;
    opts.forest.seed = synth::substream(cfg.seed, 0x466f6c64ULL + static_cast<std::uint64_t>(f));
    learn::TrainedModel trained;
    try {
      trained = learn::train(all.with_rows(train_rows), rep.kind, opts);
    } catch (const Error& e) {
      throw NumericError("fold " + std::to_string(f) + ": " + e.what());
    }
    fr.features = trained.features;
    fr.selection = trained.selection;
    const learn::DesignMatrix test = all.with_rows(test_rows);
    const Eigen::VectorXd pred = trained.predict(test);

    std::vector<double> t(test_rows.size()), p(test_rows.size());
    std::vector<int> tl(test_rows.size()), pl(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      const auto row = static_cast<std::size_t>(test_rows[i]);
      rep.prediction[row] = pred(static_cast<Eigen::Index>(i));
      t[i] = rep.truth[row];
      p[i] = rep.prediction[row];
      if (is_classification(task)) {
        rep.predicted_label[row] = p[i] > 0.5 ? 1 : 0;
        tl[i] = static_cast<int>(t[i]);
        pl[i] = rep.predicted_label[row];
      }
    }
    if (is_classification(task)) {
      fr.classification = classification_metrics(tl, pl, p);
    } else {
      fr.regression = r2_rmse(t, p);
    }
    rep.folds.push_back(std::move(fr));
  }

  if (is_classification(task)) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(rep.truth[i]);
    rep.classification = classification_metrics(labels, rep.predicted_label, rep.prediction);
    rep.baseline = majority_baseline(labels);
  } else {
    rep.regression = r2_rmse(rep.truth, rep.prediction);
    const double mean = std::accumulate(rep.truth.begin(), rep.truth.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : rep.truth) ss += (v - mean) * (v - mean);
    rep.baseline = std::sqrt(ss / static_cast<double>(n));
  }
  return rep;
}

std::vector<GradeSummary> snrc_by_grade(const features::FeatureTable& siglog) {
  if (siglog.family != features::Family::siglog) {
    throw ConfigError("snrc_by_grade needs siglog features");
  }
  const auto values = siglog.column("SNR_per_C_mean");
  std::map<int, std::vector<double>> by_grade;
  for (std::size_t i = 0; i < values.size(); ++i) by_grade[siglog.students[i].grade].push_back(values[i]);
  std::vector<GradeSummary> out;
  for (int g = 1; g <= 9; ++g) {
    const auto it = by_grade.find(g);
    if (it == by_grade.end()) {
      warn("snrc_by_grade: no students in grade " + std::to_string(g));
      continue;
    }
    const auto& v = it->second;
    out.push_back({g, v.size(), quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5),
                   quantile(v, 0.75), quantile(v, 1.0)});
  }
  for (const auto& [g, v] : by_grade) {
    if (g < 1 || g > 9) warn("snrc_by_grade: ignoring grade " + std::to_string(g));
  }
  return out;
}

double snrc_trend(const std::vector<GradeSummary>& summary) {
  std::vector<double> g, m;
  for (const auto& s : summary) {
    g.push_back(s.grade);
    m.push_back(s.median);
  }
  return spearman(g, m);
}

}  // namespace hwdyn::eval
