#pragma once

// Student-level stratified cross-validation of the three prediction tasks.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hwdyn/feature_table.hpp"
#include "hwdyn/metrics.hpp"
#include "hwdyn/model.hpp"

namespace hwdyn::eval {

enum class Task { grade, gender, performance };
/// The user-facing model choice; the task decides regression or classification.
enum class ModelChoice { linear, logistic, forest };

std::string to_string(Task t);
std::string to_string(ModelChoice m);
Task parse_task(const std::string& s);
ModelChoice parse_model(const std::string& s);

/// A student is a high performer when more than 45% of their drills are perfect.
inline constexpr double kPerformanceThreshold = 0.45;
inline constexpr int kFolds = 5;

bool is_classification(Task t);
/// grade -> ols or forest_regressor; gender/performance -> logistic or
/// forest_classifier. Throws ConfigError for linear on a binary task or
/// logistic on grade.
learn::ModelKind model_kind(Task t, ModelChoice m);
/// The conventional model choices for a task.
std::vector<ModelChoice> models_for(Task t);

/// grade; female = 1; perfect_ratio > 0.45 = 1.
double task_target(const features::StudentInfo& s, Task t);
/// Class used for stratification (the grade itself for the grade task).
int stratum(const features::StudentInfo& s, Task t);

struct FoldPlan {
  std::vector<std::vector<std::string>> folds;  // student ids per fold
  std::vector<int> fold_of;                     // fold of each input row
  std::vector<std::string> warnings;
};

/// Seeded stratified assignment: each stratum is shuffled, strata are laid
/// end to end in label order, and position i goes to fold i mod k. Fold
/// sizes then differ by at most one and every stratum spreads within one
/// student of even. Requires >= 10 students; warns for strata under k.
FoldPlan make_folds(const std::vector<std::string>& ids, const std::vector<int>& strata,
                    std::uint64_t seed, int k = kFolds);
FoldPlan make_folds(const features::FeatureTable& table, Task task, std::uint64_t seed);

struct EvaluationConfig {
  std::uint64_t seed = 0;
  learn::TrainingOptions training;
};

struct FoldResult {
  int fold = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> features;  // columns the fold's model used
  std::optional<learn::SelectionTrace> selection;
  std::optional<RegressionMetrics> regression;
  std::optional<ClassificationMetrics> classification;
};

struct EvaluationReport {
  Task task = Task::grade;
  features::Family family = features::Family::basic;
  ModelChoice model = ModelChoice::linear;
  learn::ModelKind kind = learn::ModelKind::ols;
  std::uint64_t seed = 0;

  // Held-out predictions, one per student in table order.
  std::vector<std::string> student_ids;
  std::vector<int> fold;
  std::vector<double> truth;
  std::vector<double> prediction;  // grade estimate or class-1 probability
  std::vector<int> predicted_label;  // classification only

  std::optional<RegressionMetrics> regression;          // pooled
  std::optional<ClassificationMetrics> classification;  // pooled
  std::vector<FoldResult> folds;
  /// Majority-class accuracy (classification) or RMSE of predicting the
  /// mean grade (regression), over the whole table.
  double baseline = 0.0;
  std::vector<std::string> warnings;
};

/// Trains on four folds and predicts the fifth, for each fold. Linear
/// models are z-scored and selected on the training folds only. Throws
/// NumericError if a test student appears among its fold's training rows.
EvaluationReport run_task(const features::FeatureTable& table, Task task, ModelChoice model,
                          const EvaluationConfig& cfg);

learn::DesignMatrix design_matrix(const features::FeatureTable& table, Task task);

struct GradeSummary {
  int grade = 0;
  std::size_t n = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Distribution of student-mean SNR/C per grade from a siglog table.
/// Grades 1-9 without students are omitted with a warning.
std::vector<GradeSummary> snrc_by_grade(const features::FeatureTable& siglog);

/// Spearman correlation of median SNR/C against grade.
double snrc_trend(const std::vector<GradeSummary>& summary);

}  // namespace hwdyn::eval
