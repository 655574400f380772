#pragma once

// Trained predictors with their feature lists, scaling and selection audit.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hwdyn/forest.hpp"
#include "hwdyn/linear.hpp"
#include "hwdyn/selection.hpp"

namespace hwdyn::learn {

enum class ModelKind { ols, logistic, forest_regressor, forest_classifier };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);
bool is_classifier(ModelKind k);

struct TrainingOptions {
  bool standardize = true;  // linear and logistic only
  bool select = true;       // VIF + AIC selection, linear and logistic only
  ForestConfig forest;
};

struct TrainedModel {
  ModelKind kind = ModelKind::ols;
  std::vector<std::string> features;  // columns the model reads, in order
  std::optional<Standardizer> scaler;
  LinearFit linear;
  std::optional<Forest> forest;
  std::optional<SelectionTrace> selection;

  /// Real-valued prediction (ols, forest_regressor) or class-1 probability
  /// (logistic, forest_classifier). Columns are looked up by name.
  Eigen::VectorXd predict(const DesignMatrix& m) const;
  /// Hard 0/1 labels of a classifier: probability > 0.5.
  std::vector<int> predict_labels(const DesignMatrix& m) const;
};

/// Fits `kind` on `train`. For ols and logistic the columns are z-scored on
/// `train`, then selected, then fitted; forests use every raw column.
TrainedModel train(const DesignMatrix& train, ModelKind kind, const TrainingOptions& opts = {});

/// Structured JSON dump; read_model(write_model(m)) predicts identically.
void write_model(const TrainedModel& model, std::ostream& out);
void write_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel read_model(std::istream& in);
TrainedModel read_model(const std::filesystem::path& path);

}  // namespace hwdyn::learn
