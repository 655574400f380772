#include "hwdyn/model.hpp"

#include "hwdyn/error.hpp"

namespace hwdyn::learn {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ols: return "ols";
    case ModelKind::logistic: return "logistic";
    case ModelKind::forest_regressor: return "forest_regressor";
    case ModelKind::forest_classifier: return "forest_classifier";
  }
  return "ols";
}

ModelKind parse_model_kind(const std::string& s) {
  for (ModelKind k : {ModelKind::ols, ModelKind::logistic, ModelKind::forest_regressor,
                      ModelKind::forest_classifier}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown model kind '" + s + "'");
}

bool is_classifier(ModelKind k) {
  return k == ModelKind::logistic || k == ModelKind::forest_classifier;
}

Eigen::VectorXd TrainedModel::predict(const DesignMatrix& m) const {
  Eigen::MatrixXd X = m.with_columns(features).X;
  if (forest) return forest->predict(X);
  if (scaler) X = scaler->apply(X);
  Eigen::VectorXd z = linear.decision(X);
  if (kind == ModelKind::logistic) z = z.unaryExpr([](double v) { return sigmoid(v); });
  return z;
}

std::vector<int> TrainedModel::predict_labels(const DesignMatrix& m) const {
  if (!is_classifier(kind)) throw ConfigError("predict_labels: " + to_string(kind) + " is not a classifier");
  const Eigen::VectorXd p = predict(m);
  std::vector<int> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p(i) > 0.5 ? 1 : 0;
  return out;
}

TrainedModel train(const DesignMatrix& data, ModelKind kind, const TrainingOptions& opts) {
  data.validate();
  TrainedModel model;
  model.kind = kind;
  if (kind == ModelKind::forest_regressor || kind == ModelKind::forest_classifier) {
    model.features = data.names;
    model.forest = fit_forest(data.X, data.y, opts.forest,
                              kind == ModelKind::forest_classifier ? ForestMode::classification
                                                                   : ForestMode::regression);
    return model;
  }
  const LinearKind lk = kind == ModelKind::ols ? LinearKind::ols : LinearKind::logistic;
  DesignMatrix work = data;
  if (opts.standardize) {
    model.scaler = Standardizer::fit(data.X);
    work.X = model.scaler->apply(data.X);
  }
  std::vector<std::string> keep = data.names;
  if (opts.select && data.n_cols() >= 3) {
    model.selection = select_features(work, lk);
    keep = model.selection->surviving;
  }
  if (model.scaler && keep.size() != data.names.size()) {
    Standardizer s;
    s.mean.resize(static_cast<Eigen::Index>(keep.size()));
    s.scale.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      const Eigen::Index c = data.column_index(keep[j]);
      s.mean(static_cast<Eigen::Index>(j)) = model.scaler->mean(c);
      s.scale(static_cast<Eigen::Index>(j)) = model.scaler->scale(c);
    }
    model.scaler = s;
  }
  model.features = keep;
  const DesignMatrix fitted = work.with_columns(keep);
  model.linear = lk == LinearKind::ols ? fit_ols(fitted.X, fitted.y) : fit_logistic(fitted.X, fitted.y);
  return model;
}

}  // namespace hwdyn::learn
