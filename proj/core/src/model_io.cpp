#include <fstream>

#include <nlohmann/json.hpp>

#include "hwdyn/error.hpp"
#include "hwdyn/model.hpp"

namespace hwdyn::learn {
namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json selection_to_json(const SelectionTrace& s) {
  json vif = json::array();
  for (const auto& [name, value] : s.removed_by_vif) vif.push_back({{"name", name}, {"vif", value}});
  return {{"removed_by_vif", vif},
          {"removed_by_aic", s.removed_by_aic},
          {"surviving", s.surviving},
          {"initial_aic", s.initial_aic},
          {"final_aic", s.final_aic}};
}

SelectionTrace selection_from_json(const json& j) {
  SelectionTrace s;
  for (const auto& r : j.at("removed_by_vif")) {
    s.removed_by_vif.emplace_back(r.at("name").get<std::string>(), r.at("vif").get<double>());
  }
  s.removed_by_aic = j.at("removed_by_aic").get<std::vector<std::string>>();
  s.surviving = j.at("surviving").get<std::vector<std::string>>();
  s.initial_aic = j.at("initial_aic").get<double>();
  s.final_aic = j.at("final_aic").get<double>();
  return s;
}

json forest_to_json(const Forest& f) {
  json trees = json::array();
  for (const auto& t : f.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    trees.push_back(std::move(nodes));
  }
  return {{"mode", f.mode == ForestMode::regression ? "regression" : "classification"},
          {"n_features", f.n_features},
          {"trees", trees}};
}

Forest forest_from_json(const json& j) {
  Forest f;
  const auto mode = j.at("mode").get<std::string>();
  if (mode != "regression" && mode != "classification") throw DataError("unknown forest mode");
  f.mode = mode == "regression" ? ForestMode::regression : ForestMode::classification;
  f.n_features = j.at("n_features").get<int>();
  for (const auto& jt : j.at("trees")) {
    Tree t;
    for (const auto& n : jt) {
      t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                         n.at(3).get<int>(), n.at(4).get<double>()});
    }
    const int size = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes) {
      if (n.feature >= f.n_features || (n.feature >= 0 && (n.left <= 0 || n.left >= size ||
                                                             n.right <= 0 || n.right >= size))) {
        throw DataError("malformed tree node");
      }
    }
    if (t.nodes.empty()) throw DataError("empty tree");
    f.trees.push_back(std::move(t));
  }
  return f;
}

}  // namespace

void write_model(const TrainedModel& m, std::ostream& out) {
  json j = {{"kind", to_string(m.kind)}, {"features", m.features}};
  if (m.forest) {
    j["forest"] = forest_to_json(*m.forest);
  } else {
    j["intercept"] = m.linear.intercept;
    j["weights"] = vec_to_json(m.linear.weights);
    j["iterations"] = m.linear.iterations;
    j["converged"] = m.linear.converged;
  }
  if (m.scaler) j["scaler"] = {{"mean", vec_to_json(m.scaler->mean)}, {"scale", vec_to_json(m.scaler->scale)}};
  if (m.selection) j["selection"] = selection_to_json(*m.selection);
  out << j.dump(1) << '\n';
}

void write_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  write_model(model, out);
}

TrainedModel read_model(std::istream& in) {
  try {
    const json j = json::parse(in);
    TrainedModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.features = j.at("features").get<std::vector<std::string>>();
    if (j.contains("forest")) {
      m.forest = forest_from_json(j.at("forest"));
    } else {
      m.linear.intercept = j.at("intercept").get<double>();
      m.linear.weights = vec_from_json(j.at("weights"));
      m.linear.iterations = j.at("iterations").get<int>();
      m.linear.converged = j.at("converged").get<bool>();
      if (m.linear.weights.size() != static_cast<Eigen::Index>(m.features.size())) {
        throw DataError("model: weight count does not match features");
      }
    }
    if (j.contains("scaler")) {
      m.scaler = Standardizer{vec_from_json(j.at("scaler").at("mean")),
                              vec_from_json(j.at("scaler").at("scale"))};
    }
    if (j.contains("selection")) m.selection = selection_from_json(j.at("selection"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

TrainedModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_model(in);
}

}  // namespace hwdyn::learn
