#include "hwdyn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "hwdyn/error.hpp"
#include "text.hpp"

namespace hwdyn {
namespace {

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  return key;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    return detail::parse_double(v, key);
  } catch (const DataError&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& v, Parse parse) {
  std::vector<T> out;
  for (const auto& item : detail::split_csv(v)) {
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

std::string fmt(double v) { return detail::format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

}  // namespace

features::FeatureConfig PipelineConfig::feature_config() const {
  features::FeatureConfig f;
  f.n_bins = n_bins;
  f.entropy_binning = entropy_binning;
  f.snr_aggregation = snr_aggregation;
  f.fit = fit;
  return f;
}

eval::EvaluationConfig PipelineConfig::evaluation_config() const {
  eval::EvaluationConfig e;
  e.seed = seed.value_or(0);
  e.training.forest = forest;
  e.training.standardize = standardize;
  e.training.select = select_features;
  return e;
}

std::uint64_t PipelineConfig::require_seed() const {
  if (!seed) throw ConfigError("a seed is required (--seed or 'seed = ...' in the config)");
  return *seed;
}

void PipelineConfig::validate() const {
  if (n_per_grade < 2) throw ConfigError("n-per-grade must be >= 2");
  if (drills_per_student < 1) throw ConfigError("drills-per-student must be >= 1");
  if (!(noise_scale >= 0.0)) throw ConfigError("noise-scale must be >= 0");
  if (n_bins < 2) throw ConfigError("n-bins must be >= 2");
  fit.validate();
  forest.validate();
  if (tasks.empty()) throw ConfigError("tasks must not be empty");
  if (families.empty()) throw ConfigError("families must not be empty");
}

void PipelineConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = normalize_key(raw_key);
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"seed", [&](const std::string& v) { seed = parse_int<std::uint64_t>(key, v); }},
      {"out", [&](const std::string& v) { out = v; }},
      {"cohort", [&](const std::string& v) { cohort = v; }},
      {"threads", [&](const std::string& v) { threads = parse_int<unsigned>(key, v); }},
      {"n-per-grade", [&](const std::string& v) { n_per_grade = parse_int<int>(key, v); }},
      {"drills-per-student", [&](const std::string& v) { drills_per_student = parse_int<int>(key, v); }},
      {"label-effects", [&](const std::string& v) { label_effects = parse_bool(key, v); }},
      {"noise-scale", [&](const std::string& v) { noise_scale = parse_real(key, v); }},
      {"calibrate-snr-db", [&](const std::string& v) {
         if (v == "none" || v.empty()) calibrate_snr_db.reset();
         else calibrate_snr_db = parse_real(key, v);
       }},
      {"snr-target-db", [&](const std::string& v) { fit.snr_target_db = parse_real(key, v); }},
      {"max-components", [&](const std::string& v) { fit.max_components = parse_int<int>(key, v); }},
      {"alpha", [&](const std::string& v) { fit.alpha = parse_real(key, v); }},
      {"min-gain-db", [&](const std::string& v) { fit.min_gain_db = parse_real(key, v); }},
      {"refine", [&](const std::string& v) { fit.refine = parse_bool(key, v); }},
      {"smoothing-sigma", [&](const std::string& v) { fit.smoothing_sigma = parse_real(key, v); }},
      {"snr-reference", [&](const std::string& v) {
         if (v == "raw") fit.snr_reference = lognorm::SnrReference::raw;
         else if (v == "smoothed") fit.snr_reference = lognorm::SnrReference::smoothed;
         else throw ConfigError(key + ": expected raw or smoothed, got '" + v + "'");
       }},
      {"n-bins", [&](const std::string& v) { n_bins = parse_int<int>(key, v); }},
      {"entropy-binning", [&](const std::string& v) { entropy_binning = features::parse_entropy_binning(v); }},
      {"snr-aggregation", [&](const std::string& v) { snr_aggregation = features::parse_snr_aggregation(v); }},
      {"n-trees", [&](const std::string& v) { forest.n_trees = parse_int<int>(key, v); }},
      {"min-leaf", [&](const std::string& v) { forest.min_leaf = parse_int<int>(key, v); }},
      {"max-depth", [&](const std::string& v) { forest.max_depth = parse_int<int>(key, v); }},
      {"features-per-split", [&](const std::string& v) { forest.features_per_split = parse_int<int>(key, v); }},
      {"standardize", [&](const std::string& v) { standardize = parse_bool(key, v); }},
      {"select-features", [&](const std::string& v) { select_features = parse_bool(key, v); }},
      {"tasks", [&](const std::string& v) { tasks = parse_list<eval::Task>(v, eval::parse_task); }},
      {"families", [&](const std::string& v) { families = parse_list<features::Family>(v, features::parse_family); }},
      {"models", [&](const std::string& v) { models = parse_list<eval::ModelChoice>(v, eval::parse_model); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + raw_key + "'");
  it->second(std::string(detail::trim(value)));
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      cfg.set(std::string(detail::trim(body.substr(0, eq))), std::string(detail::trim(body.substr(eq + 1))));
    } catch (const Error& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_config(const PipelineConfig& c, std::ostream& out) {
  const auto join = [](const auto& items, auto name) {
    std::string s;
    for (const auto& i : items) s += (s.empty() ? "" : ",") + name(i);
    return s;
  };
  if (c.seed) out << "seed = " << *c.seed << '\n';
  out << "out = " << c.out.string() << '\n';
  if (!c.cohort.empty()) out << "cohort = " << c.cohort.string() << '\n';
  out << "threads = " << c.threads << '\n'
      << "n-per-grade = " << c.n_per_grade << '\n'
      << "drills-per-student = " << c.drills_per_student << '\n'
      << "label-effects = " << fmt(c.label_effects) << '\n'
      << "noise-scale = " << fmt(c.noise_scale) << '\n'
      << "calibrate-snr-db = " << (c.calibrate_snr_db ? fmt(*c.calibrate_snr_db) : "none") << '\n'
      << "snr-target-db = " << fmt(c.fit.snr_target_db) << '\n'
      << "max-components = " << c.fit.max_components << '\n'
      << "alpha = " << fmt(c.fit.alpha) << '\n'
      << "min-gain-db = " << fmt(c.fit.min_gain_db) << '\n'
      << "refine = " << fmt(c.fit.refine) << '\n'
      << "smoothing-sigma = " << fmt(c.fit.smoothing_sigma) << '\n'
      << "snr-reference = " << (c.fit.snr_reference == lognorm::SnrReference::raw ? "raw" : "smoothed") << '\n'
      << "n-bins = " << c.n_bins << '\n'
      << "entropy-binning = " << features::to_string(c.entropy_binning) << '\n'
      << "snr-aggregation = " << features::to_string(c.snr_aggregation) << '\n'
      << "n-trees = " << c.forest.n_trees << '\n'
      << "min-leaf = " << c.forest.min_leaf << '\n'
      << "max-depth = " << c.forest.max_depth << '\n'
      << "features-per-split = " << c.forest.features_per_split << '\n'
      << "standardize = " << fmt(c.standardize) << '\n'
      << "select-features = " << fmt(c.select_features) << '\n'
      << "tasks = " << join(c.tasks, [](eval::Task t) { return eval::to_string(t); }) << '\n'
      << "families = " << join(c.families, [](features::Family f) { return features::to_string(f); }) << '\n';
  if (!c.models.empty()) {
    out << "models = " << join(c.models, [](eval::ModelChoice m) { return eval::to_string(m); }) << '\n';
  }
}

}  // namespace hwdyn
