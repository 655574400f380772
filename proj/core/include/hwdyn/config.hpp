#pragma once

// Shared configuration of every pipeline stage, read from `key = value`
// text. Keys accept '-' and '_' interchangeably; '#' starts a comment;
// lists are comma separated.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hwdyn/evaluation.hpp"
#include "hwdyn/feature_table.hpp"
#include "hwdyn/forest.hpp"
#include "hwdyn/lognorm.hpp"

namespace hwdyn {

struct PipelineConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "hwdyn-out";
  std::filesystem::path cohort;  // input cohort for fit / features
  unsigned threads = 0;          // 0: all cores

  // synth
  int n_per_grade = 20;
  int drills_per_student = 20;
  bool label_effects = true;
  double noise_scale = 1.0;
  /// When set, synth calibrates noise_scale to this mean extraction SNR.
  std::optional<double> calibrate_snr_db;

  lognorm::FitConfig fit;
  int n_bins = features::kDefaultBins;
  features::EntropyBinning entropy_binning = features::EntropyBinning::per_drill;
  features::SnrAggregation snr_aggregation = features::SnrAggregation::per_stroke;
  learn::ForestConfig forest;
  bool standardize = true;
  bool select_features = true;

  std::vector<eval::Task> tasks = {eval::Task::grade, eval::Task::gender, eval::Task::performance};
  std::vector<features::Family> families = {features::Family::basic, features::Family::entropy,
                                            features::Family::siglog};
  /// Empty: every conventional model of each task.
  std::vector<eval::ModelChoice> models;

  features::FeatureConfig feature_config() const;
  eval::EvaluationConfig evaluation_config() const;
  /// Throws ConfigError when no seed was given.
  std::uint64_t require_seed() const;
  void validate() const;

  /// Applies one key/value pair. Throws ConfigError for unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);
};

/// Parses config text over the defaults. Errors carry the line number.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);

/// Writes every key with its current value, in a form parse_config reads.
void write_config(const PipelineConfig& cfg, std::ostream& out);

}  // namespace hwdyn
