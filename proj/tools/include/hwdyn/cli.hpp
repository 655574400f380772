#pragma once

// The `hwdyn` command line: synth, fit, features, evaluate, report, run-all.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hwdyn/config.hpp"

namespace hwdyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

/// Parses argv, runs the command, and maps errors to exit codes:
/// ConfigError and bad usage -> 2, any other failure -> 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Commands with their arguments resolved. Each throws on failure.

struct SynthPaths {
  std::filesystem::path cohort;
  std::filesystem::path truth;
};
/// Writes <out>/cohort.jsonl and <out>/truth.jsonl.
SynthPaths cmd_synth(const PipelineConfig& cfg, std::ostream& log);

/// Writes one fit record per fitted stroke and logs the SNR summary.
void cmd_fit(const std::filesystem::path& cohort, const std::filesystem::path& out,
             const PipelineConfig& cfg, std::ostream& log);

/// Writes the student-level feature CSV of one family. `fits`, when not
/// empty, supplies siglog stroke fits from cmd_fit.
void cmd_features(const std::filesystem::path& cohort, features::Family family,
                  const std::filesystem::path& out, const PipelineConfig& cfg,
                  const std::filesystem::path& fits, std::ostream& log);

/// Cross-validates `task` with each model on each feature CSV and writes
/// the report bundle into `out_dir`. Siglog tables also yield
/// snrc_by_grade.csv.
std::vector<eval::EvaluationReport> cmd_evaluate(const std::vector<std::filesystem::path>& tables,
                                                 eval::Task task,
                                                 const std::vector<eval::ModelChoice>& models,
                                                 const std::filesystem::path& out_dir,
                                                 const PipelineConfig& cfg, std::ostream& log);

/// Renders the SVG plots of a report bundle.
std::vector<std::filesystem::path> cmd_report(const std::filesystem::path& dir, std::ostream& log);

struct RunAllResult {
  std::vector<eval::EvaluationReport> reports;
  std::vector<eval::GradeSummary> snrc;
  features::SnrSummary snr;
  double seconds = 0.0;
};
/// synth -> fit -> features -> evaluate -> report under cfg.out.
RunAllResult cmd_run_all(const PipelineConfig& cfg, std::ostream& log);

}  // namespace hwdyn::cli
