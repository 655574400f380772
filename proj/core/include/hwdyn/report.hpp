#pragma once

// Report bundle: CSV tables of an evaluation plus SVG plots rendered from
// the scatter and SNR/C tables.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hwdyn/evaluation.hpp"

namespace hwdyn::eval {

/// Writes the report's files into `dir` (created if needed):
///   metrics.csv  rows for (task, family, model), pooled and per fold;
///                rows of other combinations already there are kept
///   confusion_<task>_<family>_<model>.csv   classification
///   predictions_<task>_<family>_<model>.csv classification
///   grade_scatter_<family>_<model>.csv      grade task
///   selection_<task>_<family>_<model>.csv   linear and logistic
void write_report(const EvaluationReport& report, const std::filesystem::path& dir);

/// grade,n,min,q1,median,q3,max
void write_snrc_by_grade(const std::vector<GradeSummary>& summary,
                         const std::filesystem::path& path);
std::vector<GradeSummary> read_snrc_by_grade(const std::filesystem::path& path);

/// (true, predicted) pairs from a grade_scatter CSV.
std::vector<std::pair<double, double>> read_grade_scatter(const std::filesystem::path& path);

/// One circle per point, with the identity line.
std::string scatter_svg(const std::vector<std::pair<double, double>>& points,
                        const std::string& title);
/// One box (q1..q3, median bar, min..max whiskers) per grade.
std::string box_svg(const std::vector<GradeSummary>& summary, const std::string& title);

/// Renders <name>.svg next to every grade_scatter_*.csv and
/// snrc_by_grade.csv in `dir`; returns the written paths in name order.
/// Throws ConfigError when `dir` has neither, or a table has no rows.
std::vector<std::filesystem::path> render_plots(const std::filesystem::path& dir);

}  // namespace hwdyn::eval
