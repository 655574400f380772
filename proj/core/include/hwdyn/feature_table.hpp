#pragma once

// Student-level feature matrices for a whole cohort, and the CSV and
// fit-record files that carry them between pipeline stages.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hwdyn/features.hpp"
#include "hwdyn/ink.hpp"
#include "hwdyn/lognorm.hpp"

namespace hwdyn::features {

struct StudentInfo {
  std::string student_id;
  int grade = 1;
  ink::Gender gender = ink::Gender::male;
  double perfect_ratio = 0.0;

  friend bool operator==(const StudentInfo&, const StudentInfo&) = default;
};

StudentInfo student_info(const ink::StudentRecord& s);

/// One row per student, one column per feature name.
struct FeatureTable {
  Family family = Family::basic;
  std::vector<std::string> names;
  std::vector<StudentInfo> students;
  std::vector<std::vector<double>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return names.size(); }
  /// Throws ConfigError for an unknown name.
  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

struct FeatureConfig {
  int n_bins = kDefaultBins;
  EntropyBinning entropy_binning = EntropyBinning::per_drill;
  SnrAggregation snr_aggregation = SnrAggregation::per_stroke;
  lognorm::FitConfig fit;

  void validate() const;
};

/// Fitted strokes of one drill.
struct DrillFits {
  std::string drill_id;
  std::vector<StrokeFit> strokes;
};

/// fits[student][drill], in cohort order.
struct CohortFits {
  std::vector<std::string> student_ids;
  std::vector<std::vector<DrillFits>> students;

  std::size_t n_strokes() const;
};

/// Fits every stroke of the cohort (parallel over strokes).
CohortFits fit_cohort(const ink::Cohort& cohort, const lognorm::FitConfig& cfg);

/// Student-level features of every student. Drill features are computed in
/// parallel; `fits`, when given, supplies the siglog stroke fits instead of
/// refitting. A drill without fittable strokes is a DataError naming it.
FeatureTable compute_features(const ink::Cohort& cohort, Family family,
                              const FeatureConfig& cfg = {}, const CohortFits* fits = nullptr);

/// mean and population std of per-stroke SNR over the cohort.
struct SnrSummary {
  std::size_t n_strokes = 0;
  double mean_db = 0.0;
  double std_db = 0.0;
};
SnrSummary snr_summary(const CohortFits& fits);

/// Header `student_id,grade,gender,perfect_ratio,<names...>`. Values use
/// the shortest round-trip decimal form, so read(write(t)) == t.
void write_feature_csv(const FeatureTable& table, std::ostream& out);
void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);
/// The family is recognized from the column names. Throws DataError on
/// malformed input, an unrecognized column set, or an empty table.
FeatureTable read_feature_csv(std::istream& in);
FeatureTable read_feature_csv(const std::filesystem::path& path);

/// One JSON object per fitted stroke: student_id, drill_id, stroke_index,
/// t_start, snr_db, n_components, snr_over_c, signal_energy,
/// residual_energy and components [{t0, D, mu, sigma}].
void write_fit_records(const CohortFits& fits, std::ostream& out);
void write_fit_records(const CohortFits& fits, const std::filesystem::path& path);
CohortFits read_fit_records(std::istream& in);
CohortFits read_fit_records(const std::filesystem::path& path);

}  // namespace hwdyn::features
