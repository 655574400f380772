#pragma once

// Drill-level feature families and their student-level summaries.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hwdyn/ink.hpp"
#include "hwdyn/lognorm.hpp"

namespace hwdyn::features {

enum class Family { basic, entropy, siglog };

std::string to_string(Family f);
/// Throws ConfigError for an unknown name.
Family parse_family(const std::string& s);

/// Whether a drill's SNR summary averages per-stroke SNRs or pools signal
/// and residual energy over all of the drill's strokes.
enum class SnrAggregation { per_stroke, pooled };
/// Whether entropy histograms span each drill's own value range or a range
/// fixed over the whole cohort.
enum class EntropyBinning { per_drill, per_cohort };

std::string to_string(SnrAggregation a);
std::string to_string(EntropyBinning b);
SnrAggregation parse_snr_aggregation(const std::string& s);
EntropyBinning parse_entropy_binning(const std::string& s);

inline constexpr int kDefaultBins = 16;

struct EntropyHistogram {
  int n_bins = 0;
  std::vector<std::size_t> counts;
  std::vector<double> probabilities;
  double h_norm = 0.0;
};

/// Equal-width histogram over [lo, hi] (values outside fall in the edge
/// bins) and its entropy divided by ln(n_bins). A degenerate range puts all
/// mass in the first bin. Throws NumericError on empty input, ConfigError
/// for n_bins < 2.
EntropyHistogram entropy_histogram(std::span<const double> values, int n_bins, double lo,
                                   double hi);
/// Same over the values' own [min, max].
EntropyHistogram entropy_histogram(std::span<const double> values, int n_bins);

double normalized_entropy(std::span<const double> values, int n_bins);
double normalized_entropy(std::span<const double> values, int n_bins, double lo, double hi);

/// Ordered named values: names are stable per family.
struct DrillFeatures {
  Family family = Family::basic;
  std::vector<std::string> names;
  std::vector<double> values;

  /// Throws ConfigError for an unknown name.
  double at(std::string_view name) const;
};

struct FeatureVector {
  std::string student_id;
  Family family = Family::basic;
  std::vector<std::string> names;
  std::vector<double> values;

  double at(std::string_view name) const;
};

/// Per-drill feature names of a family, in output order.
const std::vector<std::string>& drill_feature_names(Family f);
/// Student-level names: basic and entropy carry a ".mean" and ".std" of
/// each drill feature; siglog keeps the drill names (mean only).
std::vector<std::string> student_feature_names(Family f);

/// Value range of each entropy channel (accel, pressure, tilt_x, tilt_y).
struct ChannelRanges {
  std::array<std::pair<double, double>, 4> bounds{};
};

/// {mean, std} of speed, pressure, tilt_x and tilt_y pooled over every
/// sample of the drill. Speed comes from kinematics::speed_profile, the
/// other channels from the raw samples. Strokes whose sampling interval
/// strays from the nominal rate are regularized first.
DrillFeatures basic_drill_features(const ink::Drill& drill,
                                   double nominal_rate_hz = ink::kDefaultSampleRateHz);

/// {mean, std, h_norm} of acceleration, pressure, tilt_x and tilt_y pooled
/// over the drill. Strokes with fewer than three samples contribute no
/// acceleration. Ranges, when given, fix the histogram bounds.
DrillFeatures entropy_drill_features(const ink::Drill& drill, int n_bins = kDefaultBins,
                                     const std::optional<ChannelRanges>& ranges = std::nullopt,
                                     double nominal_rate_hz = ink::kDefaultSampleRateHz);

/// Pooled value ranges of the entropy channels over a whole cohort.
ChannelRanges cohort_channel_ranges(const ink::Cohort& cohort);

/// Extraction result of one stroke plus the energies needed to pool SNR.
struct StrokeFit {
  std::size_t stroke_index = 0;
  double t_start = 0.0;  // first pen sample; siglog t0 statistics are relative to it
  double signal_energy = 0.0;
  double residual_energy = 0.0;
  lognorm::FitResult fit;
};

/// Fits one stroke; std::nullopt when it is too short to fit.
std::optional<StrokeFit> fit_stroke(const ink::Stroke& stroke, std::size_t stroke_index,
                                    const lognorm::FitConfig& cfg,
                                    double nominal_rate_hz = ink::kDefaultSampleRateHz);

/// Fits every stroke of the drill, skipping strokes too short to fit.
std::vector<StrokeFit> fit_drill(const ink::Drill& drill, const lognorm::FitConfig& cfg,
                                 double nominal_rate_hz = ink::kDefaultSampleRateHz);

/// {mean, std} over the drill of C, SNR, SNR/C (per stroke) and of D, t0,
/// mu, sigma (pooled over all components; t0 relative to stroke start).
/// Throws DataError("no fittable strokes") when `fits` is empty.
DrillFeatures siglog_drill_features(std::span<const StrokeFit> fits,
                                    SnrAggregation aggregation = SnrAggregation::per_stroke);
DrillFeatures siglog_drill_features(const ink::Drill& drill, const lognorm::FitConfig& cfg,
                                    SnrAggregation aggregation = SnrAggregation::per_stroke,
                                    double nominal_rate_hz = ink::kDefaultSampleRateHz);

/// basic/entropy: mean and std of each drill feature across drills;
/// siglog: mean only. Throws ConfigError on an empty list or mixed families.
FeatureVector aggregate_student(std::span<const DrillFeatures> drills, Family family,
                                const std::string& student_id = {});

/// Population mean and standard deviation (0 for a single value).
std::pair<double, double> mean_std(std::span<const double> values);

}  // namespace hwdyn::features
