#pragma once

// Synthetic cohorts with known sigma-lognormal ground truth and a
// grade-dependent motor maturation trend.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwdyn/ink.hpp"
#include "hwdyn/lognorm.hpp"

namespace hwdyn::synth {

/// Stationary first-order autoregressive channel (pressure, tilt).
struct ChannelProcess {
  double mean = 0.0;
  double ar_coeff = 0.95;
  double innovation_sd = 0.01;
  double student_sd = 0.0;  // between-student spread of the mean
};

struct GradeProfile {
  double components_mean = 5.0;  // pulses per stroke
  double components_sd = 0.8;
  double sigma_min = 0.15;
  double sigma_max = 0.35;
  double mu_min = -2.4;
  double mu_max = -1.7;
  double gap_min = 0.06;  // separation of consecutive pulse modes, s
  double gap_max = 0.14;
  double amplitude_min = 1.5;
  double amplitude_max = 6.0;
  double noise_amp = 0.04;  // noise RMS as a fraction of the stroke's peak speed
};

struct MaturationProfile {
  std::array<GradeProfile, 9> grades{};
  ChannelProcess pressure{0.55, 0.95, 0.01, 0.04};
  ChannelProcess tilt_x{35.0, 0.97, 0.4, 5.0};
  ChannelProcess tilt_y{-20.0, 0.97, 0.4, 5.0};
  double noise_bandwidth = 2.0;  // Gaussian smoothing of the white noise, samples
  double noise_scale = 1.0;      // multiplies every grade's noise_amp (calibration knob)
  double sample_rate_hz = ink::kDefaultSampleRateHz;
  int strokes_per_drill_min = 2;
  int strokes_per_drill_max = 4;
  double pen_up_gap = 0.15;  // s between strokes

  double female_fraction = 0.5;
  double high_performer_fraction = 0.5;
  /// Pressure-mean shift applied to female students.
  double gender_pressure_shift = 0.03;
  /// Relative narrowing of pulse dispersion for high performers.
  double performance_sigma_shift = 0.08;
  /// Perfect-drill probability is 0.45 +/- this for high/low performers.
  double performance_perfect_shift = 0.15;

  /// Grade 1 averages 8 pulses per stroke, grade 9 averages 3, with
  /// dispersion and noise narrowing linearly in between.
  static MaturationProfile defaults();
  /// defaults() with every label effect set to zero (negative control).
  static MaturationProfile without_label_effects();

  void validate() const;
};

/// Per-stroke appearance parameters other than the speed pulses.
struct StrokeStyle {
  double sample_rate_hz = ink::kDefaultSampleRateHz;
  double noise_bandwidth = 2.0;
  ChannelProcess pressure{0.55, 0.95, 0.01, 0.0};
  ChannelProcess tilt_x{35.0, 0.97, 0.4, 0.0};
  ChannelProcess tilt_y{-20.0, 0.97, 0.4, 0.0};
};

/// Renders a stroke whose speed profile (between consecutive samples) is
/// the sum of `components` plus band-limited noise of RMS
/// noise_amp * peak speed, clamped at zero. The path runs straight in the
/// direction of whichever pulse dominates each interval. Throws
/// ConfigError for an empty component list.
ink::Stroke generate_stroke(std::span<const lognorm::LognormalComponent> components,
                            double noise_amp, std::uint64_t seed, const StrokeStyle& style = {});

struct StrokeTruth {
  std::string student_id;
  std::string drill_id;
  std::size_t stroke_index = 0;
  std::vector<lognorm::LognormalComponent> components;
  double noise_amp = 0.0;
};

struct StudentTruth {
  std::string student_id;
  int grade = 1;
  bool female = false;
  bool high_performer = false;
};

struct GroundTruth {
  std::vector<StudentTruth> students;
  std::vector<StrokeTruth> strokes;
};

/// 9 grades x n_per_grade students x drills_per_student drills.
/// Fully determined by (profile, sizes, seed); students are generated in
/// parallel from per-student seed substreams.
std::pair<ink::Cohort, GroundTruth> generate_cohort(const MaturationProfile& profile,
                                                    int n_per_grade, int drills_per_student,
                                                    std::uint64_t seed);

/// Line-delimited sidecar: one record per student label, then one per stroke.
void write_ground_truth(const GroundTruth& truth, std::ostream& out);
void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(std::istream& in);
GroundTruth read_ground_truth(const std::filesystem::path& path);

struct CalibrationResult {
  double noise_scale = 1.0;
  double mean_snr_db = 0.0;
  int iterations = 0;
};

/// Bisects profile.noise_scale until the mean extraction SNR over a sample
/// of strokes drawn from every grade matches target_mean_snr_db.
CalibrationResult calibrate_noise(const MaturationProfile& profile, double target_mean_snr_db,
                                  const lognorm::FitConfig& fit, std::uint64_t seed,
                                  int strokes_per_grade = 12, double tolerance_db = 0.25);

/// Mixes a seed and a stream index into an independent 64-bit seed.
std::uint64_t substream(std::uint64_t seed, std::uint64_t stream);

}  // namespace hwdyn::synth
