#pragma once

// Sigma-lognormal speed model: a stroke's speed profile is a sum of
// lognormal pulses, one per motor command.

#include <span>
#include <vector>

#include "hwdyn/kinematics.hpp"

namespace hwdyn::lognorm {

/// One lognormal velocity pulse.
///   t0    onset time (s)
///   D     amplitude: the distance covered by the pulse
///   mu    log-time location (log seconds)
///   sigma log-time dispersion, > 0
struct LognormalComponent {
  double t0 = 0.0;
  double D = 1.0;
  double mu = -1.5;
  double sigma = 0.3;

  /// Time of maximum speed, t0 + exp(mu - sigma^2).
  double mode_time() const;
  /// Speed at the mode.
  double peak_speed() const;

  friend bool operator==(const LognormalComponent&, const LognormalComponent&) = default;
};

struct FitResult {
  std::vector<LognormalComponent> components;  // sorted by t0
  double snr_db = 0.0;
  int n_components = 0;
  double snr_over_c = 0.0;  // snr_db / max(C, 1)
};

enum class SnrReference { raw, smoothed };

struct FitConfig {
  double snr_target_db = 25.0;
  int max_components = 20;
  double alpha = 0.5;  // peak fraction at which the bracketing crossings are read
  double min_gain_db = 0.5;
  bool refine = true;
  double smoothing_sigma = kinematics::kDefaultSmoothingSigma;  // samples
  /// Whether SNR is scored against the raw or the smoothed input speed.
  SnrReference snr_reference = SnrReference::raw;

  void validate() const;
};

double lognormal_speed(const LognormalComponent& c, double t);

/// Closed-form inversion of the mode and the two alpha*v_max crossings of an
/// isolated pulse. Exact for noiseless input. Throws NumericError
/// ("degenerate characteristic points") when the geometry admits no pulse.
LognormalComponent three_point_estimate(double t_left, double t_mode, double t_right,
                                        double v_max, double alpha);

/// Inversion from the mode and the two inflection points of an isolated
/// pulse. Poorly conditioned for small sigma (the pulse is nearly symmetric
/// around its inflections), so extract() only uses it as a fallback.
LognormalComponent inflection_estimate(double t_inflection_left, double t_mode,
                                       double t_inflection_right, double v_max);

/// Characteristic times of a pulse: mode, alpha crossings, inflections.
struct CharacteristicTimes {
  double left_crossing;
  double mode;
  double right_crossing;
  double left_inflection;
  double right_inflection;
};
CharacteristicTimes characteristic_times(const LognormalComponent& c, double alpha);

std::vector<double> synthesize(std::span<const LognormalComponent> components,
                               std::span<const double> t_grid);

/// 10 log10(sum obs^2 / sum (obs - rec)^2), clamped to 100 dB for a
/// vanishing residual and defined as 0 dB for an all-zero observation.
double snr_db(std::span<const double> observed, std::span<const double> reconstructed);

inline constexpr double kSnrClampDb = 100.0;

/// Greedy largest-peak-first extraction of lognormal components from a
/// speed profile. Deterministic in (speed, cfg). Throws NumericError
/// ("stroke too short to fit") for fewer than 8 samples or <= 10 ms.
FitResult extract(const kinematics::KinematicSeries& speed, const FitConfig& cfg = {});

/// Same as extract() on a bare (t, speed) pair.
FitResult extract(std::span<const double> t, std::span<const double> speed,
                  const FitConfig& cfg = {});

}  // namespace hwdyn::lognorm
