#pragma once

#include <span>
#include <vector>

#include "hwdyn/ink.hpp"

namespace hwdyn::kinematics {

inline constexpr double kDefaultSmoothingSigma = 2.0;  // samples

/// Per-sample kinematic signals of one stroke, all aligned to `t`.
///
/// speed_profile() produces speed at the midpoints of consecutive samples,
/// with `accel` left empty. accel_profile() then differentiates once more
/// and fills every channel at the midpoints of the speed samples.
struct KinematicSeries {
  std::vector<double> t;
  std::vector<double> speed;
  std::vector<double> accel;
  std::vector<double> pressure;
  std::vector<double> tilt_x;
  std::vector<double> tilt_y;

  std::size_t size() const { return t.size(); }
};

/// Planar (x, y) speed between consecutive samples, stamped at the interval
/// midpoint. Channels are averaged over each interval's two endpoints.
KinematicSeries speed_profile(const ink::Stroke& stroke);

/// First difference of speed at the midpoints of consecutive speed samples.
/// Throws NumericError("insufficient samples") for fewer than two speeds.
KinematicSeries accel_profile(const KinematicSeries& series);

/// Gaussian smoothing with the kernel truncated at +/-4 sigma and
/// renormalized where it overhangs either boundary.
std::vector<double> smooth(std::span<const double> values, double sigma_samples);

/// True when some sampling interval deviates from 1/nominal_rate_hz by more
/// than `tolerance` (relative).
bool needs_regularization(const ink::Stroke& stroke, double nominal_rate_hz,
                          double tolerance = 0.1);

/// Resamples the stroke onto a uniform grid at nominal_rate_hz by linear
/// interpolation of every channel, starting at the first sample. Strokes
/// already within tolerance are returned unchanged.
ink::Stroke regularize(const ink::Stroke& stroke, double nominal_rate_hz,
                       double tolerance = 0.1);

}  // namespace hwdyn::kinematics
