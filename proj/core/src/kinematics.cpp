#include "hwdyn/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "hwdyn/error.hpp"

namespace hwdyn::kinematics {

KinematicSeries speed_profile(const ink::Stroke& stroke) {
  const auto& s = stroke.samples;
  KinematicSeries out;
  if (s.size() < 2) return out;
  const std::size_t n = s.size() - 1;
  out.t.resize(n);
  out.speed.resize(n);
  out.pressure.resize(n);
  out.tilt_x.resize(n);
  out.tilt_y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = s[i];
    const auto& b = s[i + 1];
    const double dt = b.t - a.t;
    out.t[i] = 0.5 * (a.t + b.t);
    out.speed[i] = std::hypot(b.x - a.x, b.y - a.y) / dt;
    out.pressure[i] = 0.5 * (a.pressure + b.pressure);
    out.tilt_x[i] = 0.5 * (a.tilt_x + b.tilt_x);
    out.tilt_y[i] = 0.5 * (a.tilt_y + b.tilt_y);
  }
  return out;
}

KinematicSeries accel_profile(const KinematicSeries& series) {
  if (series.speed.size() < 2) throw NumericError("insufficient samples");
  const std::size_t n = series.speed.size() - 1;
  KinematicSeries out;
  out.t.resize(n);
  out.speed.resize(n);
  out.accel.resize(n);
  out.pressure.resize(n);
  out.tilt_x.resize(n);
  out.tilt_y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = series.t[i + 1] - series.t[i];
    out.t[i] = 0.5 * (series.t[i] + series.t[i + 1]);
    out.speed[i] = 0.5 * (series.speed[i] + series.speed[i + 1]);
    out.accel[i] = (series.speed[i + 1] - series.speed[i]) / dt;
    out.pressure[i] = 0.5 * (series.pressure[i] + series.pressure[i + 1]);
    out.tilt_x[i] = 0.5 * (series.tilt_x[i] + series.tilt_x[i + 1]);
    out.tilt_y[i] = 0.5 * (series.tilt_y[i] + series.tilt_y[i + 1]);
  }
  return out;
}

std::vector<double> smooth(std::span<const double> values, double sigma_samples) {
  if (values.empty()) throw NumericError("smooth: empty input");
  if (!(sigma_samples > 0.0)) throw ConfigError("smooth: sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma_samples));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double z = static_cast<double>(k) / sigma_samples;
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * z * z);
  }
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - radius);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + radius);
    double acc = 0.0;
    double wsum = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      const double w = kernel[static_cast<std::size_t>(j - i + radius)];
      acc += w * values[static_cast<std::size_t>(j)];
      wsum += w;
    }
    out[static_cast<std::size_t>(i)] = acc / wsum;
  }
  return out;
}

bool needs_regularization(const ink::Stroke& stroke, double nominal_rate_hz, double tolerance) {
  const double nominal = 1.0 / nominal_rate_hz;
  const auto& s = stroke.samples;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (std::abs((s[i].t - s[i - 1].t) - nominal) > tolerance * nominal) return true;
  }
  return false;
}

ink::Stroke regularize(const ink::Stroke& stroke, double nominal_rate_hz, double tolerance) {
  if (!needs_regularization(stroke, nominal_rate_hz, tolerance)) return stroke;
  const auto& s = stroke.samples;
  const double step = 1.0 / nominal_rate_hz;
  const double t_first = s.front().t;
  const double t_last = s.back().t;
  const auto count = static_cast<std::size_t>(std::floor((t_last - t_first) / step + 1e-9)) + 1;

  auto lerp = [](double a, double b, double w) { return a + (b - a) * w; };
  ink::Stroke out;
  out.samples.reserve(std::max<std::size_t>(count, 2));
  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t_first + static_cast<double>(k) * step;
    while (j + 2 < s.size() && s[j + 1].t < t) ++j;
    const auto& a = s[j];
    const auto& b = s[j + 1];
    const double w = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    out.samples.push_back(ink::InkSample{t,
                                         lerp(a.x, b.x, w),
                                         lerp(a.y, b.y, w),
                                         lerp(a.z, b.z, w),
                                         lerp(a.pressure, b.pressure, w),
                                         lerp(a.tilt_x, b.tilt_x, w),
                                         lerp(a.tilt_y, b.tilt_y, w),
                                         lerp(a.tip_width, b.tip_width, w)});
  }
  if (out.samples.size() < 2) out.samples.push_back(s.back());
  return out;
}

}  // namespace hwdyn::kinematics
