#include "hwdyn/lognorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "hwdyn/error.hpp"
#include "hwdyn/trust_region.hpp"

namespace hwdyn::lognorm {
namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;  // sqrt(2 pi)
constexpr double kMinSigma = 0.02;
constexpr double kMaxSigma = 1.5;
constexpr double kBracketHysteresis = 0.03;  // fraction of the current peak
constexpr double kResidualFloor = 0.05;      // fraction of the current peak
constexpr double kMaxRaisedAlpha = 0.9;
constexpr double kDefaultSigma = 0.3;
constexpr double kMaxEstimateSigma = 1.0;
constexpr double kNegligiblePeak = 1e-4;  // fraction of the observed peak
constexpr double kMinObservedMass = 0.5;  // fraction of D inside the stroke

double beta_for(double alpha) { return std::sqrt(2.0 * std::log(1.0 / alpha)); }

double amplitude_from_peak(double v_max, double mu, double sigma) {
  return v_max * sigma * kSqrt2Pi * std::exp(mu - 0.5 * sigma * sigma);
}

bool plausible(const LognormalComponent& c) {
  return std::isfinite(c.t0) && std::isfinite(c.D) && std::isfinite(c.mu) &&
         std::isfinite(c.sigma) && c.D > 0.0 && c.sigma >= kMinSigma && c.sigma <= kMaxSigma &&
         c.mu > -5.0 && c.mu < 1.5;
}

double lognormal_cdf(const LognormalComponent& c, double t) {
  if (t <= c.t0) return 0.0;
  return 0.5 * std::erfc(-(std::log(t - c.t0) - c.mu) / (c.sigma * std::numbers::sqrt2));
}

// The pulse peaks inside [begin, end] and puts most of its distance there.
// Otherwise the stroke only sees a tail and D is unconstrained.
bool anchored(const LognormalComponent& c, double begin, double end) {
  const double mode = c.mode_time();
  if (!(mode >= begin && mode <= end)) return false;
  return lognormal_cdf(c, end) - lognormal_cdf(c, begin) >= kMinObservedMass;
}

bool all_anchored(const std::vector<LognormalComponent>& set, double begin, double end) {
  return std::all_of(set.begin(), set.end(), [&](const auto& c) { return anchored(c, begin, end); });
}

// Index of the highest sample; the earliest wins ties.
std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

struct Bracket {
  std::size_t lo;
  std::size_t hi;
};

// Walks outward from the peak tracking the running minimum; stops once the
// signal climbs more than `hysteresis` above it (a neighbouring pulse).
Bracket bracket_peak(std::span<const double> s, std::size_t peak, double hysteresis) {
  std::size_t lo = peak;
  for (std::size_t i = peak; i > 0; --i) {
    const double v = s[i - 1];
    if (v < s[lo]) {
      lo = i - 1;
    } else if (v > s[lo] + hysteresis) {
      break;
    }
  }
  std::size_t hi = peak;
  for (std::size_t i = peak + 1; i < s.size(); ++i) {
    const double v = s[i];
    if (v < s[hi]) {
      hi = i;
    } else if (v > s[hi] + hysteresis) {
      break;
    }
  }
  return {lo, hi};
}

std::optional<double> left_crossing(std::span<const double> t, std::span<const double> s,
                                    std::size_t peak, std::size_t lo, double level) {
  for (std::size_t i = peak; i > lo; --i) {
    if (s[i - 1] <= level) {
      const double w = (s[i] - level) / (s[i] - s[i - 1]);
      return t[i] - w * (t[i] - t[i - 1]);
    }
  }
  return std::nullopt;
}

std::optional<double> right_crossing(std::span<const double> t, std::span<const double> s,
                                     std::size_t peak, std::size_t hi, double level) {
  for (std::size_t i = peak; i < hi; ++i) {
    if (s[i + 1] <= level) {
      const double w = (s[i] - level) / (s[i] - s[i + 1]);
      return t[i] + w * (t[i + 1] - t[i]);
    }
  }
  return std::nullopt;
}

double second_difference(std::span<const double> s, std::size_t i) {
  return s[i - 1] - 2.0 * s[i] + s[i + 1];
}

// Zero crossings of the discrete curvature on either side of the peak.
std::optional<std::pair<double, double>> inflections(std::span<const double> t,
                                                     std::span<const double> s,
                                                     std::size_t peak, Bracket b) {
  if (peak < 2 || peak + 2 >= s.size()) return std::nullopt;
  std::optional<double> left;
  std::optional<double> right;
  for (std::size_t i = peak; i > std::max<std::size_t>(b.lo, 1); --i) {
    const double c_in = second_difference(s, i);
    const double c_out = second_difference(s, i - 1);
    if (c_in < 0.0 && c_out >= 0.0) {
      const double w = c_in / (c_in - c_out);
      left = t[i] - w * (t[i] - t[i - 1]);
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < std::min(b.hi, s.size() - 1); ++i) {
    const double c_in = second_difference(s, i);
    const double c_out = second_difference(s, i + 1);
    if (c_in < 0.0 && c_out >= 0.0) {
      const double w = c_in / (c_in - c_out);
      right = t[i] + w * (t[i + 1] - t[i]);
      break;
    }
  }
  if (!left || !right) return std::nullopt;
  return std::make_pair(*left, *right);
}

struct PeakEstimate {
  double t_mode;
  double v_max;
};

// Parabolic interpolation through the peak sample and its neighbours.
PeakEstimate interpolate_peak(std::span<const double> t, std::span<const double> s,
                              std::size_t p) {
  if (p == 0 || p + 1 >= s.size()) return {t[p], s[p]};
  const double a = s[p - 1];
  const double b = s[p];
  const double c = s[p + 1];
  const double denom = a - 2.0 * b + c;
  if (!(denom < 0.0)) return {t[p], b};
  const double delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  const double half_step = delta >= 0.0 ? t[p + 1] - t[p] : t[p] - t[p - 1];
  return {t[p] + delta * half_step, b - 0.25 * (a - c) * delta};
}

// Initial estimates must also have a dispersion typical of handwriting;
// wider readings come from overlapped flanks and are better re-derived.
bool plausible_estimate(const LognormalComponent& c) {
  return plausible(c) && c.sigma <= kMaxEstimateSigma;
}

std::optional<LognormalComponent> try_three_point(double l, double m, double r, double v,
                                                  double alpha) {
  try {
    auto c = three_point_estimate(l, m, r, v, alpha);
    if (plausible_estimate(c)) return c;
  } catch (const NumericError&) {
  }
  return std::nullopt;
}

struct Estimate {
  LognormalComponent component;
  // Times bounding the part of the profile the estimate was read from.
  double core_begin;
  double core_end;
};

// Initial guess for the dominant pulse of the smoothed residual.
Estimate initial_estimate(std::span<const double> t, std::span<const double> s, std::size_t peak,
                          Bracket b, double alpha) {
  const auto [t_mode, v_max] = interpolate_peak(t, s, peak);
  const double level = alpha * v_max;
  const auto l = left_crossing(t, s, peak, b.lo, level);
  const auto r = right_crossing(t, s, peak, b.hi, level);
  if (l && r) {
    if (auto c = try_three_point(*l, t_mode, *r, v_max, alpha)) return {*c, *l, *r};
  }

  // A neighbouring pulse hides a crossing: read both sides higher up.
  const double occluding = std::max(s[b.lo], s[b.hi]) / v_max;
  const double raised = std::max(alpha, occluding) + 0.05;
  if (raised < kMaxRaisedAlpha) {
    const auto l2 = left_crossing(t, s, peak, b.lo, raised * v_max);
    const auto r2 = right_crossing(t, s, peak, b.hi, raised * v_max);
    if (l2 && r2) {
      if (auto c = try_three_point(*l2, t_mode, *r2, v_max, raised)) return {*c, *l2, *r2};
    }
  }

  if (auto inf = inflections(t, s, peak, b)) {
    try {
      auto c = inflection_estimate(inf->first, t_mode, inf->second, v_max);
      if (plausible_estimate(c)) return {c, inf->first, inf->second};
    } catch (const NumericError&) {
    }
  }

  // Last resort: assume a typical dispersion and size the pulse from
  // whichever crossing is visible.
  const double sigma = kDefaultSigma;
  const double sb = sigma * beta_for(alpha);
  double m = 0.15;
  if (l) {
    m = (t_mode - *l) / -std::expm1(-sb);
  } else if (r) {
    m = (*r - t_mode) / std::expm1(sb);
  }
  m = std::max(m, 1e-3);
  LognormalComponent c;
  c.t0 = t_mode - m;
  c.sigma = sigma;
  c.mu = std::log(m) + sigma * sigma;
  c.D = amplitude_from_peak(v_max, c.mu, sigma);
  return {c, t_mode + m * std::expm1(-sb), t_mode + m * std::expm1(sb)};
}

// Refinement coordinates: mode time, log D, log of the pulse width
// sigma * (t_mode - t0), and a logistic image of sigma. Mode, size, width
// and skew are nearly orthogonal, which avoids the curved t0/mu/sigma
// valley, and the sigma bounds keep the fit away from the Gaussian limit.
constexpr double kSigmaLow = 0.02;
constexpr double kSigmaHigh = 1.5;

double to_logit(double v, double lo, double hi) {
  const double u = std::clamp((v - lo) / (hi - lo), 1e-9, 1.0 - 1e-9);
  return std::log(u / (1.0 - u));
}

double from_logit(double x, double lo, double hi) {
  return lo + (hi - lo) / (1.0 + std::exp(-x));
}

Eigen::Vector4d to_params(const LognormalComponent& c) {
  const double log_lead = c.mu - c.sigma * c.sigma;
  return {c.t0 + std::exp(log_lead), std::log(c.D), log_lead + std::log(c.sigma),
          to_logit(c.sigma, kSigmaLow, kSigmaHigh)};
}

template <typename Vec>
LognormalComponent from_params(const Vec& p, Eigen::Index offset = 0) {
  const double sigma = from_logit(p[offset + 3], kSigmaLow, kSigmaHigh);
  const double log_lead = p[offset + 2] - std::log(sigma);
  return {p[offset] - std::exp(log_lead), std::exp(p[offset + 1]), log_lead + sigma * sigma,
          sigma};
}

// Sample range [first, last) where the pulse is numerically non-zero:
// log-time within six sigma of mu, where it falls below 1e-7 of its peak.
constexpr double kSupportSigmas = 6.0;

std::pair<std::size_t, std::size_t> support(const LognormalComponent& c,
                                            std::span<const double> t) {
  const double begin = c.t0 + std::exp(std::max(c.mu - kSupportSigmas * c.sigma, -50.0));
  const double end = c.t0 + std::exp(std::min(c.mu + kSupportSigmas * c.sigma, 50.0));
  const auto first = std::lower_bound(t.begin(), t.end(), begin) - t.begin();
  const auto last = std::upper_bound(t.begin(), t.end(), end) - t.begin();
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(std::max(first, last))};
}

void accumulate_pulse(const LognormalComponent& c, std::span<const double> t, double scale,
                      Eigen::Ref<Eigen::VectorXd> out) {
  const auto [first, last] = support(c, t);
  for (std::size_t k = first; k < last; ++k) {
    out[static_cast<Eigen::Index>(k)] += scale * lognormal_speed(c, t[k]);
  }
}

std::size_t index_at(std::span<const double> t, double x) {
  return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
}

// Samples a pulse may reach while it is being refined: its current support
// widened by one onset-to-mode distance on each side.
std::pair<std::size_t, std::size_t> reach(const LognormalComponent& c,
                                          std::span<const double> t) {
  const double lead = std::exp(c.mu - c.sigma * c.sigma);
  const double end = c.t0 + std::exp(std::min(c.mu + kSupportSigmas * c.sigma, 50.0)) + lead;
  return {index_at(t, c.t0 - lead), std::min(t.size(), index_at(t, end) + 1)};
}

// Least-squares polish of one pulse. Inside [lo, hi] the pulse is matched
// to the residual; elsewhere only overshoot above the residual is penalized,
// which keeps long tails from claiming energy that belongs to other pulses.
LognormalComponent refine_component(const LognormalComponent& start, std::span<const double> t,
                                    std::span<const double> target, std::size_t lo,
                                    std::size_t hi) {
  if (hi < lo + 3) return start;
  auto [first, last] = reach(start, t);
  first = std::min(first, lo);
  last = std::max(last, std::min(hi + 1, t.size()));
  const auto m = static_cast<Eigen::Index>(last - first);
  const auto residual_fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const LognormalComponent c = from_params(p);
    for (std::size_t k = first; k < last; ++k) {
      const double e = lognormal_speed(c, t[k]) - target[k];
      r[static_cast<Eigen::Index>(k - first)] = (k >= lo && k <= hi) ? e : std::max(e, 0.0);
    }
  };
  optim::TrustRegionOptions opts;
  opts.max_iterations = 200;
  opts.relative_step_tolerance = 1e-6;
  const auto res =
      optim::minimize_least_squares(residual_fn, Eigen::VectorXd(to_params(start)), m, opts);
  const LognormalComponent refined = from_params(res.params);
  return plausible(refined) ? refined : start;
}

// Simultaneous least-squares polish of the pulses flagged in `free` against
// the observation; the others stay fixed. Residuals are only formed over
// the samples the free pulses can reach.
std::vector<LognormalComponent> refine_jointly(const std::vector<LognormalComponent>& start,
                                               const std::vector<bool>& free,
                                               std::span<const double> t,
                                               std::span<const double> observed) {
  std::vector<std::size_t> active;
  std::size_t first = t.size();
  std::size_t last = 0;
  for (std::size_t q = 0; q < start.size(); ++q) {
    if (!free[q]) continue;
    active.push_back(q);
    const auto [a, b] = reach(start[q], t);
    first = std::min(first, a);
    last = std::max(last, b);
  }
  if (active.empty() || last <= first) return start;
  const auto m = static_cast<Eigen::Index>(last - first);
  const std::span<const double> tw = t.subspan(first, last - first);

  // Observation minus the fixed pulses over the window.
  Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(observed.data() + first, m);
  for (std::size_t q = 0; q < start.size(); ++q) {
    if (!free[q]) accumulate_pulse(start[q], tw, -1.0, target);
  }

  const auto count = static_cast<Eigen::Index>(active.size());
  Eigen::VectorXd p0(4 * count);
  for (Eigen::Index a = 0; a < count; ++a) p0.segment<4>(4 * a) = to_params(start[active[a]]);

  const auto residual_fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r = -target;
    for (Eigen::Index a = 0; a < count; ++a) accumulate_pulse(from_params(p, 4 * a), tw, 1.0, r);
  };
  // Each pulse only touches its own support, so a difference column costs
  // one pulse evaluation rather than a full reconstruction.
  constexpr double kStep = 1e-7;
  Eigen::VectorXd column(m);
  Eigen::VectorXd base(m);
  const auto jacobian_fn = [&](const Eigen::VectorXd& p, const Eigen::VectorXd&,
                               Eigen::MatrixXd& jac) {
    Eigen::VectorXd probe = p;
    for (Eigen::Index a = 0; a < count; ++a) {
      base.setZero();
      accumulate_pulse(from_params(p, 4 * a), tw, 1.0, base);
      for (Eigen::Index j = 4 * a; j < 4 * a + 4; ++j) {
        const double h = kStep * std::max(std::abs(p[j]), 1e-3);
        probe[j] = p[j] + h;
        column = -base;
        accumulate_pulse(from_params(probe, 4 * a), tw, 1.0, column);
        jac.col(j) = column / h;
        probe[j] = p[j];
      }
    }
  };
  optim::TrustRegionOptions opts;
  opts.max_iterations = 200;
  opts.relative_cost_tolerance = 1e-6;
  opts.relative_step_tolerance = 1e-6;
  const auto res = optim::minimize_least_squares(residual_fn, jacobian_fn, p0, m, opts);
  std::vector<LognormalComponent> out = start;
  for (Eigen::Index a = 0; a < count; ++a) {
    const auto c = from_params(res.params, 4 * a);
    if (!plausible(c)) return start;
    out[active[a]] = c;
  }
  return out;
}

// Pulses whose central mass (log-time within one sigma of mu) overlaps
// that of `anchor`, including the anchor.
std::vector<bool> neighbours(const std::vector<LognormalComponent>& set, std::size_t anchor) {
  const auto span_of = [](const LognormalComponent& c) {
    return std::pair{c.t0 + std::exp(c.mu - c.sigma), c.t0 + std::exp(c.mu + c.sigma)};
  };
  const auto [a0, a1] = span_of(set[anchor]);
  std::vector<bool> out(set.size(), false);
  for (std::size_t q = 0; q < set.size(); ++q) {
    const auto [b0, b1] = span_of(set[q]);
    out[q] = b0 < a1 && a0 < b1;
  }
  return out;
}

std::pair<std::size_t, std::size_t> core_window(std::span<const double> t, const Estimate& e,
                                                Bracket b) {
  auto lo = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), e.core_begin) - t.begin());
  auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), e.core_end) - t.begin());
  lo = std::max(b.lo, lo > 0 ? lo - 1 : 0);
  hi = std::min(b.hi, hi);
  if (hi < lo) std::swap(lo, hi);
  while (hi - lo < 6 && (lo > b.lo || hi < b.hi)) {
    if (lo > b.lo) --lo;
    if (hi < b.hi) ++hi;
  }
  return {lo, hi};
}

double energy(std::span<const double> v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

}  // namespace

double LognormalComponent::mode_time() const { return t0 + std::exp(mu - sigma * sigma); }

double LognormalComponent::peak_speed() const {
  return D / (sigma * kSqrt2Pi) * std::exp(-mu + 0.5 * sigma * sigma);
}

void FitConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
  if (!(snr_target_db > 0.0)) throw ConfigError("snr_target_db must be positive");
  if (max_components < 1) throw ConfigError("max_components must be >= 1");
  if (!(smoothing_sigma > 0.0)) throw ConfigError("smoothing sigma must be positive");
  if (!(min_gain_db >= 0.0)) throw ConfigError("min_gain_db must be non-negative");
}

double lognormal_speed(const LognormalComponent& c, double t) {
  const double dt = t - c.t0;
  if (!(dt > 0.0)) return 0.0;
  const double log_dt = std::log(dt);
  const double z = (log_dt - c.mu) / c.sigma;
  return c.D / (c.sigma * kSqrt2Pi) * std::exp(-0.5 * z * z - log_dt);
}

LognormalComponent three_point_estimate(double t_left, double t_mode, double t_right,
                                        double v_max, double alpha) {
  if (!(t_left < t_mode && t_mode < t_right) || !(v_max > 0.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw NumericError("degenerate characteristic points");
  }
  const double denom = 2.0 * t_mode - t_left - t_right;
  if (std::abs(denom) <= 1e-12 * (t_right - t_left)) {
    throw NumericError("degenerate characteristic points");
  }
  LognormalComponent c;
  c.t0 = (t_mode * t_mode - t_left * t_right) / denom;
  if (!(c.t0 < t_left)) throw NumericError("degenerate characteristic points");
  c.sigma = std::log((t_right - c.t0) / (t_mode - c.t0)) / beta_for(alpha);
  c.mu = std::log(t_mode - c.t0) + c.sigma * c.sigma;
  c.D = amplitude_from_peak(v_max, c.mu, c.sigma);
  return c;
}

LognormalComponent inflection_estimate(double t_inflection_left, double t_mode,
                                       double t_inflection_right, double v_max) {
  if (!(t_inflection_left < t_mode && t_mode < t_inflection_right) || !(v_max > 0.0)) {
    throw NumericError("degenerate characteristic points");
  }
  // Log-time distances from the mode to each inflection.
  auto left_gap = [](double s) { return 0.5 * (s * s + s * std::sqrt(s * s + 4.0)); };
  auto right_gap = [](double s) { return 0.5 * (-s * s + s * std::sqrt(s * s + 4.0)); };
  auto ratio = [&](double s) {
    return std::expm1(right_gap(s)) / -std::expm1(-left_gap(s));
  };
  const double target = (t_inflection_right - t_mode) / (t_mode - t_inflection_left);
  double lo = kMinSigma;
  double hi = kMaxSigma;
  if (!(target > ratio(lo) && target < ratio(hi))) {
    throw NumericError("degenerate characteristic points");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < target ? lo : hi) = mid;
  }
  const double sigma = 0.5 * (lo + hi);
  const double m = (t_mode - t_inflection_left) / -std::expm1(-left_gap(sigma));
  LognormalComponent c;
  c.t0 = t_mode - m;
  c.sigma = sigma;
  c.mu = std::log(m) + sigma * sigma;
  c.D = amplitude_from_peak(v_max, c.mu, sigma);
  return c;
}

CharacteristicTimes characteristic_times(const LognormalComponent& c, double alpha) {
  const double u_mode = c.mu - c.sigma * c.sigma;
  const double sb = c.sigma * beta_for(alpha);
  const double spread = 0.5 * c.sigma * std::sqrt(c.sigma * c.sigma + 4.0);
  const double u_inf = c.mu - 1.5 * c.sigma * c.sigma;
  return {c.t0 + std::exp(u_mode - sb), c.t0 + std::exp(u_mode), c.t0 + std::exp(u_mode + sb),
          c.t0 + std::exp(u_inf - spread), c.t0 + std::exp(u_inf + spread)};
}

std::vector<double> synthesize(std::span<const LognormalComponent> components,
                               std::span<const double> t_grid) {
  std::vector<double> out(t_grid.size(), 0.0);
  for (const auto& c : components) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) out[i] += lognormal_speed(c, t_grid[i]);
  }
  return out;
}

double snr_db(std::span<const double> observed, std::span<const double> reconstructed) {
  if (observed.size() != reconstructed.size()) throw NumericError("snr_db: length mismatch");
  if (observed.empty()) throw NumericError("snr_db: empty input");
  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    signal += observed[i] * observed[i];
    const double e = observed[i] - reconstructed[i];
    noise += e * e;
  }
  if (signal == 0.0) return 0.0;
  if (noise < 1e-20 * signal) return kSnrClampDb;
  return std::min(kSnrClampDb, 10.0 * std::log10(signal / noise));
}

FitResult extract(std::span<const double> t, std::span<const double> speed, const FitConfig& cfg) {
  cfg.validate();
  if (t.size() != speed.size()) throw NumericError("extract: length mismatch");
  if (t.size() < 8 || !(t.back() - t.front() > 0.010)) {
    throw NumericError("stroke too short to fit");
  }
  const std::size_t n = t.size();
  // Work relative to the first sample for conditioning; shifted back on exit.
  const double t_ref = t.front();
  std::vector<double> tau(n);
  for (std::size_t i = 0; i < n; ++i) tau[i] = t[i] - t_ref;

  std::vector<double> observed(speed.begin(), speed.end());
  if (cfg.snr_reference == SnrReference::smoothed) {
    observed = kinematics::smooth(observed, cfg.smoothing_sigma);
  }

  FitResult result;
  if (energy(observed) == 0.0) return result;

  std::vector<double> residual = observed;
  std::vector<double> reconstruction(n, 0.0);
  std::vector<double> trial(n);
  std::vector<double> joint_trial(n);
  const auto score = [&](const std::vector<LognormalComponent>& set, std::span<const double> obs,
                         std::vector<double>& model) {
    std::fill(model.begin(), model.end(), 0.0);
    Eigen::Map<Eigen::VectorXd> view(model.data(), static_cast<Eigen::Index>(n));
    for (const auto& q : set) accumulate_pulse(q, tau, 1.0, view);
    return snr_db(obs, model);
  };
  double snr = snr_db(observed, reconstruction);
  const double global_peak = *std::max_element(observed.begin(), observed.end());
  auto& components = result.components;

  while (static_cast<int>(components.size()) < cfg.max_components && snr < cfg.snr_target_db) {
    const auto smoothed = kinematics::smooth(residual, cfg.smoothing_sigma);
    const std::size_t peak = argmax(smoothed);
    const double v_peak = smoothed[peak];
    if (!(v_peak > 1e-12 * global_peak)) break;

    const Bracket b = bracket_peak(smoothed, peak, kBracketHysteresis * v_peak);
    const Estimate estimate = initial_estimate(tau, smoothed, peak, b, cfg.alpha);
    LognormalComponent c = estimate.component;
    if (cfg.refine) {
      const auto [lo, hi] = core_window(tau, estimate, b);
      const auto refined = refine_component(c, tau, residual, lo, hi);
      if (anchored(refined, tau.front(), tau.back())) c = refined;
    }

    std::vector<LognormalComponent> candidate = components;
    candidate.push_back(c);
    double trial_snr = score(candidate, observed, trial);
    if (cfg.refine && candidate.size() > 1) {
      auto joint = refine_jointly(candidate, neighbours(candidate, candidate.size() - 1),
                                  tau, observed);
      const double joint_snr = score(joint, observed, joint_trial);
      if (joint_snr > trial_snr && all_anchored(joint, tau.front(), tau.back())) {
        candidate = std::move(joint);
        trial_snr = joint_snr;
        trial.swap(joint_trial);
      }
    }
    if (trial_snr - snr < cfg.min_gain_db) break;

    components = std::move(candidate);
    reconstruction.swap(trial);
    snr = trial_snr;
    // Pulses squeezed to nothing by the joint polish carry no information.
    std::erase_if(components, [&](const LognormalComponent& q) {
      return !(q.peak_speed() > kNegligiblePeak * global_peak);
    });
    snr = score(components, observed, reconstruction);
    // The residual tracks the observation minus the model, floored so that
    // over-subtraction cannot dig holes that mask later pulses.
    const double floor = -kResidualFloor * v_peak;
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = std::max(observed[i] - reconstruction[i], floor);
    }
  }

  for (auto& c : result.components) c.t0 += t_ref;
  std::stable_sort(result.components.begin(), result.components.end(),
                   [](const auto& a, const auto& b) { return a.t0 < b.t0; });
  result.snr_db = snr;
  result.n_components = static_cast<int>(result.components.size());
  result.snr_over_c = snr / std::max(result.n_components, 1);
  return result;
}

FitResult extract(const kinematics::KinematicSeries& speed, const FitConfig& cfg) {
  return extract(std::span<const double>(speed.t), std::span<const double>(speed.speed), cfg);
}

}  // namespace hwdyn::lognorm
