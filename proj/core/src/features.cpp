#include "hwdyn/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwdyn/error.hpp"
#include "hwdyn/kinematics.hpp"

namespace hwdyn::features {
namespace {

const std::vector<std::string> kBasicNames = {
    "speed_mean",  "speed_std",  "pressure_mean", "pressure_std",
    "tilt_x_mean", "tilt_x_std", "tilt_y_mean",   "tilt_y_std"};

const std::vector<std::string> kEntropyNames = {
    "accel_mean",  "accel_std",  "accel_hnorm",  "pressure_mean", "pressure_std", "pressure_hnorm",
    "tilt_x_mean", "tilt_x_std", "tilt_x_hnorm", "tilt_y_mean",   "tilt_y_std",   "tilt_y_hnorm"};

const std::vector<std::string> kSiglogNames = {
    "C_mean",     "C_std",     "SNR_mean", "SNR_std", "SNR_per_C_mean", "SNR_per_C_std",
    "D_mean",     "D_std",     "t0_mean",  "t0_std",  "mu_mean",        "mu_std",
    "sigma_mean", "sigma_std"};

double lookup(const std::vector<std::string>& names, const std::vector<double>& values,
              std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown feature '" + std::string(name) + "'");
  return values[static_cast<std::size_t>(it - names.begin())];
}

ink::Stroke prepared(const ink::Stroke& stroke, double rate) {
  return kinematics::regularize(stroke, rate);
}

void append_mean_std(DrillFeatures& out, std::span<const double> v) {
  const auto [m, s] = mean_std(v);
  out.values.push_back(m);
  out.values.push_back(s);
}

// Raw per-sample channels of every stroke, pooled.
struct Channels {
  std::vector<double> pressure, tilt_x, tilt_y;
};

void pool_channels(const ink::Stroke& s, Channels& c) {
  for (const auto& p : s.samples) {
    c.pressure.push_back(p.pressure);
    c.tilt_x.push_back(p.tilt_x);
    c.tilt_y.push_back(p.tilt_y);
  }
}

std::vector<double> drill_accel(const ink::Drill& drill, double rate) {
  std::vector<double> accel;
  for (const auto& raw : drill.strokes) {
    if (raw.samples.size() < 3) continue;
    const auto series = kinematics::accel_profile(kinematics::speed_profile(prepared(raw, rate)));
    accel.insert(accel.end(), series.accel.begin(), series.accel.end());
  }
  return accel;
}

std::pair<double, double> extent(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::basic: return "basic";
    case Family::entropy: return "entropy";
    case Family::siglog: return "siglog";
  }
  return "basic";
}

Family parse_family(const std::string& s) {
  if (s == "basic") return Family::basic;
  if (s == "entropy") return Family::entropy;
  if (s == "siglog") return Family::siglog;
  throw ConfigError("unknown feature family '" + s + "' (expected basic, entropy or siglog)");
}

std::string to_string(SnrAggregation a) {
  return a == SnrAggregation::per_stroke ? "per-stroke" : "pooled";
}

std::string to_string(EntropyBinning b) {
  return b == EntropyBinning::per_drill ? "per-drill" : "per-cohort";
}

SnrAggregation parse_snr_aggregation(const std::string& s) {
  if (s == "per-stroke") return SnrAggregation::per_stroke;
  if (s == "pooled") return SnrAggregation::pooled;
  throw ConfigError("unknown snr-aggregation '" + s + "' (expected per-stroke or pooled)");
}

EntropyBinning parse_entropy_binning(const std::string& s) {
  if (s == "per-drill") return EntropyBinning::per_drill;
  if (s == "per-cohort") return EntropyBinning::per_cohort;
  throw ConfigError("unknown entropy-binning '" + s + "' (expected per-drill or per-cohort)");
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) throw NumericError("mean_std: empty input");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

EntropyHistogram entropy_histogram(std::span<const double> values, int n_bins, double lo,
                                   double hi) {
  if (values.empty()) throw NumericError("normalized_entropy: empty input");
  if (n_bins < 2) throw ConfigError("normalized_entropy: n_bins must be >= 2");
  EntropyHistogram h;
  h.n_bins = n_bins;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  const double width = hi - lo;
  for (double v : values) {
    std::size_t bin = 0;
    if (width > 0.0) {
      const double pos = std::floor((v - lo) / width * n_bins);
      bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(n_bins - 1)));
    }
    ++h.counts[bin];
  }
  const auto total = static_cast<double>(values.size());
  double entropy = 0.0;
  h.probabilities.resize(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double p = static_cast<double>(h.counts[i]) / total;
    h.probabilities[i] = p;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  h.h_norm = std::clamp(entropy / std::log(static_cast<double>(n_bins)), 0.0, 1.0);
  return h;
}

EntropyHistogram entropy_histogram(std::span<const double> values, int n_bins) {
  if (values.empty()) throw NumericError("normalized_entropy: empty input");
  const auto [lo, hi] = extent(values);
  return entropy_histogram(values, n_bins, lo, hi);
}

double normalized_entropy(std::span<const double> values, int n_bins) {
  return entropy_histogram(values, n_bins).h_norm;
}

double normalized_entropy(std::span<const double> values, int n_bins, double lo, double hi) {
  return entropy_histogram(values, n_bins, lo, hi).h_norm;
}

double DrillFeatures::at(std::string_view name) const { return lookup(names, values, name); }
double FeatureVector::at(std::string_view name) const { return lookup(names, values, name); }

const std::vector<std::string>& drill_feature_names(Family f) {
  switch (f) {
    case Family::basic: return kBasicNames;
    case Family::entropy: return kEntropyNames;
    case Family::siglog: return kSiglogNames;
  }
  return kBasicNames;
}

std::vector<std::string> student_feature_names(Family f) {
  const auto& drill = drill_feature_names(f);
  if (f == Family::siglog) return drill;
  std::vector<std::string> out;
  out.reserve(2 * drill.size());
  for (const auto& n : drill) {
    out.push_back(n + ".mean");
    out.push_back(n + ".std");
  }
  return out;
}

DrillFeatures basic_drill_features(const ink::Drill& drill, double nominal_rate_hz) {
  std::vector<double> speed;
  Channels ch;
  for (const auto& raw : drill.strokes) {
    const ink::Stroke s = prepared(raw, nominal_rate_hz);
    if (s.samples.size() >= 2) {
      const auto series = kinematics::speed_profile(s);
      speed.insert(speed.end(), series.speed.begin(), series.speed.end());
    }
    pool_channels(s, ch);
  }
  if (speed.empty()) throw DataError("drill '" + drill.drill_id + "': no speed samples");
  DrillFeatures out{Family::basic, kBasicNames, {}};
  append_mean_std(out, speed);
  append_mean_std(out, ch.pressure);
  append_mean_std(out, ch.tilt_x);
  append_mean_std(out, ch.tilt_y);
  return out;
}

DrillFeatures entropy_drill_features(const ink::Drill& drill, int n_bins,
                                     const std::optional<ChannelRanges>& ranges,
                                     double nominal_rate_hz) {
  const std::vector<double> accel = drill_accel(drill, nominal_rate_hz);
  if (accel.empty()) throw DataError("drill '" + drill.drill_id + "': no acceleration samples");
  Channels ch;
  for (const auto& raw : drill.strokes) pool_channels(prepared(raw, nominal_rate_hz), ch);

  DrillFeatures out{Family::entropy, kEntropyNames, {}};
  const std::array<const std::vector<double>*, 4> channels = {&accel, &ch.pressure, &ch.tilt_x,
                                                              &ch.tilt_y};
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const auto& v = *channels[k];
    append_mean_std(out, v);
    const auto [lo, hi] = ranges ? ranges->bounds[k] : extent(v);
    out.values.push_back(normalized_entropy(v, n_bins, lo, hi));
  }
  return out;
}

ChannelRanges cohort_channel_ranges(const ink::Cohort& cohort) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  ChannelRanges r;
  r.bounds.fill({inf, -inf});
  const auto widen = [](std::pair<double, double>& b, double v) {
    b.first = std::min(b.first, v);
    b.second = std::max(b.second, v);
  };
  for (const auto& st : cohort.students) {
    for (const auto& d : st.drills) {
      for (double a : drill_accel(d, cohort.sample_rate_hz)) widen(r.bounds[0], a);
      for (const auto& raw : d.strokes) {
        for (const auto& p : prepared(raw, cohort.sample_rate_hz).samples) {
          widen(r.bounds[1], p.pressure);
          widen(r.bounds[2], p.tilt_x);
          widen(r.bounds[3], p.tilt_y);
        }
      }
    }
  }
  for (auto& b : r.bounds) {
    if (b.first > b.second) b = {0.0, 0.0};
  }
  return r;
}

std::optional<StrokeFit> fit_stroke(const ink::Stroke& stroke, std::size_t stroke_index,
                                    const lognorm::FitConfig& cfg, double nominal_rate_hz) {
  const ink::Stroke s = prepared(stroke, nominal_rate_hz);
  const auto series = kinematics::speed_profile(s);
  if (series.size() < 8 || !(series.t.back() - series.t.front() > 0.010)) return std::nullopt;
  StrokeFit f;
  f.stroke_index = stroke_index;
  f.t_start = s.samples.front().t;
  f.fit = lognorm::extract(series, cfg);
  std::vector<double> observed = series.speed;
  if (cfg.snr_reference == lognorm::SnrReference::smoothed) {
    observed = kinematics::smooth(observed, cfg.smoothing_sigma);
  }
  const auto model = lognorm::synthesize(f.fit.components, series.t);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    f.signal_energy += observed[i] * observed[i];
    f.residual_energy += (observed[i] - model[i]) * (observed[i] - model[i]);
  }
  return f;
}

std::vector<StrokeFit> fit_drill(const ink::Drill& drill, const lognorm::FitConfig& cfg,
                                 double nominal_rate_hz) {
  std::vector<StrokeFit> out;
  for (std::size_t k = 0; k < drill.strokes.size(); ++k) {
    if (auto f = fit_stroke(drill.strokes[k], k, cfg, nominal_rate_hz)) out.push_back(std::move(*f));
  }
  return out;
}

DrillFeatures siglog_drill_features(std::span<const StrokeFit> fits, SnrAggregation aggregation) {
  if (fits.empty()) throw DataError("no fittable strokes");
  std::vector<double> c, snr, snr_c, d, t0, mu, sigma;
  double signal = 0.0;
  double residual = 0.0;
  for (const auto& f : fits) {
    c.push_back(f.fit.n_components);
    snr.push_back(f.fit.snr_db);
    snr_c.push_back(f.fit.snr_db / std::max(f.fit.n_components, 1));
    signal += f.signal_energy;
    residual += f.residual_energy;
    for (const auto& q : f.fit.components) {
      d.push_back(q.D);
      t0.push_back(q.t0 - f.t_start);
      mu.push_back(q.mu);
      sigma.push_back(q.sigma);
    }
  }
  DrillFeatures out{Family::siglog, kSiglogNames, {}};
  append_mean_std(out, c);
  append_mean_std(out, snr);
  if (aggregation == SnrAggregation::pooled) {
    out.values[2] = signal == 0.0 ? 0.0
                                  : (residual < 1e-20 * signal
                                         ? lognorm::kSnrClampDb
                                         : std::min(lognorm::kSnrClampDb,
                                                    10.0 * std::log10(signal / residual)));
  }
  append_mean_std(out, snr_c);
  // A drill where no stroke needed a pulse has no component statistics.
  for (const auto* v : {&d, &t0, &mu, &sigma}) {
    if (v->empty()) {
      out.values.push_back(0.0);
      out.values.push_back(0.0);
    } else {
      append_mean_std(out, *v);
    }
  }
  return out;
}

DrillFeatures siglog_drill_features(const ink::Drill& drill, const lognorm::FitConfig& cfg,
                                    SnrAggregation aggregation, double nominal_rate_hz) {
  const auto fits = fit_drill(drill, cfg, nominal_rate_hz);
  if (fits.empty()) throw DataError("drill '" + drill.drill_id + "': no fittable strokes");
  return siglog_drill_features(fits, aggregation);
}

FeatureVector aggregate_student(std::span<const DrillFeatures> drills, Family family,
                                const std::string& student_id) {
  if (drills.empty()) throw ConfigError("aggregate_student: no drill features");
  const auto& names = drill_feature_names(family);
  for (const auto& d : drills) {
    if (d.family != family || d.values.size() != names.size()) {
      throw ConfigError("aggregate_student: drill features of family '" + to_string(d.family) +
                        "' cannot be aggregated as '" + to_string(family) + "'");
    }
  }
  FeatureVector out{student_id, family, student_feature_names(family), {}};
  std::vector<double> column(drills.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    for (std::size_t i = 0; i < drills.size(); ++i) column[i] = drills[i].values[j];
    const auto [m, s] = mean_std(column);
    out.values.push_back(m);
    if (family != Family::siglog) out.values.push_back(s);
  }
  return out;
}

}  // namespace hwdyn::features
