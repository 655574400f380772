#include "hwdyn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hwdyn/error.hpp"
#include "hwdyn/kinematics.hpp"
#include "hwdyn/parallel.hpp"

namespace hwdyn::synth {
namespace {

using lognorm::LognormalComponent;
using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(Rng& rng, double mean, double sd) {
  return sd > 0.0 ? std::normal_distribution<double>(mean, sd)(rng) : mean;
}

struct StudentTraits {
  double sigma_scale = 1.0;
  double amplitude_scale = 1.0;
};

// Pulses of one stroke with the first onset at t = 0 (callers shift).
std::vector<LognormalComponent> draw_components(const GradeProfile& g, const StudentTraits& traits,
                                                Rng& rng) {
  const int count = std::clamp(
      static_cast<int>(std::lround(normal(rng, g.components_mean, g.components_sd))), 1, 20);
  std::vector<LognormalComponent> out;
  out.reserve(static_cast<std::size_t>(count));
  double mode = 0.0;
  for (int k = 0; k < count; ++k) {
    LognormalComponent c;
    c.sigma = std::max(0.05, uniform(rng, g.sigma_min, g.sigma_max) * traits.sigma_scale);
    c.mu = uniform(rng, g.mu_min, g.mu_max);
    c.D = uniform(rng, g.amplitude_min, g.amplitude_max) * traits.amplitude_scale;
    const double rise = std::exp(c.mu - c.sigma * c.sigma);
    mode = k == 0 ? rise : mode + uniform(rng, g.gap_min, g.gap_max);
    c.t0 = mode - rise;
    out.push_back(c);
  }
  const double first = std::min_element(out.begin(), out.end(), [](const auto& a, const auto& b) {
                         return a.t0 < b.t0;
                       })->t0;
  for (auto& c : out) c.t0 -= first;
  return out;
}

double stroke_end(std::span<const LognormalComponent> components) {
  double end = 0.0;
  for (const auto& c : components) end = std::max(end, c.t0 + std::exp(c.mu + 2.5 * c.sigma));
  return end;
}

double ar_step(const ChannelProcess& p, double mean, double previous, Rng& rng) {
  return mean + p.ar_coeff * (previous - mean) + normal(rng, 0.0, p.innovation_sd);
}

GradeProfile interpolate_grade(int grade) {
  const double f = static_cast<double>(grade - 1) / 8.0;
  GradeProfile g;
  g.components_mean = 8.0 - 5.0 * f;
  g.components_sd = 0.8;
  g.sigma_min = 0.20 - 0.05 * f;
  g.sigma_max = 0.45 - 0.15 * f;
  g.mu_min = -2.4;
  g.mu_max = -1.7;
  g.gap_min = 0.06;
  g.gap_max = 0.14;
  g.amplitude_min = 1.5;
  g.amplitude_max = 6.0;
  g.noise_amp = 0.036 - 0.018 * f;
  return g;
}

std::string zero_padded(int value, int width) {
  std::string s = std::to_string(value);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

nlohmann::json component_json(const LognormalComponent& c) {
  return {{"t0", c.t0}, {"D", c.D}, {"mu", c.mu}, {"sigma", c.sigma}};
}

}  // namespace

std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

MaturationProfile MaturationProfile::defaults() {
  MaturationProfile p;
  for (int g = 1; g <= 9; ++g) p.grades[static_cast<std::size_t>(g - 1)] = interpolate_grade(g);
  return p;
}

MaturationProfile MaturationProfile::without_label_effects() {
  MaturationProfile p = defaults();
  p.gender_pressure_shift = 0.0;
  p.performance_sigma_shift = 0.0;
  p.performance_perfect_shift = 0.0;
  return p;
}

void MaturationProfile::validate() const {
  for (std::size_t i = 0; i < grades.size(); ++i) {
    const auto& g = grades[i];
    const std::string ctx = "grade " + std::to_string(i + 1) + ": ";
    if (!(g.components_mean >= 1.0) || !(g.components_sd >= 0.0)) {
      throw ConfigError(ctx + "invalid components-per-stroke distribution");
    }
    if (!(g.sigma_min > 0.0 && g.sigma_min <= g.sigma_max)) throw ConfigError(ctx + "invalid sigma range");
    if (!(g.mu_min <= g.mu_max)) throw ConfigError(ctx + "invalid mu range");
    if (!(g.gap_min > 0.0 && g.gap_min <= g.gap_max)) throw ConfigError(ctx + "invalid gap range");
    if (!(g.amplitude_min > 0.0 && g.amplitude_min <= g.amplitude_max)) {
      throw ConfigError(ctx + "invalid amplitude range");
    }
    if (!(g.noise_amp >= 0.0)) throw ConfigError(ctx + "negative noise amplitude");
  }
  for (const auto* c : {&pressure, &tilt_x, &tilt_y}) {
    if (!(std::abs(c->ar_coeff) < 1.0) || !(c->innovation_sd >= 0.0) || !(c->student_sd >= 0.0)) {
      throw ConfigError("invalid channel process");
    }
  }
  if (!(noise_bandwidth > 0.0) || !(noise_scale >= 0.0) || !(sample_rate_hz > 0.0)) {
    throw ConfigError("invalid noise or sampling parameters");
  }
  if (strokes_per_drill_min < 1 || strokes_per_drill_max < strokes_per_drill_min) {
    throw ConfigError("invalid strokes-per-drill range");
  }
  if (!(pen_up_gap >= 0.0)) throw ConfigError("negative pen-up gap");
  if (!(female_fraction >= 0.0 && female_fraction <= 1.0) ||
      !(high_performer_fraction >= 0.0 && high_performer_fraction <= 1.0)) {
    throw ConfigError("label fractions must be in [0,1]");
  }
  if (!(std::abs(performance_perfect_shift) <= 0.45) || !(std::abs(performance_sigma_shift) < 1.0)) {
    throw ConfigError("performance effect too large");
  }
}

ink::Stroke generate_stroke(std::span<const LognormalComponent> components, double noise_amp,
                            std::uint64_t seed, const StrokeStyle& style) {
  if (components.empty()) throw ConfigError("generate_stroke: empty component list");
  if (!(noise_amp >= 0.0)) throw ConfigError("generate_stroke: negative noise amplitude");
  Rng rng(seed);
  const double dt = 1.0 / style.sample_rate_hz;
  double begin = components[0].t0;
  for (const auto& c : components) begin = std::min(begin, c.t0);
  const double end = stroke_end(components);
  const auto intervals =
      std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil((end - begin) / dt)));

  std::vector<double> mid(intervals);
  for (std::size_t i = 0; i < intervals; ++i) mid[i] = begin + (static_cast<double>(i) + 0.5) * dt;
  std::vector<double> speed = lognorm::synthesize(components, mid);
  const double peak = *std::max_element(speed.begin(), speed.end());

  std::vector<double> angle(components.size());
  for (auto& a : angle) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);

  if (noise_amp > 0.0) {
    std::vector<double> white(intervals);
    for (auto& w : white) w = normal(rng, 0.0, 1.0);
    auto band = kinematics::smooth(white, style.noise_bandwidth);
    double rms = 0.0;
    for (double b : band) rms += b * b;
    rms = std::sqrt(rms / static_cast<double>(band.size()));
    const double gain = rms > 0.0 ? noise_amp * peak / rms : 0.0;
    for (std::size_t i = 0; i < intervals; ++i) speed[i] = std::max(0.0, speed[i] + gain * band[i]);
  }

  ink::Stroke stroke;
  stroke.samples.resize(intervals + 1);
  double x = uniform(rng, 0.0, 100.0);
  double y = uniform(rng, 0.0, 100.0);
  double pressure = style.pressure.mean;
  double tilt_x = style.tilt_x.mean;
  double tilt_y = style.tilt_y.mean;
  for (std::size_t i = 0; i <= intervals; ++i) {
    auto& s = stroke.samples[i];
    s.t = begin + static_cast<double>(i) * dt;
    s.x = x;
    s.y = y;
    s.z = 0.0;
    s.pressure = std::clamp(pressure, 0.01, 1.0);
    s.tilt_x = std::clamp(tilt_x, -90.0, 90.0);
    s.tilt_y = std::clamp(tilt_y, -90.0, 90.0);
    s.tip_width = 0.5 + s.pressure;
    if (i == intervals) break;
    // Direction of the pulse dominating this interval.
    std::size_t dominant = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < components.size(); ++k) {
      const double v = lognorm::lognormal_speed(components[k], mid[i]);
      if (v > best) {
        best = v;
        dominant = k;
      }
    }
    const double step = speed[i] * dt;
    x += step * std::cos(angle[dominant]);
    y += step * std::sin(angle[dominant]);
    pressure = ar_step(style.pressure, style.pressure.mean, pressure, rng);
    tilt_x = ar_step(style.tilt_x, style.tilt_x.mean, tilt_x, rng);
    tilt_y = ar_step(style.tilt_y, style.tilt_y.mean, tilt_y, rng);
  }
  return stroke;
}

std::pair<ink::Cohort, GroundTruth> generate_cohort(const MaturationProfile& profile,
                                                    int n_per_grade, int drills_per_student,
                                                    std::uint64_t seed) {
  profile.validate();
  if (n_per_grade < 2) throw ConfigError("n_per_grade must be >= 2");
  if (drills_per_student < 1) throw ConfigError("drills_per_student must be >= 1");

  const auto n_students = static_cast<std::size_t>(9 * n_per_grade);
  std::vector<ink::StudentRecord> students(n_students);
  std::vector<StudentTruth> labels(n_students);
  std::vector<std::vector<StrokeTruth>> stroke_truth(n_students);

  parallel_for(n_students, [&](std::size_t index) {
    const int grade = static_cast<int>(index) / n_per_grade + 1;
    const int within = static_cast<int>(index) % n_per_grade;
    Rng rng(substream(seed, index));
    const GradeProfile& gp = profile.grades[static_cast<std::size_t>(grade - 1)];

    ink::StudentRecord& st = students[index];
    st.student_id = "g" + std::to_string(grade) + "-s" + zero_padded(within, 3);
    st.grade = grade;
    const bool female = uniform(rng, 0.0, 1.0) < profile.female_fraction;
    const bool high = uniform(rng, 0.0, 1.0) < profile.high_performer_fraction;
    st.gender = female ? ink::Gender::female : ink::Gender::male;
    st.writing_hand = uniform(rng, 0.0, 1.0) < 0.9 ? ink::Hand::right : ink::Hand::left;
    st.dominant_hand = uniform(rng, 0.0, 1.0) < 0.95 ? st.writing_hand
                                                      : (st.writing_hand == ink::Hand::right
                                                             ? ink::Hand::left
                                                             : ink::Hand::right);
    st.age = 6.0 + grade + std::floor(uniform(rng, 0.0, 1.0) * 12.0) / 12.0;
    labels[index] = {st.student_id, grade, female, high};

    StudentTraits traits;
    traits.amplitude_scale = std::exp(normal(rng, 0.0, 0.15));
    traits.sigma_scale =
        std::exp(normal(rng, 0.0, 0.03)) * (high ? 1.0 - profile.performance_sigma_shift : 1.0);

    StrokeStyle style;
    style.sample_rate_hz = profile.sample_rate_hz;
    style.noise_bandwidth = profile.noise_bandwidth;
    style.pressure = profile.pressure;
    style.pressure.mean = std::clamp(normal(rng, profile.pressure.mean, profile.pressure.student_sd) +
                                         (female ? profile.gender_pressure_shift : 0.0),
                                     0.05, 0.95);
    style.tilt_x = profile.tilt_x;
    style.tilt_x.mean = normal(rng, profile.tilt_x.mean, profile.tilt_x.student_sd);
    style.tilt_y = profile.tilt_y;
    style.tilt_y.mean = normal(rng, profile.tilt_y.mean, profile.tilt_y.student_sd);

    const double p_perfect = 0.45 + (high ? 1.0 : -1.0) * profile.performance_perfect_shift;
    const double noise_amp = gp.noise_amp * profile.noise_scale;
    st.drills.resize(static_cast<std::size_t>(drills_per_student));
    for (int d = 0; d < drills_per_student; ++d) {
      ink::Drill& drill = st.drills[static_cast<std::size_t>(d)];
      drill.drill_id = "d" + zero_padded(d, 3);
      drill.n_questions = std::uniform_int_distribution<int>(1, 20)(rng);
      if (uniform(rng, 0.0, 1.0) < p_perfect) {
        drill.n_correct = drill.n_questions;
      } else {
        drill.n_correct = std::uniform_int_distribution<int>(0, drill.n_questions - 1)(rng);
      }
      const int n_strokes = std::uniform_int_distribution<int>(profile.strokes_per_drill_min,
                                                               profile.strokes_per_drill_max)(rng);
      double cursor = 0.1;
      for (int k = 0; k < n_strokes; ++k) {
        auto components = draw_components(gp, traits, rng);
        for (auto& c : components) c.t0 += cursor;
        drill.strokes.push_back(generate_stroke(components, noise_amp, rng(), style));
        cursor = drill.strokes.back().samples.back().t + profile.pen_up_gap +
                 uniform(rng, 0.0, 0.1);
        stroke_truth[index].push_back(
            {st.student_id, drill.drill_id, static_cast<std::size_t>(k), std::move(components), noise_amp});
      }
    }
  });

  ink::Cohort cohort;
  cohort.sample_rate_hz = profile.sample_rate_hz;
  cohort.students = std::move(students);
  GroundTruth truth;
  truth.students = std::move(labels);
  for (auto& v : stroke_truth) {
    for (auto& s : v) truth.strokes.push_back(std::move(s));
  }
  return {std::move(cohort), std::move(truth)};
}

void write_ground_truth(const GroundTruth& truth, std::ostream& out) {
  for (const auto& s : truth.students) {
    out << nlohmann::json{{"student_id", s.student_id},
                          {"grade", s.grade},
                          {"female", s.female},
                          {"high_performer", s.high_performer}}
               .dump()
        << '\n';
  }
  for (const auto& s : truth.strokes) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : s.components) comps.push_back(component_json(c));
    out << nlohmann::json{{"student_id", s.student_id},
                          {"drill_id", s.drill_id},
                          {"stroke_index", s.stroke_index},
                          {"noise_amp", s.noise_amp},
                          {"components", std::move(comps)}}
               .dump()
        << '\n';
  }
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_ground_truth(truth, out);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

GroundTruth read_ground_truth(std::istream& in) {
  GroundTruth truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("components")) {
        StrokeTruth s;
        s.student_id = j.at("student_id").get<std::string>();
        s.drill_id = j.at("drill_id").get<std::string>();
        s.stroke_index = j.at("stroke_index").get<std::size_t>();
        s.noise_amp = j.at("noise_amp").get<double>();
        for (const auto& c : j.at("components")) {
          s.components.push_back({c.at("t0").get<double>(), c.at("D").get<double>(),
                                  c.at("mu").get<double>(), c.at("sigma").get<double>()});
        }
        truth.strokes.push_back(std::move(s));
      } else {
        truth.students.push_back({j.at("student_id").get<std::string>(), j.at("grade").get<int>(),
                                  j.at("female").get<bool>(), j.at("high_performer").get<bool>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("ground truth line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return truth;
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_ground_truth(in);
}

CalibrationResult calibrate_noise(const MaturationProfile& profile, double target_mean_snr_db,
                                  const lognorm::FitConfig& fit, std::uint64_t seed,
                                  int strokes_per_grade, double tolerance_db) {
  profile.validate();
  if (strokes_per_grade < 1) throw ConfigError("strokes_per_grade must be >= 1");

  // The same pulse draws and noise seeds are reused at every scale, so the
  // mean SNR is a smooth decreasing function of the scale.
  struct Draw {
    std::vector<LognormalComponent> components;
    double noise_amp;
    std::uint64_t seed;
  };
  std::vector<Draw> draws;
  Rng rng(seed);
  for (std::size_t g = 0; g < profile.grades.size(); ++g) {
    for (int k = 0; k < strokes_per_grade; ++k) {
      auto comps = draw_components(profile.grades[g], StudentTraits{}, rng);
      for (auto& c : comps) c.t0 += 0.1;
      draws.push_back({std::move(comps), profile.grades[g].noise_amp, rng()});
    }
  }
  StrokeStyle style;
  style.sample_rate_hz = profile.sample_rate_hz;
  style.noise_bandwidth = profile.noise_bandwidth;

  auto mean_snr = [&](double scale) {
    std::vector<double> snr(draws.size());
    parallel_for(draws.size(), [&](std::size_t i) {
      const auto stroke = generate_stroke(draws[i].components, draws[i].noise_amp * scale,
                                          draws[i].seed, style);
      snr[i] = lognorm::extract(kinematics::speed_profile(stroke), fit).snr_db;
    });
    double sum = 0.0;
    for (double v : snr) sum += v;
    return sum / static_cast<double>(snr.size());
  };

  CalibrationResult result;
  double lo = profile.noise_scale > 0.0 ? profile.noise_scale : 1.0;
  double hi = lo;
  double snr_lo = mean_snr(lo);
  double snr_hi = snr_lo;
  ++result.iterations;
  if (std::abs(snr_lo - target_mean_snr_db) <= tolerance_db) return {lo, snr_lo, result.iterations};
  // Bracket the target: lo must give SNR above it, hi below.
  while (snr_lo < target_mean_snr_db && result.iterations < 40) {
    hi = lo;
    snr_hi = snr_lo;
    lo /= 2.0;
    snr_lo = mean_snr(lo);
    ++result.iterations;
  }
  while (snr_hi > target_mean_snr_db && result.iterations < 40) {
    lo = hi;
    snr_lo = snr_hi;
    hi *= 2.0;
    snr_hi = mean_snr(hi);
    ++result.iterations;
  }
  double best = lo;
  double best_snr = snr_lo;
  for (int it = 0; it < 30; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double snr = mean_snr(mid);
    ++result.iterations;
    if (std::abs(snr - target_mean_snr_db) < std::abs(best_snr - target_mean_snr_db)) {
      best = mid;
      best_snr = snr;
    }
    if (std::abs(snr - target_mean_snr_db) <= tolerance_db) break;
    (snr > target_mean_snr_db ? lo : hi) = mid;
  }
  result.noise_scale = best;
  result.mean_snr_db = best_snr;
  return result;
}

}  // namespace hwdyn::synth
