#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hwdyn/error.hpp"
#include "hwdyn/kinematics.hpp"
#include "hwdyn/synth.hpp"

namespace hwdyn::synth {
namespace {

TEST(GenerateStroke, NoiselessSpeedIsSumOfLognormals) {
  const std::vector<lognorm::LognormalComponent> cs = {{0.0, 4.0, -2.0, 0.25}, {0.1, 6.0, -1.9, 0.2}};
  const auto s = generate_stroke(cs, 0.0, 1);
  const auto k = kinematics::speed_profile(s);
  ASSERT_GE(k.size(), 8u);
  for (std::size_t i = 0; i < k.size(); ++i) {
    double v = 0.0;
    for (const auto& c : cs) v += lognorm::lognormal_speed(c, k.t[i]);
    ASSERT_NEAR(k.speed[i], v, 1e-6 * (1.0 + v));
  }
}

TEST(GenerateStroke, NoiseMatchesRequestedLevel) {
  const std::vector<lognorm::LognormalComponent> cs = {{0.0, 8.0, -1.5, 0.3}};
  const auto clean = kinematics::speed_profile(generate_stroke(cs, 0.0, 2));
  const auto noisy = kinematics::speed_profile(generate_stroke(cs, 0.05, 2));
  ASSERT_EQ(clean.size(), noisy.size());
  double peak = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    peak = std::max(peak, clean.speed[i]);
    ss += (noisy.speed[i] - clean.speed[i]) * (noisy.speed[i] - clean.speed[i]);
  }
  const double rms = std::sqrt(ss / clean.size());
  EXPECT_GT(rms, 0.02 * peak);  // zero clamping trims some noise near the tails
  EXPECT_LT(rms, 0.06 * peak);
}

TEST(GenerateStroke, SeededAndValid) {
  const std::vector<lognorm::LognormalComponent> cs = {{0.0, 8.0, -1.5, 0.3}};
  const auto a = generate_stroke(cs, 0.05, 3), b = generate_stroke(cs, 0.05, 3), c = generate_stroke(cs, 0.05, 4);
  EXPECT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].x, b.samples[i].x);
  EXPECT_NE(a.samples[5].x, c.samples[5].x);
  EXPECT_NO_THROW(ink::validate(a, "stroke"));
  EXPECT_THROW(generate_stroke(std::vector<lognorm::LognormalComponent>{}, 0.0, 1), ConfigError);
}

TEST(Cohort, ShapeLabelsAndDeterminism) {
  const auto [c, truth] = generate_cohort(MaturationProfile::defaults(), 3, 2, 7);
  ASSERT_EQ(c.students.size(), 27u);
  ASSERT_EQ(truth.students.size(), 27u);
  EXPECT_NO_THROW(ink::validate(c));
  std::set<std::string> ids;
  std::size_t strokes = 0;
  for (std::size_t i = 0; i < c.students.size(); ++i) {
    const auto& s = c.students[i];
    EXPECT_TRUE(ids.insert(s.student_id).second);
    EXPECT_EQ(s.grade, static_cast<int>(i / 3) + 1);
    EXPECT_EQ(s.drills.size(), 2u);
    EXPECT_EQ(truth.students[i].student_id, s.student_id);
    EXPECT_EQ(truth.students[i].grade, s.grade);
    EXPECT_EQ(truth.students[i].female, s.gender == ink::Gender::female);
    for (const auto& d : s.drills) {
      EXPECT_GE(d.strokes.size(), 2u);
      EXPECT_LE(d.strokes.size(), 4u);
      strokes += d.strokes.size();
    }
  }
  EXPECT_EQ(truth.strokes.size(), strokes);
  const auto again = generate_cohort(MaturationProfile::defaults(), 3, 2, 7).first;
  std::ostringstream a, b;
  ink::write_cohort(c, a);
  ink::write_cohort(again, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Cohort, ComponentCountFallsWithGrade) {
  const auto [c, truth] = generate_cohort(MaturationProfile::defaults(), 6, 4, 8);
  std::vector<double> sum(10, 0.0), n(10, 0.0);
  std::map<std::string, int> grade_of;
  for (const auto& s : truth.students) grade_of[s.student_id] = s.grade;
  for (const auto& s : truth.strokes) {
    sum[grade_of[s.student_id]] += s.components.size();
    n[grade_of[s.student_id]] += 1;
  }
  EXPECT_GT(sum[1] / n[1], 6.5);
  EXPECT_LT(sum[9] / n[9], 4.0);
  for (int g = 1; g < 9; ++g) EXPECT_GT(sum[g] / n[g] + 0.6, sum[g + 1] / n[g + 1]);
}

TEST(Cohort, NegativeControlHasNoLabelEffects) {
  const auto p = MaturationProfile::without_label_effects();
  EXPECT_EQ(p.gender_pressure_shift, 0.0);
  EXPECT_EQ(p.performance_sigma_shift, 0.0);
  EXPECT_EQ(p.performance_perfect_shift, 0.0);
  EXPECT_NO_THROW(p.validate());
}

TEST(Cohort, InvalidProfileRejected) {
  auto p = MaturationProfile::defaults();
  p.strokes_per_drill_min = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(generate_cohort(MaturationProfile::defaults(), 0, 1, 1), ConfigError);
}

TEST(GroundTruth, RoundTrip) {
  const auto truth = generate_cohort(MaturationProfile::defaults(), 2, 1, 9).second;
  std::stringstream ss;
  write_ground_truth(truth, ss);
  const auto back = read_ground_truth(ss);
  ASSERT_EQ(back.students.size(), truth.students.size());
  ASSERT_EQ(back.strokes.size(), truth.strokes.size());
  for (std::size_t i = 0; i < truth.strokes.size(); ++i) {
    EXPECT_EQ(back.strokes[i].drill_id, truth.strokes[i].drill_id);
    ASSERT_EQ(back.strokes[i].components.size(), truth.strokes[i].components.size());
    EXPECT_EQ(back.strokes[i].components[0].mu, truth.strokes[i].components[0].mu);
    EXPECT_EQ(back.strokes[i].noise_amp, truth.strokes[i].noise_amp);
  }
  EXPECT_EQ(back.students[3].high_performer, truth.students[3].high_performer);
}

TEST(Substream, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t k = 0; k < 50; ++k) seen.insert(substream(s, k));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(substream(5, 6), substream(5, 6));
}

TEST(Calibration, ReachesTargetWithinTolerance) {
  lognorm::FitConfig fit;
  const auto r = calibrate_noise(MaturationProfile::defaults(), 27.0, fit, 3, 2, 1.0);
  EXPECT_NEAR(r.mean_snr_db, 27.0, 1.0);
  EXPECT_GT(r.noise_scale, 0.0);
  EXPECT_GE(r.iterations, 1);
}

}  // namespace
}  // namespace hwdyn::synth
