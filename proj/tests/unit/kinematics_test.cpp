#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hwdyn/error.hpp"
#include "hwdyn/kinematics.hpp"
#include "test_util.hpp"

namespace hwdyn {
namespace {

using kinematics::KinematicSeries;

ink::Stroke two_points(double x1, double y1, double dt) {
  ink::Stroke s;
  s.samples = {test::sample(0.0, 0.0, 0.0, 0.2, 10, 20), test::sample(dt, x1, y1, 0.6, 30, 40)};
  return s;
}

TEST(Kinematics, SpeedOfThreeFourFiveStep) {
  const auto k = kinematics::speed_profile(two_points(3, 4, 0.01));
  ASSERT_EQ(k.size(), 1u);
  EXPECT_NEAR(k.speed[0], 500.0, 1e-9);
  EXPECT_NEAR(k.t[0], 0.005, 1e-15);
  EXPECT_NEAR(k.pressure[0], 0.4, 1e-15);
  EXPECT_NEAR(k.tilt_x[0], 20.0, 1e-12);
  EXPECT_NEAR(k.tilt_y[0], 30.0, 1e-12);
}

TEST(Kinematics, RepeatedPositionHasZeroSpeed) {
  EXPECT_EQ(kinematics::speed_profile(two_points(0, 0, 0.01)).speed[0], 0.0);
}

TEST(Kinematics, CollinearUnitSteps) {
  const auto k = kinematics::speed_profile(test::line_stroke(3, 480.0));
  ASSERT_EQ(k.size(), 2u);
  EXPECT_NEAR(k.speed[0], 480.0, 1e-9);
  EXPECT_NEAR(k.speed[1], 480.0, 1e-9);
}

TEST(Kinematics, SeriesLengthsAndSign) {
  const auto c = test::random_cohort(4, 2);
  for (const auto& st : c.students) {
    for (const auto& d : st.drills) {
      for (const auto& s : d.strokes) {
        const auto k = kinematics::speed_profile(s);
        ASSERT_EQ(k.size(), s.samples.size() - 1);
        EXPECT_EQ(k.speed.size(), k.size());
        EXPECT_EQ(k.pressure.size(), k.size());
        EXPECT_EQ(k.tilt_x.size(), k.size());
        EXPECT_EQ(k.tilt_y.size(), k.size());
        for (double v : k.speed) EXPECT_GE(v, 0.0);
      }
    }
  }
}

TEST(Kinematics, SpeedTranslationInvariantAndScaleEquivariant) {
  const auto c = test::random_cohort(9, 1);
  const auto& s = c.students[0].drills[0].strokes[0];
  auto moved = s;
  auto scaled = s;
  for (auto& p : moved.samples) {
    p.x += 17.5;
    p.y -= 3.25;
  }
  for (auto& p : scaled.samples) {
    p.x *= 2.5;
    p.y *= 2.5;
  }
  const auto a = kinematics::speed_profile(s);
  const auto b = kinematics::speed_profile(moved);
  const auto d = kinematics::speed_profile(scaled);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a.speed[i], b.speed[i], 1e-9 * (1 + a.speed[i]));
    EXPECT_NEAR(d.speed[i], 2.5 * a.speed[i], 1e-9 * (1 + a.speed[i]));
  }
}

KinematicSeries series(std::vector<double> t, std::vector<double> v) {
  KinematicSeries k;
  k.t = std::move(t);
  k.speed = std::move(v);
  k.pressure.assign(k.t.size(), 0.5);
  k.tilt_x.assign(k.t.size(), 1.0);
  k.tilt_y.assign(k.t.size(), 2.0);
  return k;
}

TEST(Kinematics, AccelOfConstantSpeedIsZero) {
  const auto a = kinematics::accel_profile(series({0, 0.1, 0.2}, {5, 5, 5}));
  ASSERT_EQ(a.accel.size(), 2u);
  EXPECT_EQ(a.accel[0], 0.0);
  EXPECT_EQ(a.accel[1], 0.0);
  EXPECT_EQ(a.size(), 2u);
}

TEST(Kinematics, AccelOfRamp) {
  const auto a = kinematics::accel_profile(series({0, 0.1}, {0, 10}));
  ASSERT_EQ(a.accel.size(), 1u);
  EXPECT_NEAR(a.accel[0], 100.0, 1e-9);
}

TEST(Kinematics, AccelNeedsTwoSpeeds) {
  try {
    kinematics::accel_profile(series({0}, {1}));
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient samples"), std::string::npos);
  }
}

TEST(Kinematics, AccelTimeReversalSymmetry) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> t, v;
  double now = 0.0;
  for (int i = 0; i < 40; ++i) {
    now += 0.001 + 0.002 * u(rng) / 10;
    t.push_back(now);
    v.push_back(u(rng));
  }
  const auto fwd = kinematics::accel_profile(series(t, v));
  std::vector<double> rt, rv;
  for (std::size_t i = t.size(); i-- > 0;) {
    rt.push_back(now - t[i]);
    rv.push_back(v[i]);
  }
  const auto rev = kinematics::accel_profile(series(rt, rv));
  ASSERT_EQ(fwd.accel.size(), rev.accel.size());
  const std::size_t n = fwd.accel.size();
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(rev.accel[i], -fwd.accel[n - 1 - i], 1e-6 * (1 + std::abs(fwd.accel[n - 1 - i])));
  }
}

TEST(Kinematics, SmoothPreservesConstant) {
  const std::vector<double> c(50, 3.25);
  for (double v : kinematics::smooth(c, 2.0)) EXPECT_NEAR(v, 3.25, 1e-12);
}

TEST(Kinematics, SmoothedImpulseIsNormalizedSymmetricBell) {
  std::vector<double> x(41, 0.0);
  x[20] = 1.0;
  const auto y = kinematics::smooth(x, 2.0);
  double sum = 0.0;
  for (double v : y) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  for (int k = 1; k <= 8; ++k) {
    EXPECT_NEAR(y[20 - k], y[20 + k], 1e-15);
    EXPECT_LT(y[20 + k], y[20 + k - 1]);
  }
  // kernel support ends at 4 sigma
  EXPECT_EQ(y[29], 0.0);
  EXPECT_EQ(y[11], 0.0);
}

TEST(Kinematics, SmoothMatchesGaussianTransfer) {
  const double rate = 480.0, f = 5.0, sigma = 3.0;
  std::vector<double> x(2000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * f * i / rate);
  const auto y = kinematics::smooth(x, sigma);
  double in = 0.0, out = 0.0;
  for (std::size_t i = 200; i < 1800; ++i) {
    in += x[i] * x[i];
    out += y[i] * y[i];
  }
  const double sigma_t = sigma / rate;
  const double expected = std::exp(-2 * std::numbers::pi * std::numbers::pi * f * f * sigma_t * sigma_t);
  EXPECT_NEAR(std::sqrt(out / in), expected, 0.02 * expected);
}

TEST(Kinematics, SmoothIsLinear) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<double> u(80), v(80), w(80);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = g(rng);
    v[i] = g(rng);
    w[i] = 2.5 * u[i] - 0.75 * v[i];
  }
  const auto su = kinematics::smooth(u, 2.0), sv = kinematics::smooth(v, 2.0),
             sw = kinematics::smooth(w, 2.0);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(sw[i], 2.5 * su[i] - 0.75 * sv[i], 1e-9);
}

TEST(Kinematics, SmoothRejectsEmptyAndBadSigma) {
  EXPECT_THROW(kinematics::smooth(std::vector<double>{}, 2.0), Error);
  EXPECT_THROW(kinematics::smooth(std::vector<double>{1.0}, 0.0), Error);
}

TEST(Kinematics, RegularizeOnlyIrregularStrokes) {
  const auto regular = test::line_stroke(20, 100.0);
  EXPECT_FALSE(kinematics::needs_regularization(regular, 480.0));
  EXPECT_EQ(kinematics::regularize(regular, 480.0), regular);

  ink::Stroke irregular = regular;
  for (std::size_t i = 10; i < irregular.samples.size(); ++i) irregular.samples[i].t += 1.0 / 480.0;
  for (auto& p : irregular.samples) p.x = 100.0 * p.t;
  ASSERT_TRUE(kinematics::needs_regularization(irregular, 480.0));
  const auto fixed = kinematics::regularize(irregular, 480.0);
  EXPECT_FALSE(kinematics::needs_regularization(fixed, 480.0));
  for (double v : kinematics::speed_profile(fixed).speed) EXPECT_NEAR(v, 100.0, 1e-6);
}

}  // namespace
}  // namespace hwdyn
