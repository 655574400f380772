#include <gtest/gtest.h>

#include <sstream>

#include "hwdyn/error.hpp"
#include "hwdyn/ink.hpp"
#include "hwdyn/synth.hpp"
#include "test_util.hpp"

namespace hwdyn {
namespace {

const char* kMinimal =
    R"({"student_id":"a","grade":3,"gender":"female","writing_hand":"right","dominant_hand":"right"})"
    "\n"
    R"({"drill_id":"a-0","n_questions":5,"n_correct":5,"strokes":[[[0,0,0,0,0.5,0,0,0],[0.01,1,0,0,0.5,0,0,0],[0.02,2,0,0,0.5,0,0,0]]]})"
    "\n";

TEST(Ink, ParsesMinimalFile) {
  std::istringstream in(kMinimal);
  const auto c = ink::parse_cohort(in);
  ASSERT_EQ(c.students.size(), 1u);
  EXPECT_EQ(c.students[0].grade, 3);
  EXPECT_EQ(c.students[0].gender, ink::Gender::female);
  ASSERT_EQ(c.students[0].drills.size(), 1u);
  EXPECT_EQ(c.students[0].drills[0].strokes[0].samples.size(), 3u);
  EXPECT_EQ(c.sample_rate_hz, 480.0);
}

TEST(Ink, RejectsNonMonotonicTime) {
  const std::string bad =
      R"({"student_id":"a","grade":3,"gender":"female","writing_hand":"right","dominant_hand":"right"})"
      "\n"
      R"({"drill_id":"a-0","n_questions":5,"n_correct":5,"strokes":[[[0.02,0,0,0,0.5,0,0,0],[0.01,1,0,0,0.5,0,0,0]]]})"
      "\n";
  std::istringstream in(bad);
  try {
    ink::parse_cohort(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("non-monotonic t"), std::string::npos) << e.what();
  }
}

TEST(Ink, MalformedRecordReportsLine) {
  std::istringstream in(std::string(kMinimal) + "{not json\n");
  try {
    ink::parse_cohort(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Ink, RejectsDuplicateStudent) {
  const std::string block = kMinimal;
  std::istringstream in(block + "\n" + block);
  EXPECT_THROW(ink::parse_cohort(in), DataError);
}

TEST(Ink, RejectsInvariantViolations) {
  auto c = test::random_cohort(1, 1);
  auto bad = c;
  bad.students[0].grade = 10;
  EXPECT_THROW(ink::validate(bad), DataError);
  bad = c;
  bad.students[0].drills.clear();
  EXPECT_THROW(ink::validate(bad), DataError);
  bad = c;
  bad.students[0].drills[0].n_correct = bad.students[0].drills[0].n_questions + 1;
  EXPECT_THROW(ink::validate(bad), DataError);
  bad = c;
  bad.students[0].drills[0].strokes[0].samples[0].pressure = 1.5;
  EXPECT_THROW(ink::validate(bad), DataError);
  bad = c;
  bad.students[0].drills[0].strokes[0].samples[0].tilt_x = 91;
  EXPECT_THROW(ink::validate(bad), DataError);
  bad = c;
  bad.students[0].drills[0].strokes[0].samples.resize(1);
  EXPECT_THROW(ink::validate(bad), DataError);
}

TEST(Ink, WriteRejectsStudentWithoutDrills) {
  auto c = test::random_cohort(2, 1);
  c.students[0].drills.clear();
  std::ostringstream out;
  EXPECT_THROW(ink::write_cohort(c, out), DataError);
}

TEST(Ink, MinimalCohortWritesOneStudentLine) {
  std::istringstream in(kMinimal);
  const auto c = ink::parse_cohort(in);
  std::ostringstream out;
  ink::write_cohort(c, out);
  const std::string text = out.str();
  int student_lines = 0;
  std::istringstream lines(text);
  for (std::string l; std::getline(lines, l);) {
    if (l.find("\"student_id\"") != std::string::npos) ++student_lines;
  }
  EXPECT_EQ(student_lines, 1);
}

TEST(Ink, RandomCohortsRoundTrip) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = test::random_cohort(seed, 3);
    std::stringstream buf;
    ink::write_cohort(c, buf);
    EXPECT_EQ(ink::parse_cohort(buf), c) << "seed " << seed;
  }
}

TEST(Ink, SyntheticCohortRoundTripsBitIdentically) {
  const auto [cohort, truth] = synth::generate_cohort(synth::MaturationProfile::defaults(), 2, 1, 5);
  std::stringstream first;
  ink::write_cohort(cohort, first);
  const std::string text = first.str();
  const auto parsed = ink::parse_cohort(first);
  EXPECT_EQ(parsed, cohort);
  std::ostringstream second;
  ink::write_cohort(parsed, second);
  EXPECT_EQ(second.str(), text);
}

TEST(Ink, NonDefaultSampleRateRoundTrips) {
  auto c = test::random_cohort(3, 2);
  c.sample_rate_hz = 200.0;
  std::stringstream buf;
  ink::write_cohort(c, buf);
  EXPECT_EQ(ink::parse_cohort(buf).sample_rate_hz, 200.0);
}

TEST(Ink, ScoreRatio) {
  ink::Drill d = test::drill_of({test::line_stroke(3, 1.0)});
  d.n_questions = 5;
  d.n_correct = 5;
  EXPECT_EQ(ink::score_ratio(d), 1.0);
  d.n_questions = 8;
  d.n_correct = 0;
  EXPECT_EQ(ink::score_ratio(d), 0.0);
  d.n_questions = 4;
  d.n_correct = 3;
  EXPECT_EQ(ink::score_ratio(d), 0.75);
}

TEST(Ink, PerfectRatio) {
  ink::StudentRecord s;
  s.student_id = "x";
  for (int i = 0; i < 20; ++i) {
    ink::Drill d = test::drill_of({test::line_stroke(3, 1.0)}, "d" + std::to_string(i));
    d.n_questions = 4;
    d.n_correct = i < 9 ? 4 : 3;
    s.drills.push_back(d);
  }
  EXPECT_DOUBLE_EQ(ink::perfect_ratio(s), 0.45);
  for (auto& d : s.drills) d.n_correct = d.n_questions;
  EXPECT_EQ(ink::perfect_ratio(s), 1.0);
  for (auto& d : s.drills) d.n_correct = 0;
  EXPECT_EQ(ink::perfect_ratio(s), 0.0);
}

TEST(Ink, RatiosStayInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto& st : test::random_cohort(seed, 4).students) {
      const double p = ink::perfect_ratio(st);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      for (const auto& d : st.drills) {
        EXPECT_GE(ink::score_ratio(d), 0.0);
        EXPECT_LE(ink::score_ratio(d), 1.0);
      }
    }
  }
}

}  // namespace
}  // namespace hwdyn
