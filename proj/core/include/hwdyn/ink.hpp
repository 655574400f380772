#pragma once

// Online pen-recording data model: samples grouped into strokes, strokes into
// drills, drills into students, students into a cohort.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hwdyn::ink {

inline constexpr double kDefaultSampleRateHz = 480.0;

/// One pen sample. `t` is seconds since the start of the drill.
struct InkSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double pressure = 0.0;  // normalized to [0, 1]
  double tilt_x = 0.0;    // degrees, [-90, 90]
  double tilt_y = 0.0;    // degrees, [-90, 90]
  double tip_width = 0.0;

  friend bool operator==(const InkSample&, const InkSample&) = default;
};

/// Pen-down segment. At least two samples with strictly increasing `t`.
struct Stroke {
  std::vector<InkSample> samples;

  friend bool operator==(const Stroke&, const Stroke&) = default;
};

struct Drill {
  std::string drill_id;
  std::vector<Stroke> strokes;
  int n_questions = 1;
  int n_correct = 0;

  friend bool operator==(const Drill&, const Drill&) = default;
};

enum class Gender { male, female };
enum class Hand { left, right };

struct StudentRecord {
  std::string student_id;
  int grade = 1;
  Gender gender = Gender::male;
  Hand writing_hand = Hand::right;
  Hand dominant_hand = Hand::right;
  std::optional<double> age;  // carried through, never consumed
  std::vector<Drill> drills;

  friend bool operator==(const StudentRecord&, const StudentRecord&) = default;
};

struct Cohort {
  std::vector<StudentRecord> students;
  double sample_rate_hz = kDefaultSampleRateHz;

  friend bool operator==(const Cohort&, const Cohort&) = default;
};

std::string to_string(Gender g);
std::string to_string(Hand h);
Gender parse_gender(const std::string& s);
Hand parse_hand(const std::string& s);

// Invariant checks. Each throws DataError naming the offending field and id.
void validate(const InkSample& s, const std::string& context);
void validate(const Stroke& s, const std::string& context);
void validate(const Drill& d, const std::string& context);
void validate(const StudentRecord& s);
void validate(const Cohort& c);

/// Reads a cohort in the line-delimited ink format. Errors carry the
/// 1-based line number of the offending record.
Cohort parse_cohort(std::istream& in);
Cohort parse_cohort(const std::filesystem::path& path);

/// Writes `cohort` (validated first). Numbers use the shortest decimal
/// representation that round-trips, so parse(write(c)) == c exactly.
void write_cohort(const Cohort& cohort, std::ostream& out);
void write_cohort(const Cohort& cohort, const std::filesystem::path& path);

/// n_correct / n_questions.
double score_ratio(const Drill& drill);

/// Fraction of the student's drills with a perfect score.
double perfect_ratio(const StudentRecord& student);

}  // namespace hwdyn::ink
