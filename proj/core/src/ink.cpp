#include "hwdyn/ink.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hwdyn/error.hpp"

namespace hwdyn::ink {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw DataError(context + ": " + what);
}

void require_finite(double v, const char* field, const std::string& context) {
  if (!std::isfinite(v)) fail(context, std::string("non-finite ") + field);
}

json sample_to_json(const InkSample& s) {
  return json::array({s.t, s.x, s.y, s.z, s.pressure, s.tilt_x, s.tilt_y, s.tip_width});
}

InkSample sample_from_json(const json& j) {
  if (!j.is_array() || j.size() != 8) {
    throw DataError("sample must be an array of 8 numbers [t,x,y,z,pressure,tilt_x,tilt_y,tip_width]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw DataError("sample entries must be numbers");
  }
  return InkSample{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                   j[3].get<double>(), j[4].get<double>(), j[5].get<double>(),
                   j[6].get<double>(), j[7].get<double>()};
}

template <typename T>
T required(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

StudentRecord student_from_json(const json& j) {
  StudentRecord s;
  s.student_id = required<std::string>(j, "student_id");
  s.grade = required<int>(j, "grade");
  s.gender = parse_gender(required<std::string>(j, "gender"));
  s.writing_hand = parse_hand(required<std::string>(j, "writing_hand"));
  s.dominant_hand = parse_hand(required<std::string>(j, "dominant_hand"));
  if (auto it = j.find("age"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw DataError("field 'age' has the wrong type");
    s.age = it->get<double>();
  }
  return s;
}

Drill drill_from_json(const json& j) {
  Drill d;
  d.drill_id = required<std::string>(j, "drill_id");
  d.n_questions = required<int>(j, "n_questions");
  d.n_correct = required<int>(j, "n_correct");
  auto it = j.find("strokes");
  if (it == j.end() || !it->is_array()) throw DataError("missing field 'strokes'");
  d.strokes.reserve(it->size());
  for (const auto& js : *it) {
    if (!js.is_array()) throw DataError("stroke must be an array of samples");
    Stroke stroke;
    stroke.samples.reserve(js.size());
    for (const auto& sample : js) stroke.samples.push_back(sample_from_json(sample));
    d.strokes.push_back(std::move(stroke));
  }
  return d;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::string to_string(Gender g) { return g == Gender::male ? "male" : "female"; }
std::string to_string(Hand h) { return h == Hand::left ? "left" : "right"; }

Gender parse_gender(const std::string& s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  throw DataError("invalid gender '" + s + "'");
}

Hand parse_hand(const std::string& s) {
  if (s == "left") return Hand::left;
  if (s == "right") return Hand::right;
  throw DataError("invalid hand '" + s + "'");
}

void validate(const InkSample& s, const std::string& context) {
  require_finite(s.t, "t", context);
  require_finite(s.x, "x", context);
  require_finite(s.y, "y", context);
  require_finite(s.z, "z", context);
  require_finite(s.pressure, "pressure", context);
  require_finite(s.tilt_x, "tilt_x", context);
  require_finite(s.tilt_y, "tilt_y", context);
  require_finite(s.tip_width, "tip_width", context);
  if (s.t < 0.0) fail(context, "negative t");
  if (s.pressure < 0.0 || s.pressure > 1.0) fail(context, "pressure outside [0,1]");
  if (std::abs(s.tilt_x) > 90.0) fail(context, "tilt_x outside [-90,90]");
  if (std::abs(s.tilt_y) > 90.0) fail(context, "tilt_y outside [-90,90]");
  if (s.tip_width < 0.0) fail(context, "negative tip_width");
}

void validate(const Stroke& s, const std::string& context) {
  if (s.samples.size() < 2) fail(context, "stroke has fewer than 2 samples");
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    validate(s.samples[i], context + " sample " + std::to_string(i));
    if (i > 0 && !(s.samples[i].t > s.samples[i - 1].t)) {
      fail(context + " sample " + std::to_string(i), "non-monotonic t");
    }
  }
}

void validate(const Drill& d, const std::string& context) {
  const std::string ctx = context + " drill '" + d.drill_id + "'";
  if (d.strokes.empty()) fail(ctx, "drill has no strokes");
  if (d.n_questions < 1 || d.n_questions > 20) fail(ctx, "n_questions outside [1,20]");
  if (d.n_correct < 0 || d.n_correct > d.n_questions) fail(ctx, "n_correct outside [0,n_questions]");
  for (std::size_t i = 0; i < d.strokes.size(); ++i) {
    validate(d.strokes[i], ctx + " stroke " + std::to_string(i));
  }
}

void validate(const StudentRecord& s) {
  const std::string ctx = "student '" + s.student_id + "'";
  if (s.grade < 1 || s.grade > 9) fail(ctx, "grade outside [1,9]");
  if (s.drills.empty()) fail(ctx, "student has no drills");
  if (s.age && !std::isfinite(*s.age)) fail(ctx, "non-finite age");
  for (const auto& d : s.drills) validate(d, ctx);
}

void validate(const Cohort& c) {
  if (!(c.sample_rate_hz > 0.0) || !std::isfinite(c.sample_rate_hz)) {
    throw DataError("cohort: sample_rate_hz must be positive");
  }
  std::set<std::string> ids;
  for (const auto& s : c.students) {
    if (!ids.insert(s.student_id).second) {
      throw DataError("duplicate student id '" + s.student_id + "'");
    }
    validate(s);
  }
}

Cohort parse_cohort(std::istream& in) {
  Cohort cohort;
  std::string line;
  std::size_t line_no = 0;
  bool have_student = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed record: ") + e.what());
      }
      if (!j.is_object()) throw DataError("record must be an object");
      if (j.contains("student_id")) {
        cohort.students.push_back(student_from_json(j));
        have_student = true;
      } else if (j.contains("drill_id")) {
        if (!have_student) throw DataError("drill record before any student header");
        cohort.students.back().drills.push_back(drill_from_json(j));
      } else if (j.contains("sample_rate_hz") && line_no == 1) {
        cohort.sample_rate_hz = required<double>(j, "sample_rate_hz");
      } else {
        throw DataError("unrecognized record");
      }
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(cohort);
  return cohort;
}

Cohort parse_cohort(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ink file '" + path.string() + "'");
  return parse_cohort(in);
}

void write_cohort(const Cohort& cohort, std::ostream& out) {
  validate(cohort);
  if (cohort.sample_rate_hz != kDefaultSampleRateHz) {
    out << json{{"sample_rate_hz", cohort.sample_rate_hz}}.dump() << "\n\n";
  }
  bool first = true;
  for (const auto& s : cohort.students) {
    if (!first) out << '\n';
    first = false;
    json header = {{"student_id", s.student_id},
                   {"grade", s.grade},
                   {"gender", to_string(s.gender)},
                   {"writing_hand", to_string(s.writing_hand)},
                   {"dominant_hand", to_string(s.dominant_hand)}};
    if (s.age) header["age"] = *s.age;
    out << header.dump() << '\n';
    for (const auto& d : s.drills) {
      json strokes = json::array();
      for (const auto& stroke : d.strokes) {
        json js = json::array();
        for (const auto& sample : stroke.samples) js.push_back(sample_to_json(sample));
        strokes.push_back(std::move(js));
      }
      json jd = {{"drill_id", d.drill_id},
                 {"n_questions", d.n_questions},
                 {"n_correct", d.n_correct},
                 {"strokes", std::move(strokes)}};
      out << jd.dump() << '\n';
    }
  }
  if (!out) throw DataError("write failed");
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& path) {
  validate(cohort);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_cohort(cohort, out);
  out.flush();
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

double score_ratio(const Drill& drill) {
  return static_cast<double>(drill.n_correct) / static_cast<double>(drill.n_questions);
}

double perfect_ratio(const StudentRecord& student) {
  if (student.drills.empty()) return 0.0;
  std::size_t perfect = 0;
  for (const auto& d : student.drills) {
    if (d.n_correct == d.n_questions) ++perfect;
  }
  return static_cast<double>(perfect) / static_cast<double>(student.drills.size());
}

}  // namespace hwdyn::ink
