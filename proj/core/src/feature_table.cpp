#include "hwdyn/feature_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <utility>

#include <nlohmann/json.hpp>

#include "hwdyn/error.hpp"
#include "hwdyn/parallel.hpp"
#include "text.hpp"

namespace hwdyn::features {
namespace {

using nlohmann::json;

const std::vector<std::string> kInfoColumns = {"student_id", "grade", "gender", "perfect_ratio"};

struct DrillRef {
  std::size_t student;
  std::size_t drill;
};

std::vector<DrillRef> drill_refs(const ink::Cohort& cohort) {
  std::vector<DrillRef> refs;
  for (std::size_t s = 0; s < cohort.students.size(); ++s) {
    for (std::size_t d = 0; d < cohort.students[s].drills.size(); ++d) refs.push_back({s, d});
  }
  return refs;
}

std::string drill_context(const ink::StudentRecord& st, const ink::Drill& d) {
  return "student '" + st.student_id + "', drill '" + d.drill_id + "'";
}

const DrillFits* find_drill(const CohortFits& fits, const std::string& student,
                            const std::string& drill) {
  for (std::size_t s = 0; s < fits.student_ids.size(); ++s) {
    if (fits.student_ids[s] != student) continue;
    for (const auto& d : fits.students[s]) {
      if (d.drill_id == drill) return &d;
    }
  }
  return nullptr;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

StudentInfo student_info(const ink::StudentRecord& s) {
  return {s.student_id, s.grade, s.gender, ink::perfect_ratio(s)};
}

std::size_t FeatureTable::column_index(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown feature '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> FeatureTable::column(std::string_view name) const {
  const std::size_t j = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

void FeatureConfig::validate() const {
  if (n_bins < 2) throw ConfigError("n-bins must be >= 2");
  fit.validate();
}

std::size_t CohortFits::n_strokes() const {
  std::size_t n = 0;
  for (const auto& st : students) {
    for (const auto& d : st) n += d.strokes.size();
  }
  return n;
}

CohortFits fit_cohort(const ink::Cohort& cohort, const lognorm::FitConfig& cfg) {
  cfg.validate();
  struct StrokeRef {
    std::size_t student, drill, stroke;
  };
  std::vector<StrokeRef> refs;
  for (const auto& [s, d] : drill_refs(cohort)) {
    const auto& drill = cohort.students[s].drills[d];
    for (std::size_t k = 0; k < drill.strokes.size(); ++k) refs.push_back({s, d, k});
  }
  std::vector<std::optional<StrokeFit>> fitted(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) {
    const auto& r = refs[i];
    const auto& st = cohort.students[r.student];
    const auto& drill = st.drills[r.drill];
    try {
      fitted[i] = fit_stroke(drill.strokes[r.stroke], r.stroke, cfg, cohort.sample_rate_hz);
    } catch (const Error& e) {
      throw DataError(drill_context(st, drill) + ", stroke " + std::to_string(r.stroke) + ": " +
                      e.what());
    }
  });

  CohortFits out;
  for (const auto& st : cohort.students) {
    out.student_ids.push_back(st.student_id);
    auto& drills = out.students.emplace_back();
    for (const auto& d : st.drills) drills.push_back({d.drill_id, {}});
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (fitted[i]) out.students[refs[i].student][refs[i].drill].strokes.push_back(*fitted[i]);
  }
  return out;
}

FeatureTable compute_features(const ink::Cohort& cohort, Family family, const FeatureConfig& cfg,
                              const CohortFits* fits) {
  cfg.validate();
  if (cohort.students.empty()) throw DataError("cohort has no students");
  CohortFits own;
  if (family == Family::siglog && fits == nullptr) {
    own = fit_cohort(cohort, cfg.fit);
    fits = &own;
  }
  std::optional<ChannelRanges> ranges;
  if (family == Family::entropy && cfg.entropy_binning == EntropyBinning::per_cohort) {
    ranges = cohort_channel_ranges(cohort);
  }

  const auto refs = drill_refs(cohort);
  std::vector<DrillFeatures> drill_features(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) {
    const auto& st = cohort.students[refs[i].student];
    const auto& drill = st.drills[refs[i].drill];
    try {
      switch (family) {
        case Family::basic:
          drill_features[i] = basic_drill_features(drill, cohort.sample_rate_hz);
          break;
        case Family::entropy:
          drill_features[i] = entropy_drill_features(drill, cfg.n_bins, ranges, cohort.sample_rate_hz);
          break;
        case Family::siglog: {
          const DrillFits* df = find_drill(*fits, st.student_id, drill.drill_id);
          if (df == nullptr || df->strokes.empty()) throw DataError("no fittable strokes");
          drill_features[i] = siglog_drill_features(df->strokes, cfg.snr_aggregation);
          break;
        }
      }
    } catch (const Error& e) {
      throw DataError(drill_context(st, drill) + ": " + e.what());
    }
  });

  FeatureTable table;
  table.family = family;
  table.names = student_feature_names(family);
  std::size_t next = 0;
  for (const auto& st : cohort.students) {
    if (st.drills.empty()) throw DataError("student '" + st.student_id + "' has no drills");
    const std::span<const DrillFeatures> mine(drill_features.data() + next, st.drills.size());
    next += st.drills.size();
    auto fv = aggregate_student(mine, family, st.student_id);
    for (double v : fv.values) {
      if (!std::isfinite(v)) {
        throw NumericError("student '" + st.student_id + "': non-finite feature value");
      }
    }
    table.students.push_back(student_info(st));
    table.rows.push_back(std::move(fv.values));
  }
  return table;
}

SnrSummary snr_summary(const CohortFits& fits) {
  std::vector<double> snr;
  for (const auto& st : fits.students) {
    for (const auto& d : st) {
      for (const auto& f : d.strokes) snr.push_back(f.fit.snr_db);
    }
  }
  SnrSummary s;
  s.n_strokes = snr.size();
  if (!snr.empty()) std::tie(s.mean_db, s.std_db) = mean_std(snr);
  return s;
}

void write_feature_csv(const FeatureTable& table, std::ostream& out) {
  std::vector<std::string> header = kInfoColumns;
  header.insert(header.end(), table.names.begin(), table.names.end());
  out << detail::join_csv(header) << '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& info = table.students[i];
    std::vector<std::string> fields = {info.student_id, std::to_string(info.grade),
                                       ink::to_string(info.gender),
                                       detail::format_double(info.perfect_ratio)};
    for (double v : table.rows[i]) fields.push_back(detail::format_double(v));
    out << detail::join_csv(fields) << '\n';
  }
}

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_feature_csv(table, out);
}

FeatureTable read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty()) {
    throw DataError("feature CSV: missing header");
  }
  const auto header = detail::split_csv(line);
  if (header.size() < kInfoColumns.size() ||
      !std::equal(kInfoColumns.begin(), kInfoColumns.end(), header.begin())) {
    throw DataError("feature CSV: header must start with student_id,grade,gender,perfect_ratio");
  }
  FeatureTable table;
  table.names.assign(header.begin() + static_cast<std::ptrdiff_t>(kInfoColumns.size()), header.end());
  bool known = false;
  for (Family f : {Family::basic, Family::entropy, Family::siglog}) {
    if (student_feature_names(f) == table.names) {
      table.family = f;
      known = true;
    }
  }
  if (!known) throw DataError("feature CSV: columns match no feature family");

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string ctx = "feature CSV line " + std::to_string(line_no);
    const auto fields = detail::split_csv(line);
    if (fields.size() != header.size()) {
      throw DataError(ctx + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    StudentInfo info;
    info.student_id = fields[0];
    const double grade = detail::parse_double(fields[1], ctx);
    if (grade != std::floor(grade)) throw DataError(ctx + ": grade must be an integer");
    info.grade = static_cast<int>(grade);
    try {
      info.gender = ink::parse_gender(fields[2]);
    } catch (const Error& e) {
      throw DataError(ctx + ": " + e.what());
    }
    info.perfect_ratio = detail::parse_double(fields[3], ctx);
    std::vector<double> row;
    for (std::size_t j = kInfoColumns.size(); j < fields.size(); ++j) {
      const double v = detail::parse_double(fields[j], ctx);
      if (!std::isfinite(v)) throw DataError(ctx + ": non-finite value for '" + header[j] + "'");
      row.push_back(v);
    }
    table.students.push_back(std::move(info));
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw DataError("feature CSV: no rows");
  return table;
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_feature_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_fit_records(const CohortFits& fits, std::ostream& out) {
  for (std::size_t s = 0; s < fits.students.size(); ++s) {
    for (const auto& d : fits.students[s]) {
      for (const auto& f : d.strokes) {
        json comps = json::array();
        for (const auto& c : f.fit.components) {
          comps.push_back({{"t0", c.t0}, {"D", c.D}, {"mu", c.mu}, {"sigma", c.sigma}});
        }
        json rec = {{"student_id", fits.student_ids[s]},
                    {"drill_id", d.drill_id},
                    {"stroke_index", f.stroke_index},
                    {"t_start", f.t_start},
                    {"snr_db", f.fit.snr_db},
                    {"n_components", f.fit.n_components},
                    {"snr_over_c", f.fit.snr_over_c},
                    {"signal_energy", f.signal_energy},
                    {"residual_energy", f.residual_energy},
                    {"components", comps}};
        out << rec.dump() << '\n';
      }
    }
  }
}

void write_fit_records(const CohortFits& fits, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_fit_records(fits, out);
}

CohortFits read_fit_records(std::istream& in) {
  CohortFits out;
  std::map<std::string, std::size_t> student_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string ctx = "fit records line " + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      const auto sid = j.at("student_id").get<std::string>();
      const auto did = j.at("drill_id").get<std::string>();
      auto [it, inserted] = student_index.try_emplace(sid, out.students.size());
      if (inserted) {
        out.student_ids.push_back(sid);
        out.students.emplace_back();
      }
      auto& drills = out.students[it->second];
      if (drills.empty() || drills.back().drill_id != did) drills.push_back({did, {}});
      StrokeFit f;
      f.stroke_index = j.at("stroke_index").get<std::size_t>();
      f.t_start = j.at("t_start").get<double>();
      f.signal_energy = j.at("signal_energy").get<double>();
      f.residual_energy = j.at("residual_energy").get<double>();
      f.fit.snr_db = j.at("snr_db").get<double>();
      f.fit.n_components = j.at("n_components").get<int>();
      f.fit.snr_over_c = j.at("snr_over_c").get<double>();
      for (const auto& c : j.at("components")) {
        f.fit.components.push_back({c.at("t0").get<double>(), c.at("D").get<double>(),
                                    c.at("mu").get<double>(), c.at("sigma").get<double>()});
      }
      if (static_cast<int>(f.fit.components.size()) != f.fit.n_components) {
        throw DataError("n_components disagrees with the component list");
      }
      drills.back().strokes.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw DataError(ctx + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(ctx + ": " + e.what());
    }
  }
  return out;
}

CohortFits read_fit_records(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_fit_records(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace hwdyn::features
