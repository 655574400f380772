#include "hwdyn/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "hwdyn/error.hpp"
#include "text.hpp"

namespace hwdyn::eval {
namespace {

namespace fs = std::filesystem;
using detail::format_double;

const std::vector<std::string> kMetricsHeader = {
    "task", "family", "model", "kind",      "seed", "scope",    "n",
    "r2",   "rmse",   "accuracy", "precision", "recall", "f1", "auc", "baseline"};

std::string stem(const EvaluationReport& r) {
  return to_string(r.task) + "_" + features::to_string(r.family) + "_" + to_string(r.model);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!detail::trim(line).empty()) rows.push_back(detail::split_csv(line));
  }
  return rows;
}

std::vector<std::string> metric_row(const EvaluationReport& r, const std::string& scope,
                                    const std::optional<RegressionMetrics>& reg,
                                    const std::optional<ClassificationMetrics>& cls) {
  const std::string nan = "nan";
  std::vector<std::string> row = {to_string(r.task), features::to_string(r.family),
                                  to_string(r.model), learn::to_string(r.kind),
                                  std::to_string(r.seed), scope};
  if (reg) {
    row.insert(row.end(), {std::to_string(reg->n), format_double(reg->r2), format_double(reg->rmse),
                           nan, nan, nan, nan, nan});
  } else {
    row.insert(row.end(), {std::to_string(cls->n), nan, nan, format_double(cls->accuracy),
                           format_double(cls->precision), format_double(cls->recall),
                           format_double(cls->f1), format_double(cls->auc)});
  }
  row.push_back(scope == "pooled" ? format_double(r.baseline) : nan);
  return row;
}

// Plot frame shared by both charts.
struct Frame {
  double width = 640, height = 480, left = 64, right = 24, top = 40, bottom = 56;
  double x0, x1, y0, y1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

std::string num(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& title,
          const std::string& xlabel, const std::string& ylabel, int x_ticks_from, int x_ticks_to) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
      << f.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << f.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  svg << "<line x1=\"" << f.left << "\" y1=\"" << f.height - f.bottom << "\" x2=\""
      << f.width - f.right << "\" y2=\"" << f.height - f.bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\""
      << f.height - f.bottom << "\" stroke=\"black\"/>\n";
  for (int g = x_ticks_from; g <= x_ticks_to; ++g) {
    svg << "<text x=\"" << num(f.px(g)) << "\" y=\"" << f.height - f.bottom + 18
        << "\" text-anchor=\"middle\">" << g << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = f.y0 + (f.y1 - f.y0) * k / 4.0;
    svg << "<text x=\"" << f.left - 6 << "\" y=\"" << num(f.py(v) + 4)
        << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  svg << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 16 << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
  svg << "<text transform=\"translate(16," << f.height / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
}

}  // namespace

void write_report(const EvaluationReport& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create report directory '" + dir.string() + "'");

  // metrics.csv: replace this combination's rows, keep the others.
  const fs::path metrics = dir / "metrics.csv";
  std::vector<std::vector<std::string>> rows;
  if (fs::exists(metrics)) {
    auto existing = read_rows(metrics);
    if (existing.empty() || existing.front() != kMetricsHeader) {
      throw DataError("'" + metrics.string() + "' is not a metrics table");
    }
    for (std::size_t i = 1; i < existing.size(); ++i) {
      const auto& row = existing[i];
      if (row.size() != kMetricsHeader.size()) throw DataError("malformed row in '" + metrics.string() + "'");
      const bool mine = row[0] == to_string(r.task) && row[1] == features::to_string(r.family) &&
                        row[2] == to_string(r.model);
      if (!mine) rows.push_back(row);
    }
  }
  rows.push_back(metric_row(r, "pooled", r.regression, r.classification));
  for (const auto& f : r.folds) {
    rows.push_back(metric_row(r, "fold" + std::to_string(f.fold), f.regression, f.classification));
  }
  // Deterministic order regardless of invocation order.
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a[0], a[1], a[2], a[5]) < std::tie(b[0], b[1], b[2], b[5]);
  });
  std::string out = detail::join_csv(kMetricsHeader) + "\n";
  for (const auto& row : rows) out += detail::join_csv(row) + "\n";
  write_file(metrics, out);

  const std::string name = stem(r);
  if (r.classification) {
    const auto& c = r.classification->confusion;
    write_file(dir / ("confusion_" + name + ".csv"),
               ",predicted_0,predicted_1\nactual_0," + std::to_string(c.tn) + "," +
                   std::to_string(c.fp) + "\nactual_1," + std::to_string(c.fn) + "," +
                   std::to_string(c.tp) + "\n");
    std::string p = "student_id,fold,truth,probability,predicted\n";
    for (std::size_t i = 0; i < r.student_ids.size(); ++i) {
      p += r.student_ids[i] + "," + std::to_string(r.fold[i]) + "," +
           std::to_string(static_cast<int>(r.truth[i])) + "," + format_double(r.prediction[i]) +
           "," + std::to_string(r.predicted_label[i]) + "\n";
    }
    write_file(dir / ("predictions_" + name + ".csv"), p);
  } else {
    std::string s = "student_id,fold,true_grade,predicted_grade\n";
    for (std::size_t i = 0; i < r.student_ids.size(); ++i) {
      s += r.student_ids[i] + "," + std::to_string(r.fold[i]) + "," + format_double(r.truth[i]) +
           "," + format_double(r.prediction[i]) + "\n";
    }
    write_file(dir / ("grade_scatter_" + features::to_string(r.family) + "_" + to_string(r.model) + ".csv"), s);
  }
  if (!r.folds.empty() && r.folds.front().selection) {
    std::string s = "fold,phase,feature,value\n";
    for (const auto& f : r.folds) {
      const auto& t = *f.selection;
      const std::string fold = std::to_string(f.fold);
      for (const auto& [n, v] : t.removed_by_vif) s += fold + ",vif," + n + "," + format_double(v) + "\n";
      s += fold + ",aic_start,," + format_double(t.initial_aic) + "\n";
      for (const auto& n : t.removed_by_aic) s += fold + ",aic," + n + ",\n";
      s += fold + ",aic_final,," + format_double(t.final_aic) + "\n";
      for (const auto& n : t.surviving) s += fold + ",kept," + n + ",\n";
    }
    write_file(dir / ("selection_" + name + ".csv"), s);
  }
}

void write_snrc_by_grade(const std::vector<GradeSummary>& summary, const fs::path& path) {
  std::string s = "grade,n,min,q1,median,q3,max\n";
  for (const auto& g : summary) {
    s += std::to_string(g.grade) + "," + std::to_string(g.n) + "," + format_double(g.min) + "," +
         format_double(g.q1) + "," + format_double(g.median) + "," + format_double(g.q3) + "," +
         format_double(g.max) + "\n";
  }
  write_file(path, s);
}

std::vector<GradeSummary> read_snrc_by_grade(const fs::path& path) {
  const auto rows = read_rows(path);
  if (rows.size() < 2) throw ConfigError("'" + path.string() + "' has no rows");
  std::vector<GradeSummary> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string ctx = path.string() + " row " + std::to_string(i);
    if (r.size() != 7) throw DataError(ctx + ": expected 7 fields");
    GradeSummary g;
    g.grade = static_cast<int>(detail::parse_double(r[0], ctx));
    g.n = static_cast<std::size_t>(detail::parse_double(r[1], ctx));
    g.min = detail::parse_double(r[2], ctx);
    g.q1 = detail::parse_double(r[3], ctx);
    g.median = detail::parse_double(r[4], ctx);
    g.q3 = detail::parse_double(r[5], ctx);
    g.max = detail::parse_double(r[6], ctx);
    out.push_back(g);
  }
  return out;
}

std::vector<std::pair<double, double>> read_grade_scatter(const fs::path& path) {
  const auto rows = read_rows(path);
  if (rows.size() < 2) throw ConfigError("'" + path.string() + "' has no rows");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string ctx = path.string() + " row " + std::to_string(i);
    if (rows[i].size() != 4) throw DataError(ctx + ": expected 4 fields");
    out.emplace_back(detail::parse_double(rows[i][2], ctx), detail::parse_double(rows[i][3], ctx));
  }
  return out;
}

std::string scatter_svg(const std::vector<std::pair<double, double>>& points, const std::string& title) {
  Frame f;
  f.x0 = 0.5;
  f.x1 = 9.5;
  double lo = 1.0, hi = 9.0;
  for (const auto& [t, p] : points) {
    lo = std::min(lo, std::floor(p));
    hi = std::max(hi, std::ceil(p));
  }
  f.y0 = lo - 0.5;
  f.y1 = hi + 0.5;
  std::ostringstream svg;
  axes(svg, f, title, "true grade", "predicted grade", 1, 9);
  svg << "<line x1=\"" << num(f.px(1)) << "\" y1=\"" << num(f.py(1)) << "\" x2=\"" << num(f.px(9))
      << "\" y2=\"" << num(f.py(9)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& [t, p] : points) {
    svg << "<circle class=\"point\" cx=\"" << num(f.px(t)) << "\" cy=\"" << num(f.py(p))
        << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string box_svg(const std::vector<GradeSummary>& summary, const std::string& title) {
  Frame f;
  f.x0 = 0.5;
  f.x1 = 9.5;
  double lo = 0.0, hi = 1.0;
  if (!summary.empty()) {
    lo = summary.front().min;
    hi = summary.front().max;
  }
  for (const auto& g : summary) {
    lo = std::min(lo, g.min);
    hi = std::max(hi, g.max);
  }
  const double pad = hi > lo ? 0.05 * (hi - lo) : 1.0;
  f.y0 = lo - pad;
  f.y1 = hi + pad;
  std::ostringstream svg;
  axes(svg, f, title, "grade", "SNR / C (dB per component)", 1, 9);
  const double half = 0.3 * (f.px(2) - f.px(1));
  for (const auto& g : summary) {
    const double x = f.px(g.grade);
    svg << "<g class=\"box\">";
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.py(g.min)) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(f.py(g.max)) << "\" stroke=\"black\"/>";
    svg << "<rect x=\"" << num(x - half) << "\" y=\"" << num(f.py(g.q3)) << "\" width=\""
        << num(2 * half) << "\" height=\"" << num(f.py(g.q1) - f.py(g.q3))
        << "\" fill=\"lightsteelblue\" stroke=\"black\"/>";
    svg << "<line x1=\"" << num(x - half) << "\" y1=\"" << num(f.py(g.median)) << "\" x2=\""
        << num(x + half) << "\" y2=\"" << num(f.py(g.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<fs::path> render_plots(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("'" + dir.string() + "' is not a report directory");
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.path().extension() != ".csv") continue;
    if (name.rfind("grade_scatter_", 0) == 0 || name == "snrc_by_grade.csv") inputs.push_back(e.path());
  }
  if (inputs.empty()) throw ConfigError("'" + dir.string() + "' has no grade_scatter or snrc_by_grade tables");
  std::sort(inputs.begin(), inputs.end());
  std::vector<fs::path> written;
  for (const auto& in : inputs) {
    fs::path out = in;
    out.replace_extension(".svg");
    const std::string name = in.stem().string();
    if (name == "snrc_by_grade") {
      write_file(out, box_svg(read_snrc_by_grade(in), "SNR/C by grade"));
    } else {
      write_file(out, scatter_svg(read_grade_scatter(in), "Held-out grade predictions (" +
                                                              name.substr(14) + ")"));
    }
    written.push_back(out);
  }
  return written;
}

}  // namespace hwdyn::eval
