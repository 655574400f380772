#include "hwdyn/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hwdyn/error.hpp"
#include "hwdyn/ink.hpp"
#include "hwdyn/parallel.hpp"
#include "hwdyn/report.hpp"
#include "hwdyn/synth.hpp"

namespace hwdyn::cli {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create directory '" + dir.string() + "'");
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError("missing " + what + " path");
  if (!fs::is_regular_file(p)) throw ConfigError(what + " '" + p.string() + "' does not exist");
}

ink::Cohort load_nonempty_cohort(const fs::path& path) {
  require_file(path, "cohort");
  ink::Cohort c = ink::parse_cohort(path);
  if (c.students.empty()) throw ConfigError("cohort '" + path.string() + "' has no students");
  return c;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string describe(const eval::EvaluationReport& r) {
  std::string s = eval::to_string(r.task) + " / " + features::to_string(r.family) + " / " +
                  eval::to_string(r.model) + ": ";
  if (r.regression) {
    s += "R2 = " + fixed(r.regression->r2) + ", RMSE = " + fixed(r.regression->rmse) +
         " (mean-predictor RMSE " + fixed(r.baseline) + ")";
  } else {
    s += "ACC = " + fixed(r.classification->accuracy) + ", F1 = " + fixed(r.classification->f1) +
         ", AUC = " + fixed(r.classification->auc) + " (majority ACC " + fixed(r.baseline) + ")";
  }
  return s;
}

std::vector<eval::ModelChoice> resolve_models(eval::Task task, const std::vector<eval::ModelChoice>& wanted,
                                              bool strict) {
  if (wanted.empty()) return eval::models_for(task);
  std::vector<eval::ModelChoice> out;
  for (auto m : wanted) {
    try {
      eval::model_kind(task, m);
      out.push_back(m);
    } catch (const ConfigError&) {
      if (strict) throw;
    }
  }
  return out;
}

fs::path features_file(const fs::path& out, features::Family f) {
  return out / ("features_" + features::to_string(f) + ".csv");
}

synth::MaturationProfile profile_for(const PipelineConfig& cfg) {
  auto p = cfg.label_effects ? synth::MaturationProfile::defaults()
                             : synth::MaturationProfile::without_label_effects();
  p.noise_scale = cfg.noise_scale;
  return p;
}

}  // namespace

SynthPaths cmd_synth(const PipelineConfig& cfg, std::ostream& log) {
  const std::uint64_t seed = cfg.require_seed();
  ensure_dir(cfg.out);
  auto profile = profile_for(cfg);
  if (cfg.calibrate_snr_db) {
    const auto cal = synth::calibrate_noise(profile, *cfg.calibrate_snr_db, cfg.fit,
                                            synth::substream(seed, 0xCA11));
    profile.noise_scale = cal.noise_scale;
    log << "calibrated noise-scale = " << cal.noise_scale << " (sample mean SNR "
        << fixed(cal.mean_snr_db, 2) << " dB)\n";
  }
  const auto [cohort, truth] = synth::generate_cohort(profile, cfg.n_per_grade, cfg.drills_per_student, seed);
  SynthPaths paths{cfg.out / "cohort.jsonl", cfg.out / "truth.jsonl"};
  ink::write_cohort(cohort, paths.cohort);
  synth::write_ground_truth(truth, paths.truth);
  log << "synth: " << cohort.students.size() << " students x " << cfg.drills_per_student
      << " drills -> " << paths.cohort.string() << "\n";
  return paths;
}

void cmd_fit(const fs::path& cohort_path, const fs::path& out, const PipelineConfig& cfg, std::ostream& log) {
  const ink::Cohort cohort = load_nonempty_cohort(cohort_path);
  const auto fits = features::fit_cohort(cohort, cfg.fit);
  ensure_parent(out);
  features::write_fit_records(fits, out);
  const auto s = features::snr_summary(fits);
  log << "fit: " << s.n_strokes << " strokes, SNR = " << fixed(s.mean_db, 2) << " +/- "
      << fixed(s.std_db, 2) << " dB -> " << out.string() << "\n";
}

void cmd_features(const fs::path& cohort_path, features::Family family, const fs::path& out,
                  const PipelineConfig& cfg, const fs::path& fits_path, std::ostream& log) {
  const ink::Cohort cohort = load_nonempty_cohort(cohort_path);
  features::CohortFits fits;
  const features::CohortFits* use = nullptr;
  if (!fits_path.empty() && family == features::Family::siglog) {
    require_file(fits_path, "fit records");
    fits = features::read_fit_records(fits_path);
    use = &fits;
  }
  const auto table = features::compute_features(cohort, family, cfg.feature_config(), use);
  ensure_parent(out);
  features::write_feature_csv(table, out);
  log << "features: " << features::to_string(family) << ", " << table.n_rows() << " students x "
      << table.n_cols() << " columns -> " << out.string() << "\n";
}

std::vector<eval::EvaluationReport> cmd_evaluate(const std::vector<fs::path>& tables, eval::Task task,
                                                 const std::vector<eval::ModelChoice>& models,
                                                 const fs::path& out_dir, const PipelineConfig& cfg,
                                                 std::ostream& log) {
  if (tables.empty()) throw ConfigError("evaluate: no feature tables given");
  auto ecfg = cfg.evaluation_config();
  ecfg.seed = cfg.require_seed();
  const auto chosen = resolve_models(task, models, true);
  ensure_dir(out_dir);
  std::vector<eval::EvaluationReport> reports;
  for (const auto& path : tables) {
    require_file(path, "feature table");
    const auto table = features::read_feature_csv(path);
    if (table.family == features::Family::siglog) {
      eval::write_snrc_by_grade(eval::snrc_by_grade(table), out_dir / "snrc_by_grade.csv");
    }
    for (auto m : chosen) {
      auto rep = eval::run_task(table, task, m, ecfg);
      eval::write_report(rep, out_dir);
      log << "evaluate: " << describe(rep) << "\n";
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

std::vector<fs::path> cmd_report(const fs::path& dir, std::ostream& log) {
  const auto written = eval::render_plots(dir);
  for (const auto& p : written) log << "report: " << p.string() << "\n";
  return written;
}

RunAllResult cmd_run_all(const PipelineConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunAllResult result;
  const auto paths = cmd_synth(cfg, log);
  const ink::Cohort cohort = ink::parse_cohort(paths.cohort);

  const auto fits = features::fit_cohort(cohort, cfg.fit);
  features::write_fit_records(fits, cfg.out / "fits.jsonl");
  result.snr = features::snr_summary(fits);
  log << "fit: " << result.snr.n_strokes << " strokes, SNR = " << fixed(result.snr.mean_db, 2)
      << " +/- " << fixed(result.snr.std_db, 2) << " dB\n";

  std::vector<features::FeatureTable> tables;
  for (auto family : cfg.families) {
    auto table = features::compute_features(cohort, family, cfg.feature_config(), &fits);
    features::write_feature_csv(table, features_file(cfg.out, family));
    log << "features: " << features::to_string(family) << ", " << table.n_cols() << " columns\n";
    tables.push_back(std::move(table));
  }

  const fs::path report_dir = cfg.out / "report";
  ensure_dir(report_dir);
  // A stale bundle from an earlier run would leak rows into metrics.csv.
  fs::remove(report_dir / "metrics.csv");
  auto ecfg = cfg.evaluation_config();
  ecfg.seed = cfg.require_seed();
  for (const auto& table : tables) {
    if (table.family == features::Family::siglog) {
      result.snrc = eval::snrc_by_grade(table);
      eval::write_snrc_by_grade(result.snrc, report_dir / "snrc_by_grade.csv");
    }
  }
  for (auto task : cfg.tasks) {
    for (const auto& table : tables) {
      for (auto m : resolve_models(task, cfg.models, false)) {
        auto rep = eval::run_task(table, task, m, ecfg);
        eval::write_report(rep, report_dir);
        log << "evaluate: " << describe(rep) << "\n";
        result.reports.push_back(std::move(rep));
      }
    }
  }
  cmd_report(report_dir, log);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << "run-all: " << fixed(result.seconds, 1) << " s\n";
  return result;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hwdyn: handwriting dynamics pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out_path;
  std::string family_name, task_name, model_name, fits_path;
  std::string cohort_path, bundle_dir;
  std::vector<std::string> tables;
  std::optional<int> n_per_grade, drills;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config file (key = value)");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--threads", threads, "Worker thread cap (0: all cores)");
    sub->add_option("--out", out_path, "Output path");
  };

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort and its ground truth");
  common(synth_cmd);
  synth_cmd->add_option("--n-per-grade", n_per_grade, "Students per grade");
  synth_cmd->add_option("--drills", drills, "Drills per student");

  auto* fit_cmd = app.add_subcommand("fit", "Extract lognormal components from every stroke");
  common(fit_cmd);
  fit_cmd->add_option("cohort", cohort_path, "Cohort file")->required();

  auto* feat_cmd = app.add_subcommand("features", "Compute a student-level feature table");
  common(feat_cmd);
  feat_cmd->add_option("cohort", cohort_path, "Cohort file")->required();
  feat_cmd->add_option("--family", family_name, "basic | entropy | siglog")->required();
  feat_cmd->add_option("--fits", fits_path, "Reuse fit records from `hwdyn fit` (siglog)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validate a task on feature tables");
  common(eval_cmd);
  eval_cmd->add_option("tables", tables, "Feature CSV files")->required();
  eval_cmd->add_option("--task", task_name, "grade | gender | performance")->required();
  eval_cmd->add_option("--model", model_name, "linear | logistic | forest (default: both for the task)");

  auto* report_cmd = app.add_subcommand("report", "Render SVG plots of a report bundle");
  report_cmd->add_option("bundle", bundle_dir, "Report directory")->required();

  auto* all_cmd = app.add_subcommand("run-all", "synth -> fit -> features -> evaluate -> report");
  common(all_cmd);
  all_cmd->add_option("--n-per-grade", n_per_grade, "Students per grade");
  all_cmd->add_option("--drills", drills, "Drills per student");
  all_cmd->add_option("--family", family_name, "Restrict to one family");
  all_cmd->add_option("--task", task_name, "Restrict to one task");
  all_cmd->add_option("--model", model_name, "Restrict to one model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    } else {
      err << app.help();
    }
    return kExitUsageError;
  }

  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (n_per_grade) cfg.n_per_grade = *n_per_grade;
    if (drills) cfg.drills_per_student = *drills;
    if (!family_name.empty()) cfg.families = {features::parse_family(family_name)};
    if (!task_name.empty()) cfg.tasks = {eval::parse_task(task_name)};
    if (!model_name.empty()) cfg.models = {eval::parse_model(model_name)};
    cfg.validate();
    set_max_threads(cfg.threads);

    if (synth_cmd->parsed()) {
      if (!out_path.empty()) cfg.out = out_path;
      cmd_synth(cfg, out);
    } else if (fit_cmd->parsed()) {
      cmd_fit(cohort_path, out_path.empty() ? cfg.out / "fits.jsonl" : fs::path(out_path), cfg, out);
    } else if (feat_cmd->parsed()) {
      const auto family = cfg.families.front();
      cmd_features(cohort_path, family, out_path.empty() ? features_file(cfg.out, family) : fs::path(out_path),
                   cfg, fits_path, out);
    } else if (eval_cmd->parsed()) {
      std::vector<fs::path> paths(tables.begin(), tables.end());
      cmd_evaluate(paths, cfg.tasks.front(), cfg.models,
                   out_path.empty() ? cfg.out / "report" : fs::path(out_path), cfg, out);
    } else if (report_cmd->parsed()) {
      cmd_report(bundle_dir, out);
    } else if (all_cmd->parsed()) {
      if (!out_path.empty()) cfg.out = out_path;
      cmd_run_all(cfg, out);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

}  // namespace hwdyn::cli
