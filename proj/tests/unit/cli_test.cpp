#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hwdyn/cli.hpp"
#include "hwdyn/feature_table.hpp"
#include "test_util.hpp"

namespace hwdyn::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hwdyn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path small_config(const fs::path& dir) {
  const auto p = dir / "small.cfg";
  std::ofstream(p) << "n-trees = 20\nn-per-grade = 2\ndrills-per-student = 1\n";
  return p;
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({}).code, kExitUsageError);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsageError);
  EXPECT_EQ(invoke({"synth", "--seed", "abc"}).code, kExitUsageError);
}

TEST(Cli, SynthRequiresSeed) {
  const auto dir = test::scratch_dir("cli_seed");
  const auto r = invoke({"synth", "--out", dir.string()});
  EXPECT_EQ(r.code, kExitUsageError);
  EXPECT_NE(r.err.find("seed"), std::string::npos);
}

TEST(Cli, MissingInputIsUsageError) {
  const auto dir = test::scratch_dir("cli_missing");
  EXPECT_EQ(invoke({"fit", (dir / "nope.jsonl").string(), "--out", (dir / "f.jsonl").string()}).code, kExitUsageError);
  EXPECT_EQ(invoke({"evaluate", (dir / "nope.csv").string(), "--task", "grade", "--seed", "1", "--out", dir.string()}).code,
            kExitUsageError);
}

TEST(Cli, EmptyCohortIsUsageError) {
  const auto dir = test::scratch_dir("cli_empty");
  std::ofstream(dir / "empty.jsonl").close();
  EXPECT_EQ(invoke({"features", (dir / "empty.jsonl").string(), "--family", "basic", "--out", (dir / "f.csv").string()}).code,
            kExitUsageError);
}

TEST(Cli, MalformedCohortIsDataError) {
  const auto dir = test::scratch_dir("cli_malformed");
  std::ofstream(dir / "bad.jsonl") << "{\"student_id\": \n";
  EXPECT_EQ(invoke({"features", (dir / "bad.jsonl").string(), "--family", "basic", "--out", (dir / "f.csv").string()}).code,
            kExitDataError);
}

TEST(Cli, ModelTaskMismatchIsUsageError) {
  const auto dir = test::scratch_dir("cli_mismatch");
  const auto cfg = small_config(dir);
  ASSERT_EQ(invoke({"synth", "--config", cfg.string(), "--seed", "3", "--out", dir.string()}).code, kExitOk);
  ASSERT_EQ(invoke({"features", (dir / "cohort.jsonl").string(), "--family", "basic", "--out", (dir / "b.csv").string()}).code,
            kExitOk);
  EXPECT_EQ(invoke({"evaluate", (dir / "b.csv").string(), "--task", "gender", "--model", "linear", "--seed", "1",
                    "--out", (dir / "rep").string()})
                .code,
            kExitUsageError);
}

TEST(Cli, StagewisePipeline) {
  const auto dir = test::scratch_dir("cli_stages");
  const auto cfg = small_config(dir);
  auto r = invoke({"synth", "--config", cfg.string(), "--seed", "5", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  ASSERT_TRUE(fs::exists(dir / "cohort.jsonl"));
  ASSERT_TRUE(fs::exists(dir / "truth.jsonl"));
  r = invoke({"fit", (dir / "cohort.jsonl").string(), "--out", (dir / "fits.jsonl").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = invoke({"features", (dir / "cohort.jsonl").string(), "--family", "siglog", "--fits", (dir / "fits.jsonl").string(),
              "--out", (dir / "siglog.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto t = features::read_feature_csv(dir / "siglog.csv");
  EXPECT_EQ(t.n_rows(), 18u);
  r = invoke({"evaluate", (dir / "siglog.csv").string(), "--task", "grade", "--config", cfg.string(), "--seed", "2",
              "--out", (dir / "rep").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "rep" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "rep" / "snrc_by_grade.csv"));
  r = invoke({"report", (dir / "rep").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "rep" / "snrc_by_grade.svg"));
  EXPECT_TRUE(fs::exists(dir / "rep" / "grade_scatter_siglog_forest.svg"));
}

TEST(Cli, RunAllSmall) {
  const auto dir = test::scratch_dir("cli_run_all");
  const auto cfg = small_config(dir);
  const auto r = invoke({"run-all", "--config", cfg.string(), "--seed", "11", "--out", dir.string(), "--task", "grade"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"fits.jsonl", "features_basic.csv", "features_entropy.csv", "features_siglog.csv",
                        "report/metrics.csv", "report/snrc_by_grade.svg"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_NE(r.out.find("run-all"), std::string::npos);
}

TEST(Cli, SeedMakesRunsReproducible) {
  const auto a = test::scratch_dir("cli_repro_a"), b = test::scratch_dir("cli_repro_b");
  const auto cfg = small_config(a);
  ASSERT_EQ(invoke({"synth", "--config", cfg.string(), "--seed", "9", "--out", a.string()}).code, kExitOk);
  ASSERT_EQ(invoke({"synth", "--config", cfg.string(), "--seed", "9", "--out", b.string()}).code, kExitOk);
  std::ifstream fa(a / "cohort.jsonl"), fb(b / "cohort.jsonl");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, RunAllBundleByteIdenticalForSeed) {
  const auto a = test::scratch_dir("cli_bundle_a"), b = test::scratch_dir("cli_bundle_b");
  const auto cfg = small_config(a);
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(invoke({"run-all", "--config", cfg.string(), "--seed", "21", "--out", dir.string(), "--family", "siglog"}).code,
              kExitOk);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a / "report")) {
    EXPECT_EQ(slurp(e.path()), slurp(b / "report" / e.path().filename())) << e.path().filename();
    ++compared;
  }
  EXPECT_GT(compared, 5u);
  EXPECT_EQ(slurp(a / "fits.jsonl"), slurp(b / "fits.jsonl"));
}

}  // namespace
}  // namespace hwdyn::cli
