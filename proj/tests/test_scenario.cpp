#include "cltlab/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cltlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cltlab_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

const char* kSmall = R"(scenario = small
seed = 3
replications = 400
target_rho = 0
model.variant = rademacher_product
path.kind = fixed_ratio
path.p = 3
path.q = 1
path.length = 2
path.scale = 20
thresholds.energy_permutations = 30
thresholds.cf_sup = 0.2
)";

}  // namespace

TEST(Scenario, BuiltinsParseInStableOrder) {
  const auto& all = builtin_scenarios();
  ASSERT_GE(all.size(), 3u);
  EXPECT_EQ(all.front().name, "prop1_diagonal");
  bool kappa0 = false, sweep = false;
  for (const auto& s : all) {
    const auto c = s.config();
    EXPECT_EQ(c.scenario, s.name);
    EXPECT_EQ(c.description, s.description);
    kappa0 = kappa0 || s.name == "thm1_kappa0";
    sweep = sweep || s.name == "lindeberg_sweep";
  }
  EXPECT_TRUE(kappa0);
  EXPECT_TRUE(sweep);
  EXPECT_EQ(find_builtin("thm1_negative_diag")->config().expectation, Expectation::fail);
  EXPECT_EQ(find_builtin("nope"), nullptr);
}

TEST(Scenario, WritesArtifactsWithSchema) {
  const auto dir = scratch("schema");
  ScenarioResult r;
  const int rc = run_scenario(parse_config(kSmall), dir, &r);
  EXPECT_EQ(rc, kExitOk);
  const std::string csv = slurp(dir / "points.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kPointsHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("small,fixed_ratio,1,120,40,3,0,"), std::string::npos);
  const std::string cf = slurp(dir / "cf.csv");
  EXPECT_EQ(std::count(cf.begin(), cf.end(), '\n'), 170);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["status"], "completed");
  EXPECT_EQ(summary["points"].size(), 2u);
  EXPECT_TRUE(summary["points"][1]["verdicts"]["energy_tested"].get<bool>());
  EXPECT_FALSE(summary["points"][0]["verdicts"]["energy_tested"].get<bool>());
  EXPECT_EQ(summary["config_hash"].get<std::string>().size(), 16u);
}

TEST(Scenario, RerunIsByteIdentical) {
  const auto c = parse_config(kSmall);
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  EXPECT_EQ(run_scenario(c, a), run_scenario(c, b));
  EXPECT_EQ(slurp(a / "points.csv"), slurp(b / "points.csv"));
  EXPECT_EQ(slurp(a / "cf.csv"), slurp(b / "cf.csv"));
}

TEST(Scenario, ExpectedFailureMismatchExitsOne) {
  const auto c = parse_config(std::string(kSmall) + "expectation = fail\n");
  EXPECT_EQ(run_scenario(c, scratch("mismatch")), kExitMismatch);
}

TEST(Scenario, NegativeControlDetected) {
  const auto c = parse_config(R"(scenario = neg
expectation = fail
seed = 1
replications = 2000
target_rho = 0
model.variant = gaussian_iid_corr
model.rho = 0.8
path.kind = diagonal
path.length = 2
path.scale = 50
thresholds.energy_permutations = 20
thresholds.energy_cap = 500
)");
  ScenarioResult r;
  EXPECT_EQ(run_scenario(c, scratch("neg"), &r), kExitOk);
  EXPECT_FALSE(r.observed_pass);
}

TEST(Scenario, LindebergOnlyScenario) {
  const auto c = find_builtin("lindeberg_bounded")->config();
  ScenarioResult r;
  EXPECT_EQ(run_scenario(c, scratch("lb"), &r), kExitOk);
  for (const auto& p : r.points) EXPECT_EQ(p.lindeberg->L_k, 0.0);
  const std::string csv =
      slurp(std::filesystem::temp_directory_path() / "cltlab_test_lb" / "points.csv");
  EXPECT_NE(csv.find(",,,,,0,3,pass,"), std::string::npos);
}

TEST(Scenario, RuntimeFailureFlushesAbortMarker) {
  ExperimentConfig c = parse_config(kSmall);
  c.path.scale = 0;  // bypasses parse-time validation
  const auto dir = scratch("abort");
  EXPECT_EQ(run_scenario(c, dir), kExitAborted);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["status"], "aborted");
  EXPECT_FALSE(summary["error"].get<std::string>().empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "points.csv"));
}

TEST(Scenario, OutputDirResolution) {
  ExperimentConfig c = parse_config(kSmall);
  EXPECT_EQ(resolve_output_dir(c, "x/y"), std::filesystem::path("x/y"));
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("out") / "small");
  c.output_dir = "cfgdir";
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("cfgdir"));
  ::setenv(kOutputDirEnv, "/tmp/envroot", 1);
  EXPECT_EQ(resolve_output_dir(c), std::filesystem::path("/tmp/envroot") / "small");
  ::unsetenv(kOutputDirEnv);
}
