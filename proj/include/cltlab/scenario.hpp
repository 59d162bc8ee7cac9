#pragma once

// Scenario runner: executes a configured experiment along its path and
// writes points.csv, cf.csv and summary.json.

#include "cltlab/charfn.hpp"
#include "cltlab/config.hpp"
#include "cltlab/convergence.hpp"
#include "cltlab/lindeberg.hpp"
#include "cltlab/models.hpp"
#include "cltlab/netpath.hpp"
#include "cltlab/random.hpp"
#include "cltlab/stats.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cltlab {

/// Exit statuses of run_scenario and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAborted = 3;

inline constexpr const char* kOutputDirEnv = "CLTLAB_OUTPUT_DIR";

inline constexpr const char* kPointsHeader =
    "scenario,path_kind,idx,n1,n2,e,rho_bar,cf_sup_dist,ks_w,ks_u,energy_dist,L_k,tau_k,verdict,seed";

/// One evaluated path point.
struct PointResult {
  std::size_t idx = 0;
  NetPoint point;
  double rho_bar = 0.0;
  std::uint64_t seed = 0;
  std::optional<ConvergenceReport> report;  // statistical scenarios only
  std::optional<LindebergReport> lindeberg;  // nullopt when tau_k = 0
  double corr_y = 0.0;
  double var_w = 0.0;
  double var_u = 0.0;
  bool pass = false;
};

struct ScenarioResult {
  ExperimentConfig config;
  std::vector<PointResult> points;
  bool completed = false;
  std::string error;
  bool observed_pass = false;
  double wall_seconds = 0.0;

  [[nodiscard]] bool expectation_met() const {
    return completed && observed_pass == (config.expectation == Expectation::pass);
  }
};

namespace detail {

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline AssessParams assess_params(const ExperimentConfig& c, const PairModel& model) {
  AssessParams p;
  p.grid = CfGrid::lattice(c.grid_size, c.grid_half_width);
  p.cf_threshold = c.thresholds.cf_sup;
  p.ks_coefficient = c.thresholds.ks_coefficient;
  p.energy_permutations = c.thresholds.energy_permutations;
  p.energy_level = c.thresholds.energy_level;
  p.energy_cap = static_cast<std::size_t>(c.thresholds.energy_cap);
  p.sigma1 = model.marginal1().sigma;
  p.sigma2 = model.marginal2().sigma;
  return p;
}

}  // namespace detail

/// Runs the experiment; never throws on runtime failure but records it in
/// the result with completed = false. Results are a pure function of config.
[[nodiscard]] inline ScenarioResult execute(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult result;
  result.config = config;
  try {
    const PairModel model = config.model.build();
    const NetPath path = make_path(config.path);
    const ProjectionSpec projection{config.lindeberg.s, config.lindeberg.t};
    AssessParams params = detail::assess_params(config, model);
    bool all_pass = true;
    for (std::size_t i = 0; i < path.points.size(); ++i) {
      const NetPoint& point = path.points[i];
      const bool last = i + 1 == path.points.size();
      PointResult pr;
      pr.idx = i;
      pr.point = point;
      pr.rho_bar = rho_bar(model, point);
      pr.seed = rng::derive(config.seed, i);
      pr.lindeberg = max_share_bound(model, projection, point.n_min(), config.lindeberg.epsilon);
      if (config.statistical()) {
        const ReplicationBatch batch = replicate(model, point, config.replications, pr.seed);
        params.seed = rng::derive(pr.seed, 1);
        // The permutation test costs seconds per run, so only the final point gets a verdict.
        params.energy_permutation = last;
        pr.report = assess(batch, config.target_rho, params);
        std::vector<double> y1;
        std::vector<double> y2;
        y1.reserve(batch.stats.size());
        y2.reserve(batch.stats.size());
        for (const auto& s : batch.stats) {
          y1.push_back(s.y1);
          y2.push_back(s.y2);
        }
        pr.corr_y = sample_correlation(y1, y2);
        pr.var_w = moments(batch.w_values()).variance;
        pr.var_u = moments(batch.u_values()).variance;
        pr.pass = pr.report->verdict.all();
        if (last) all_pass = pr.pass;
      } else {
        pr.pass = pr.lindeberg && pr.lindeberg->bound_check &&
                  (!last || pr.lindeberg->L_k <= config.thresholds.lindeberg_final);
        all_pass = all_pass && pr.pass;
      }
      result.points.push_back(std::move(pr));
    }
    result.observed_pass = all_pass;
    result.completed = true;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

inline void write_points_csv(const ScenarioResult& r, std::ostream& out) {
  using detail::csv_number;
  out << kPointsHeader << '\n';
  const std::string kind(to_string(r.config.path.kind));
  for (const auto& p : r.points) {
    out << r.config.scenario << ',' << kind << ',' << p.idx << ',' << p.point.n1 << ','
        << p.point.n2 << ',' << csv_number(p.point.e()) << ',' << csv_number(p.rho_bar) << ',';
    if (p.report) {
      out << csv_number(p.report->cf_sup_dist) << ',' << csv_number(p.report->ks_w) << ','
          << csv_number(p.report->ks_u) << ',' << csv_number(p.report->energy_dist) << ',';
    } else {
      out << ",,,,";
    }
    if (p.lindeberg) {
      out << csv_number(p.lindeberg->L_k) << ',' << csv_number(p.lindeberg->tau_k) << ',';
    } else {
      out << ",,";
    }
    out << (p.pass ? "pass" : "fail") << ',' << p.seed << '\n';
  }
}

inline void write_cf_csv(const ScenarioResult& r, std::ostream& out) {
  using detail::csv_number;
  out << "s,t,re,im\n";
  if (r.points.empty() || !r.points.back().report) return;
  const EmpiricalCf& cf = r.points.back().report->cf;
  for (std::size_t g = 0; g < cf.grid.size(); ++g) {
    const auto [s, t] = cf.grid.points()[g];
    out << csv_number(s) << ',' << csv_number(t) << ',' << csv_number(cf.values[g].real()) << ','
        << csv_number(cf.values[g].imag()) << '\n';
  }
}

[[nodiscard]] inline nlohmann::ordered_json summary_json(const ScenarioResult& r) {
  const ExperimentConfig& c = r.config;
  nlohmann::ordered_json j;
  j["scenario"] = c.scenario;
  j["description"] = c.description;
  j["status"] = r.completed ? "completed" : "aborted";
  if (!r.completed) j["error"] = r.error;
  j["expectation"] = c.expectation == Expectation::pass ? "pass" : "fail";
  j["observed"] = r.observed_pass ? "pass" : "fail";
  j["expectation_met"] = r.expectation_met();
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
  j["config_hash"] = hash;
  j["seed"] = c.seed;
  j["replications"] = c.replications;
  j["target_rho"] = c.target_rho;
  j["model"] = c.model.build().id();
  j["path"] = {{"kind", std::string(to_string(c.path.kind))},
               {"length", c.path.length},
               {"scale", c.path.scale},
               {"p", c.path.p},
               {"q", c.path.q},
               {"gamma", c.path.gamma}};
  j["thresholds"] = {{"cf_sup", c.thresholds.cf_sup},
                     {"ks_coefficient", c.thresholds.ks_coefficient},
                     {"ks", c.statistical() ? c.thresholds.ks_coefficient /
                                                  std::sqrt(static_cast<double>(c.replications))
                                            : 0.0},
                     {"energy_permutations", c.thresholds.energy_permutations},
                     {"energy_level", c.thresholds.energy_level},
                     {"energy_cap", c.thresholds.energy_cap},
                     {"lindeberg_final", c.thresholds.lindeberg_final}};
  j["lindeberg"] = {{"s", c.lindeberg.s}, {"t", c.lindeberg.t}, {"epsilon", c.lindeberg.epsilon}};
  auto points = nlohmann::ordered_json::array();
  for (const auto& p : r.points) {
    nlohmann::ordered_json pj;
    pj["idx"] = p.idx;
    pj["n1"] = p.point.n1;
    pj["n2"] = p.point.n2;
    pj["e"] = p.point.e();
    pj["rho_bar"] = p.rho_bar;
    pj["seed"] = p.seed;
    pj["verdict"] = p.pass ? "pass" : "fail";
    if (p.report) {
      const auto& rep = *p.report;
      pj["cf_sup_dist"] = rep.cf_sup_dist;
      pj["ks_w"] = rep.ks_w;
      pj["ks_u"] = rep.ks_u;
      pj["w_variance_target"] = rep.w_variance_target;
      pj["u_variance_target"] = rep.u_variance_target;
      pj["energy_dist"] = rep.energy_dist;
      pj["corr_y"] = p.corr_y;
      pj["var_w"] = p.var_w;
      pj["var_u"] = p.var_u;
      pj["verdicts"] = {{"cf", rep.verdict.cf},
                        {"ks_w", rep.verdict.ks_w},
                        {"ks_u", rep.verdict.ks_u},
                        {"energy_tested", rep.verdict.energy_tested}};
      if (rep.verdict.energy_tested) {
        pj["energy_quantile"] = rep.energy_quantile;
        pj["verdicts"]["energy"] = rep.verdict.energy;
      }
    }
    if (p.lindeberg) {
      const auto& l = *p.lindeberg;
      pj["lindeberg"] = {{"k", l.k},
                         {"tau_k", l.tau_k},
                         {"L_k", l.L_k},
                         {"script_L", l.script_L},
                         {"a_k_sq", l.a_k_sq},
                         {"bound_check", l.bound_check},
                         {"method", to_string(l.method)},
                         {"std_error", l.std_error}};
    }
    points.push_back(std::move(pj));
  }
  j["points"] = std::move(points);
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

/// Writes the three artifacts into `dir`, creating it if needed.
inline void write_artifacts(const ScenarioResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "points.csv", std::ios::binary);
    write_points_csv(r, out);
  }
  {
    std::ofstream out(dir / "cf.csv", std::ios::binary);
    write_cf_csv(r, out);
  }
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << summary_json(r).dump(2) << '\n';
  }
}

/// Output directory: explicit override, then the environment variable, then
/// the config's output_dir, then out/<scenario>.
[[nodiscard]] inline std::filesystem::path resolve_output_dir(const ExperimentConfig& c,
                                                              const std::string& override_dir = {}) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    return std::filesystem::path(env) / c.scenario;
  }
  if (!c.output_dir.empty()) return c.output_dir;
  return std::filesystem::path("out") / c.scenario;
}

/// Executes, writes artifacts, and maps the outcome to an exit status.
inline int run_scenario(const ExperimentConfig& config, const std::filesystem::path& dir,
                        ScenarioResult* out = nullptr) {
  ScenarioResult r = execute(config);
  write_artifacts(r, dir);
  const int status = !r.completed ? kExitAborted : r.expectation_met() ? kExitOk : kExitMismatch;
  if (out != nullptr) *out = std::move(r);
  return status;
}

struct BuiltinScenario {
  std::string name;
  std::string description;
  std::string config_text;

  [[nodiscard]] ExperimentConfig config() const { return parse_config(config_text); }
};

/// Built-in acceptance scenarios in their stable order.
[[nodiscard]] inline const std::vector<BuiltinScenario>& builtin_scenarios() {
  static const std::vector<BuiltinScenario> all = {
      {"prop1_diagonal", "Gaussian rho=0.5 on the diagonal converges to the correlated limit",
       R"(scenario = prop1_diagonal
description = Gaussian rho=0.5 on the diagonal converges to the correlated limit
expectation = pass
seed = 101
replications = 20000
target_rho = 0.5
model.variant = gaussian_iid_corr
model.rho = 0.5
path.kind = diagonal
path.length = 4
path.scale = 500
)"},
      {"thm1_negative_diag", "Gaussian rho=0.8 on the diagonal must fail against Phi x Phi",
       R"(scenario = thm1_negative_diag
description = Gaussian rho=0.8 on the diagonal must fail against Phi x Phi
expectation = fail
seed = 102
replications = 20000
target_rho = 0
model.variant = gaussian_iid_corr
model.rho = 0.8
path.kind = diagonal
path.length = 2
path.scale = 1000
)"},
      {"thm1_positive_diag", "Uncorrelated dependent pair on the diagonal reaches Phi x Phi",
       R"(scenario = thm1_positive_diag
description = Uncorrelated dependent pair on the diagonal reaches Phi x Phi
expectation = pass
seed = 103
replications = 20000
target_rho = 0
model.variant = rademacher_product
path.kind = diagonal
path.length = 2
path.scale = 1000
)"},
      {"thm1_positive_ratio2", "Uncorrelated dependent pair along n1 = 2 n2 reaches Phi x Phi",
       R"(scenario = thm1_positive_ratio2
description = Uncorrelated dependent pair along n1 = 2 n2 reaches Phi x Phi
expectation = pass
seed = 104
replications = 20000
target_rho = 0
model.variant = rademacher_product
path.kind = fixed_ratio
path.p = 2
path.q = 1
path.length = 2
path.scale = 500
)"},
      {"thm1_positive_kappa0", "Uncorrelated dependent pair along (k, k^2) reaches Phi x Phi",
       R"(scenario = thm1_positive_kappa0
description = Uncorrelated dependent pair along (k, k^2) reaches Phi x Phi
expectation = pass
seed = 105
replications = 20000
target_rho = 0
model.variant = rademacher_product
path.kind = power
path.gamma = 2
path.length = 4
path.scale = 500
)"},
      {"thm1_kappa0", "Gaussian rho=0.8 along (k, k^2): rho_bar vanishes and Phi x Phi is reached",
       R"(scenario = thm1_kappa0
description = Gaussian rho=0.8 along (k, k^2): rho_bar vanishes and Phi x Phi is reached
expectation = pass
seed = 106
replications = 20000
target_rho = 0
model.variant = gaussian_iid_corr
model.rho = 0.8
path.kind = power
path.gamma = 2
path.length = 4
path.scale = 500
)"},
      {"thm1_alternating", "Correlations alternating +-0.9 average out on the diagonal",
       R"(scenario = thm1_alternating
description = Correlations alternating +-0.9 average out on the diagonal
expectation = pass
seed = 107
replications = 20000
target_rho = 0
model.variant = gaussian_varying_schedule
model.schedule = alternating
model.schedule_amplitude = 0.9
path.kind = diagonal
path.length = 2
path.scale = 1000
)"},
      {"lindeberg_sweep", "Lindeberg functional and max-share bound along a Gaussian diagonal",
       R"(scenario = lindeberg_sweep
description = Lindeberg functional and max-share bound along a Gaussian diagonal
expectation = pass
seed = 108
replications = 0
model.variant = gaussian_varying_schedule
model.schedule = alternating
model.schedule_amplitude = 0.9
path.kind = diagonal
path.length = 4
path.scale = 2500
lindeberg.s = 1
lindeberg.t = 1
lindeberg.epsilon = 0.1
)"},
      {"lindeberg_bounded", "Bounded pair: the Lindeberg functional vanishes exactly",
       R"(scenario = lindeberg_bounded
description = Bounded pair: the Lindeberg functional vanishes exactly
expectation = pass
seed = 109
replications = 0
model.variant = bounded_rademacher_pair
model.rho = 0.5
path.kind = diagonal
path.length = 5
path.scale = 3
lindeberg.s = 1
lindeberg.t = 1
lindeberg.epsilon = 1
thresholds.lindeberg_final = 1e-300
)"},
  };
  return all;
}

[[nodiscard]] inline const BuiltinScenario* find_builtin(const std::string& name) {
  for (const auto& s : builtin_scenarios()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

/// Runs every built-in scenario into root/<name>; writes one line per
/// scenario to `log`. Returns kExitOk iff every expectation is met.
inline int verify_all(const std::filesystem::path& root, std::ostream& log) {
  int status = kExitOk;
  for (const auto& s : builtin_scenarios()) {
    const ExperimentConfig c = s.config();
    ScenarioResult r;
    const int rc = run_scenario(c, root / s.name, &r);
    char line[200];
    std::snprintf(line, sizeof line, "%-22s expected=%-4s observed=%-4s %s (%.1f s)\n",
                  s.name.c_str(), c.expectation == Expectation::pass ? "pass" : "fail",
                  r.completed ? (r.observed_pass ? "pass" : "fail") : "n/a",
                  rc == kExitOk ? "OK" : rc == kExitAborted ? "ABORTED" : "MISMATCH",
                  r.wall_seconds);
    log << line << std::flush;
    if (rc != kExitOk && status == kExitOk) status = rc;
  }
  return status;
}

}  // namespace cltlab
