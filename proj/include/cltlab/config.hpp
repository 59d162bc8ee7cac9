#pragma once

// Experiment configuration: flat "key = value" text with dotted sections.
// Unknown or repeated keys are rejected.

#include "cltlab/models.hpp"
#include "cltlab/netpath.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cltlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Expectation { pass, fail };

struct Thresholds {
  double cf_sup = 0.03;
  double ks_coefficient = 1.63;
  int energy_permutations = 200;
  double energy_level = 0.99;
  std::int64_t energy_cap = 5000;
  double lindeberg_final = 1e-3;
};

struct ModelConfig {
  Variant variant = Variant::gaussian_iid_corr;
  double rho = 0.0;
  double mu1 = 0.0;
  double sigma1 = 1.0;
  double mu2 = 0.0;
  double sigma2 = 1.0;
  MarginalFamily marginal1 = MarginalFamily::exponential;
  MarginalFamily marginal2 = MarginalFamily::uniform;
  ScheduleKind schedule = ScheduleKind::constant;
  double schedule_amplitude = 0.0;
  double schedule_exponent = 0.0;

  [[nodiscard]] PairModel build() const {
    switch (variant) {
      case Variant::gaussian_iid_corr:
        return PairModel::gaussian_iid_corr(rho, mu1, sigma1, mu2, sigma2);
      case Variant::rademacher_product:
        return PairModel::rademacher_product(mu1, sigma1, mu2, sigma2);
      case Variant::gaussian_varying_schedule:
        return PairModel::gaussian_varying_schedule(
            Schedule{schedule, schedule_amplitude, schedule_exponent}, mu1, sigma1, mu2, sigma2);
      case Variant::bounded_rademacher_pair:
        return PairModel::bounded_rademacher_pair(rho, mu1, sigma1, mu2, sigma2);
      case Variant::independent_nongaussian:
        return PairModel::independent_nongaussian(MarginalSpec{marginal1, mu1, sigma1, true},
                                                  MarginalSpec{marginal2, mu2, sigma2, true});
    }
    throw ConfigError("unhandled model variant");
  }
};

struct LindebergConfig {
  double s = 1.0;
  double t = 1.0;
  double epsilon = 0.5;
};

struct ExperimentConfig {
  std::string scenario;
  std::string description;
  Expectation expectation = Expectation::pass;
  ModelConfig model;
  PathSpec path;
  std::int64_t replications = 0;  // 0: no Monte Carlo, Lindeberg diagnostics only
  int grid_size = 13;
  double grid_half_width = 3.0;
  std::uint64_t seed = 0;
  double target_rho = 0.0;
  Thresholds thresholds;
  LindebergConfig lindeberg;
  std::string output_dir;

  [[nodiscard]] bool statistical() const { return replications > 0; }

  /// Every key with its effective value, sorted; the input to hash().
  [[nodiscard]] std::string canonical() const;
  /// FNV-1a of canonical().
  [[nodiscard]] std::uint64_t hash() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("key '" + key + "': cannot parse '" + text + "' as a number");
  }
  return value;
}

}  // namespace detail

inline std::string ExperimentConfig::canonical() const {
  using detail::format_double;
  std::map<std::string, std::string> kv;
  kv["scenario"] = scenario;
  kv["description"] = description;
  kv["expectation"] = expectation == Expectation::pass ? "pass" : "fail";
  kv["seed"] = std::to_string(seed);
  kv["replications"] = std::to_string(replications);
  kv["target_rho"] = format_double(target_rho);
  kv["model.variant"] = std::string(to_string(model.variant));
  kv["model.rho"] = format_double(model.rho);
  kv["model.mu1"] = format_double(model.mu1);
  kv["model.sigma1"] = format_double(model.sigma1);
  kv["model.mu2"] = format_double(model.mu2);
  kv["model.sigma2"] = format_double(model.sigma2);
  kv["model.marginal1"] = std::string(to_string(model.marginal1));
  kv["model.marginal2"] = std::string(to_string(model.marginal2));
  kv["model.schedule"] = std::string(to_string(model.schedule));
  kv["model.schedule_amplitude"] = format_double(model.schedule_amplitude);
  kv["model.schedule_exponent"] = format_double(model.schedule_exponent);
  kv["path.kind"] = std::string(to_string(path.kind));
  kv["path.length"] = std::to_string(path.length);
  kv["path.scale"] = std::to_string(path.scale);
  kv["path.p"] = std::to_string(path.p);
  kv["path.q"] = std::to_string(path.q);
  kv["path.gamma"] = format_double(path.gamma);
  kv["grid.size"] = std::to_string(grid_size);
  kv["grid.half_width"] = format_double(grid_half_width);
  kv["thresholds.cf_sup"] = format_double(thresholds.cf_sup);
  kv["thresholds.ks_coefficient"] = format_double(thresholds.ks_coefficient);
  kv["thresholds.energy_permutations"] = std::to_string(thresholds.energy_permutations);
  kv["thresholds.energy_level"] = format_double(thresholds.energy_level);
  kv["thresholds.energy_cap"] = std::to_string(thresholds.energy_cap);
  kv["thresholds.lindeberg_final"] = format_double(thresholds.lindeberg_final);
  kv["lindeberg.s"] = format_double(lindeberg.s);
  kv["lindeberg.t"] = format_double(lindeberg.t);
  kv["lindeberg.epsilon"] = format_double(lindeberg.epsilon);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

inline std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Checks cross-field constraints; throws ConfigError.
inline void validate(const ExperimentConfig& c) {
  if (c.scenario.empty()) throw ConfigError("missing key 'scenario'");
  if (c.replications < 0 || (c.replications > 0 && c.replications < 100)) {
    throw ConfigError("replications must be 0 (diagnostics only) or >= 100");
  }
  if (c.grid_size < 1 || c.grid_size % 2 == 0) throw ConfigError("grid.size must be a positive odd number");
  if (!(c.grid_half_width > 0.0)) throw ConfigError("grid.half_width must be > 0");
  if (!(std::abs(c.target_rho) <= 1.0)) throw ConfigError("target_rho must lie in [-1, 1]");
  if (!(c.thresholds.cf_sup > 0.0)) throw ConfigError("thresholds.cf_sup must be > 0");
  if (!(c.thresholds.ks_coefficient > 0.0)) throw ConfigError("thresholds.ks_coefficient must be > 0");
  if (c.thresholds.energy_permutations < 1) throw ConfigError("thresholds.energy_permutations must be >= 1");
  if (!(c.thresholds.energy_level > 0.0 && c.thresholds.energy_level < 1.0)) {
    throw ConfigError("thresholds.energy_level must lie in (0, 1)");
  }
  if (c.thresholds.energy_cap < 2) throw ConfigError("thresholds.energy_cap must be >= 2");
  if (!(c.thresholds.lindeberg_final > 0.0)) throw ConfigError("thresholds.lindeberg_final must be > 0");
  if (!(c.lindeberg.epsilon > 0.0)) throw ConfigError("lindeberg.epsilon must be > 0");
  if (!std::isfinite(c.lindeberg.s) || !std::isfinite(c.lindeberg.t)) {
    throw ConfigError("lindeberg.s and lindeberg.t must be finite");
  }
  try {
    (void)c.model.build();
    (void)make_path(c.path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Parses and validates configuration text.
[[nodiscard]] inline ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = detail::trim(std::string_view(body).substr(0, eq));
    std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }

  ExperimentConfig c;
  using detail::parse_number;
  const auto enum_value = [](const std::string& key, auto parse, const std::string& v) {
    try {
      return parse(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
  };
  for (const auto& [key, v] : kv) {
    if (key == "scenario") c.scenario = v;
    else if (key == "description") c.description = v;
    else if (key == "expectation") {
      if (v == "pass") c.expectation = Expectation::pass;
      else if (v == "fail") c.expectation = Expectation::fail;
      else throw ConfigError("key 'expectation' must be pass or fail");
    }
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "replications") c.replications = parse_number<std::int64_t>(key, v);
    else if (key == "target_rho") c.target_rho = parse_number<double>(key, v);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "model.variant") c.model.variant = enum_value(key, parse_variant, v);
    else if (key == "model.rho") c.model.rho = parse_number<double>(key, v);
    else if (key == "model.mu1") c.model.mu1 = parse_number<double>(key, v);
    else if (key == "model.sigma1") c.model.sigma1 = parse_number<double>(key, v);
    else if (key == "model.mu2") c.model.mu2 = parse_number<double>(key, v);
    else if (key == "model.sigma2") c.model.sigma2 = parse_number<double>(key, v);
    else if (key == "model.marginal1") c.model.marginal1 = enum_value(key, parse_marginal_family, v);
    else if (key == "model.marginal2") c.model.marginal2 = enum_value(key, parse_marginal_family, v);
    else if (key == "model.schedule") c.model.schedule = enum_value(key, parse_schedule_kind, v);
    else if (key == "model.schedule_amplitude") c.model.schedule_amplitude = parse_number<double>(key, v);
    else if (key == "model.schedule_exponent") c.model.schedule_exponent = parse_number<double>(key, v);
    else if (key == "path.kind") c.path.kind = enum_value(key, parse_path_kind, v);
    else if (key == "path.length") c.path.length = parse_number<std::int64_t>(key, v);
    else if (key == "path.scale") c.path.scale = parse_number<std::int64_t>(key, v);
    else if (key == "path.p") c.path.p = parse_number<std::int64_t>(key, v);
    else if (key == "path.q") c.path.q = parse_number<std::int64_t>(key, v);
    else if (key == "path.gamma") c.path.gamma = parse_number<double>(key, v);
    else if (key == "grid.size") c.grid_size = parse_number<int>(key, v);
    else if (key == "grid.half_width") c.grid_half_width = parse_number<double>(key, v);
    else if (key == "thresholds.cf_sup") c.thresholds.cf_sup = parse_number<double>(key, v);
    else if (key == "thresholds.ks_coefficient") c.thresholds.ks_coefficient = parse_number<double>(key, v);
    else if (key == "thresholds.energy_permutations") c.thresholds.energy_permutations = parse_number<int>(key, v);
    else if (key == "thresholds.energy_level") c.thresholds.energy_level = parse_number<double>(key, v);
    else if (key == "thresholds.energy_cap") c.thresholds.energy_cap = parse_number<std::int64_t>(key, v);
    else if (key == "thresholds.lindeberg_final") c.thresholds.lindeberg_final = parse_number<double>(key, v);
    else if (key == "lindeberg.s") c.lindeberg.s = parse_number<double>(key, v);
    else if (key == "lindeberg.t") c.lindeberg.t = parse_number<double>(key, v);
    else if (key == "lindeberg.epsilon") c.lindeberg.epsilon = parse_number<double>(key, v);
    else throw ConfigError("unknown key '" + key + "'");
  }
  for (const char* required : {"scenario", "seed", "replications", "model.variant", "path.kind",
                               "path.length", "path.scale"}) {
    if (!kv.contains(required)) throw ConfigError(std::string("missing key '") + required + "'");
  }
  validate(c);
  return c;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace cltlab
