#pragma once

// Lindeberg functionals of the projections W_j = s Z_{1,j} + t Z_{2,j}, where
// Z_{i,j} = (X_{i,j} - mu_i) / sigma_i.
//
// Every functional reduces to sums of truncated second moments
// E[W_j^2 1{|W_j| > c}]. Those are evaluated exactly for the two-point
// bounded model, by adaptive quadrature when W_j is a Gaussian or a Gaussian
// scale mixture, and by Monte Carlo otherwise.

#include "cltlab/models.hpp"
#include "cltlab/random.hpp"
#include "cltlab/stats.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace cltlab {

struct ProjectionSpec {
  double s = 1.0;
  double t = 1.0;
};

enum class LindebergMethod { exact, quadrature, monte_carlo };

[[nodiscard]] inline const char* to_string(LindebergMethod m) {
  switch (m) {
    case LindebergMethod::exact: return "exact";
    case LindebergMethod::quadrature: return "quadrature";
    case LindebergMethod::monte_carlo: return "monte_carlo";
  }
  return "?";
}

/// A functional value; std_error is zero unless the method is Monte Carlo.
struct LindebergEstimate {
  double value = 0.0;
  double std_error = 0.0;
  LindebergMethod method = LindebergMethod::exact;
};

/// s^2 + 2 s t rho + t^2
[[nodiscard]] inline double tau_quadratic(double s, double t, double rho) {
  return s * s + 2.0 * s * t * rho + t * t;
}

/// s^2 + 2 s t rho_bar_k + t^2 with rho_bar_k the mean of rho_jj over j <= k.
[[nodiscard]] inline double tau_k(const PairModel& model, std::int64_t k, double s, double t) {
  if (k < 1) throw std::invalid_argument("tau_k needs k >= 1");
  return tau_quadratic(s, t, rho_bar(model, NetPoint{k, k}));
}

/// 2 * integral_a^inf z^2 phi(z) dz = E[Z^2 1{|Z| > a}] for standard normal Z.
[[nodiscard]] inline double normal_tail_second_moment(double a) {
  if (!(a > 0.0)) return 1.0;
  if (a > 40.0) return 0.0;
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  // Shifted to [0, inf), the range exp_sinh integrates natively.
  const auto f = [a](double x) {
    const double z = a + x;
    return z * z * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  };
  return 2.0 * integrator.integrate(f);
}

/// Default Monte Carlo sample count for non-Gaussian, unbounded projections.
inline constexpr std::int64_t kLindebergMcDraws = 200'000;
inline constexpr std::uint64_t kLindebergMcSeed = 0x4c494e44ULL;

namespace detail {

/// E[W^2 1{|W| > c}] for W ~ N(0, v).
inline double gaussian_tsm(double v, double c) {
  if (!(v > 0.0)) return 0.0;
  return v * normal_tail_second_moment(c / std::sqrt(v));
}

/// Truncated second moment of W_j for models with a closed-form or
/// quadrature route; nullopt when only Monte Carlo applies.
inline std::optional<double> truncated_second_moment(const PairModel& model, std::int64_t j,
                                                     const ProjectionSpec& p, double c) {
  const double s = p.s;
  const double t = p.t;
  switch (model.variant()) {
    case Variant::bounded_rademacher_pair: {
      // W = +-(s + t) with total probability (1 + rho) / 2, +-(s - t) otherwise.
      const double rho = model.correlation(j);
      const double agree = s + t;
      const double differ = s - t;
      double out = 0.0;
      if (std::abs(agree) > c) out += 0.5 * (1.0 + rho) * agree * agree;
      if (std::abs(differ) > c) out += 0.5 * (1.0 - rho) * differ * differ;
      return out;
    }
    case Variant::gaussian_iid_corr:
    case Variant::gaussian_varying_schedule:
      return gaussian_tsm(tau_quadratic(s, t, model.correlation(j)), c);
    case Variant::rademacher_product:
      // W = Z (s + t S): equal mixture of N(0, (s+t)^2) and N(0, (s-t)^2).
      return 0.5 * gaussian_tsm((s + t) * (s + t), c) + 0.5 * gaussian_tsm((s - t) * (s - t), c);
    case Variant::independent_nongaussian:
      return std::nullopt;
  }
  return std::nullopt;
}

inline LindebergMethod deterministic_method(const PairModel& model) {
  return model.variant() == Variant::bounded_rademacher_pair ? LindebergMethod::exact
                                                             : LindebergMethod::quadrature;
}

/// (1 / divisor) sum_{j <= k} E[W_j^2 1{|W_j| > c}], grouped by distinct
/// correlation so iid models need one evaluation.
inline std::optional<double> deterministic_sum(const PairModel& model, const ProjectionSpec& p,
                                               std::int64_t k, double c, double divisor) {
  if (model.variant() == Variant::independent_nongaussian) return std::nullopt;
  if (model.identically_distributed()) {
    return static_cast<double>(k) * *truncated_second_moment(model, 1, p, c) / divisor;
  }
  // correlation -> (first index with it, multiplicity); indices sharing a
  // correlation share the law of W_j.
  std::map<double, std::pair<std::int64_t, std::int64_t>> groups;
  for (std::int64_t j = 1; j <= k; ++j) {
    auto [it, fresh] = groups.try_emplace(model.correlation(j), j, 0);
    ++it->second.second;
  }
  double total = 0.0;
  for (const auto& [rho, group] : groups) {
    total += static_cast<double>(group.second) *
             *truncated_second_moment(model, group.first, p, c);
  }
  return total / divisor;
}

}  // namespace detail

/// Monte Carlo estimate of (1 / divisor) sum_{j <= k} E[W_j^2 1{|W_j| > c}]
/// with j drawn uniformly, so the estimator is k W_J^2 1{...} / divisor.
[[nodiscard]] inline LindebergEstimate lindeberg_monte_carlo_sum(
    const PairModel& model, const ProjectionSpec& p, std::int64_t k, double c, double divisor,
    std::int64_t draws = kLindebergMcDraws, std::uint64_t seed = kLindebergMcSeed) {
  if (draws < 2) throw std::invalid_argument("Monte Carlo needs at least 2 draws");
  const rng::Stream picks(rng::derive(seed, 1));
  const auto kk = static_cast<std::uint64_t>(k);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t d = 0; d < draws; ++d) {
    const auto dd = static_cast<std::uint64_t>(d);
    const std::uint64_t j = model.identically_distributed() ? 1 : 1 + picks.bits(dd, 0) % kk;
    const rng::Stream stream(rng::derive(seed, 2, dd));
    const StdPair z = model.draw_standardized(stream, j);
    const double w = p.s * z.z1 + p.t * z.z2;
    const double x = std::abs(w) > c ? static_cast<double>(k) * w * w / divisor : 0.0;
    sum += x;
    sum_sq += x * x;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), LindebergMethod::monte_carlo};
}

namespace detail {
inline LindebergEstimate functional(const PairModel& model, const ProjectionSpec& p,
                                    std::int64_t k, double c, double divisor) {
  if (const auto v = deterministic_sum(model, p, k, c, divisor)) {
    return {*v, 0.0, deterministic_method(model)};
  }
  return lindeberg_monte_carlo_sum(model, p, k, c, divisor);
}
}  // namespace detail

/// L_k(eps) = sum_{j <= k} E[(k tau_k)^{-1} W_j^2 1{|W_j| > eps sqrt(k tau_k)}].
/// nullopt when tau_k = 0, where the functional is undefined.
[[nodiscard]] inline std::optional<LindebergEstimate> lindeberg_L(const PairModel& model,
                                                                  const ProjectionSpec& spec,
                                                                  std::int64_t k, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("lindeberg_L needs epsilon > 0");
  const double tau = tau_k(model, k, spec.s, spec.t);
  if (!(tau > 0.0)) return std::nullopt;
  const double scale = static_cast<double>(k) * tau;
  return detail::functional(model, spec, k, epsilon * std::sqrt(scale), scale);
}

/// Monte Carlo route for L_k, independent of the exact and quadrature routes.
[[nodiscard]] inline std::optional<LindebergEstimate> lindeberg_L_monte_carlo(
    const PairModel& model, const ProjectionSpec& spec, std::int64_t k, double epsilon,
    std::int64_t draws = kLindebergMcDraws, std::uint64_t seed = kLindebergMcSeed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("lindeberg_L needs epsilon > 0");
  const double tau = tau_k(model, k, spec.s, spec.t);
  if (!(tau > 0.0)) return std::nullopt;
  const double scale = static_cast<double>(k) * tau;
  return lindeberg_monte_carlo_sum(model, spec, k, epsilon * std::sqrt(scale), scale, draws, seed);
}

/// Unnormalized functional: sum_{j <= k} E[k^{-1} W_j^2 1{|W_j| > eps sqrt(k)}].
[[nodiscard]] inline LindebergEstimate script_L(const PairModel& model, const ProjectionSpec& spec,
                                                std::int64_t k, double epsilon) {
  if (k < 1) throw std::invalid_argument("script_L needs k >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("script_L needs epsilon > 0");
  const double kd = static_cast<double>(k);
  return detail::functional(model, spec, k, epsilon * std::sqrt(kd), kd);
}

struct LindebergReport {
  std::int64_t k = 0;
  double epsilon = 0.0;
  double tau_k = 0.0;
  double L_k = 0.0;
  double script_L = 0.0;
  double a_k_sq = 0.0;
  bool bound_check = false;
  LindebergMethod method = LindebergMethod::exact;
  double std_error = 0.0;
};

/// a_k^2 = max_j Var(W_j) / (k tau_k) together with the check
/// a_k^2 <= eps^2 + L_k(eps). nullopt when tau_k = 0.
[[nodiscard]] inline std::optional<LindebergReport> max_share_bound(const PairModel& model,
                                                                    const ProjectionSpec& spec,
                                                                    std::int64_t k,
                                                                    double epsilon) {
  const auto L = lindeberg_L(model, spec, k, epsilon);
  if (!L) return std::nullopt;
  LindebergReport r;
  r.k = k;
  r.epsilon = epsilon;
  r.tau_k = tau_k(model, k, spec.s, spec.t);
  r.L_k = L->value;
  r.method = L->method;
  r.std_error = L->std_error;
  r.script_L = script_L(model, spec, k, epsilon).value;
  double max_var = 0.0;
  if (model.identically_distributed()) {
    max_var = tau_quadratic(spec.s, spec.t, model.correlation(1));
  } else {
    for (std::int64_t j = 1; j <= k; ++j) {
      max_var = std::max(max_var, tau_quadratic(spec.s, spec.t, model.correlation(j)));
    }
  }
  r.a_k_sq = (max_var / r.tau_k) / static_cast<double>(k);
  r.bound_check = r.a_k_sq <= epsilon * epsilon + r.L_k;
  return r;
}

}  // namespace cltlab
