#pragma once

#include "cltlab/charfn.hpp"
#include "cltlab/netpath.hpp"
#include "cltlab/random.hpp"
#include "cltlab/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cltlab {

using Sample2 = std::pair<double, double>;

/// sup over the grid of |emp(s, t) - psi_rho(s, t)|.
[[nodiscard]] inline double cf_sup_distance(const EmpiricalCf& emp, double rho) {
  double sup = 0.0;
  for (std::size_t g = 0; g < emp.values.size(); ++g) {
    const auto [s, t] = emp.grid.points()[g];
    sup = std::max(sup, std::abs(emp.values[g] - cf_psi_rho(s, t, rho)));
  }
  return sup;
}

/// Standard normal CDF.
[[nodiscard]] inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// sup_x |F_n(x) - G(x)| with G the CDF of N(0, theta); theta = 0 compares
/// against the point mass at 0.
[[nodiscard]] inline double ks_statistic(std::span<const double> values, double theta) {
  if (values.empty()) throw std::invalid_argument("ks_statistic: no values");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw std::invalid_argument("ks_statistic: theta must be >= 0");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("ks_statistic: non-finite value");
  }
  const double n = static_cast<double>(values.size());
  if (theta == 0.0) {
    const auto neg = std::count_if(values.begin(), values.end(), [](double v) { return v < 0.0; });
    const auto pos = std::count_if(values.begin(), values.end(), [](double v) { return v > 0.0; });
    return static_cast<double>(std::max(neg, pos)) / n;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double scale = std::sqrt(theta);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i] / scale);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample energy statistic (n m / (n + m)) (2 E|X - Y| - E|X - X'| - E|Y - Y'|).
[[nodiscard]] inline double energy_statistic(std::span<const Sample2> a, std::span<const Sample2> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("energy_statistic: empty sample");
  const auto mean_distance = [](std::span<const Sample2> x, std::span<const Sample2> y) {
    double total = 0.0;
    for (const auto& [x1, x2] : x) {
      double row = 0.0;
      for (const auto& [y1, y2] : y) {
        const double d1 = x1 - y1;
        const double d2 = x2 - y2;
        row += std::sqrt(d1 * d1 + d2 * d2);
      }
      total += row;
    }
    return total / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  };
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  return n * m / (n + m) * (2.0 * mean_distance(a, b) - mean_distance(a, a) - mean_distance(b, b));
}

/// Largest batch fed to the O(n^2) energy computations.
inline constexpr std::size_t kEnergyCap = 5000;

/// At most `cap` points of `samples`, chosen by a seeded partial shuffle.
[[nodiscard]] inline std::vector<Sample2> subsample(std::span<const Sample2> samples,
                                                    std::size_t cap, std::uint64_t seed) {
  std::vector<Sample2> out(samples.begin(), samples.end());
  if (out.size() <= cap) return out;
  const rng::Stream stream(seed);
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.bits(i, 0) % (out.size() - i));
    std::swap(out[i], out[j]);
  }
  out.resize(cap);
  return out;
}

/// n draws from the standard bivariate normal with correlation rho.
[[nodiscard]] inline std::vector<Sample2> bivariate_normal_sample(std::size_t n, double rho,
                                                                  std::uint64_t seed) {
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("bivariate_normal_sample: |rho| > 1");
  const rng::Stream stream(seed);
  const double c = std::sqrt(1.0 - rho * rho);
  std::vector<Sample2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = stream.normal_pair(i, 0);
    out.emplace_back(a, rho * a + c * b);
  }
  return out;
}

/// Seed tags for the pieces of an energy comparison.
inline constexpr std::uint64_t kSubsampleTag = 1;
inline constexpr std::uint64_t kReferenceTag = 2;
inline constexpr std::uint64_t kPermutationTag = 3;

/// Energy statistic between the (capped) batch and an equal-size reference
/// sample from the bivariate normal with correlation rho.
[[nodiscard]] inline double energy_distance(std::span<const Sample2> samples, double rho,
                                            std::uint64_t seed, std::size_t cap = kEnergyCap) {
  if (samples.size() < 2) throw std::invalid_argument("energy_distance needs >= 2 samples");
  const auto batch = subsample(samples, cap, rng::derive(seed, kSubsampleTag));
  const auto reference = bivariate_normal_sample(batch.size(), rho, rng::derive(seed, kReferenceTag));
  return energy_statistic(batch, reference);
}

struct EnergyTest {
  double statistic = 0.0;
  double quantile = 0.0;  // permutation quantile at the requested level
  double p_value = 1.0;
  bool below = false;     // statistic < quantile
  std::size_t n_used = 0;
};

/// Permutation test of equal laws for two samples. The permutation
/// statistics use T = -(n m / N) c' D~ c, with D~ the double-centered
/// distance matrix and c the group contrast vector (1/n on the first group,
/// -1/m on the second); D~ is held in single precision.
[[nodiscard]] inline EnergyTest energy_permutation_test(std::span<const Sample2> a,
                                                        std::span<const Sample2> b,
                                                        int permutations, double level,
                                                        std::uint64_t seed) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("energy test needs >= 2 points per sample");
  if (permutations < 1) throw std::invalid_argument("energy test needs >= 1 permutation");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("energy test level must be in (0, 1)");
  const auto n = static_cast<Eigen::Index>(a.size());
  const auto m = static_cast<Eigen::Index>(b.size());
  const Eigen::Index total = n + m;
  std::vector<Sample2> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());

  Eigen::MatrixXf dist(total, total);
  Eigen::VectorXd row_mean = Eigen::VectorXd::Zero(total);
  for (Eigen::Index j = 0; j < total; ++j) {
    const auto [xj, yj] = pooled[static_cast<std::size_t>(j)];
    dist(j, j) = 0.0f;
    for (Eigen::Index i = j + 1; i < total; ++i) {
      const auto [xi, yi] = pooled[static_cast<std::size_t>(i)];
      const double d = std::sqrt((xi - xj) * (xi - xj) + (yi - yj) * (yi - yj));
      dist(i, j) = static_cast<float>(d);
      row_mean(i) += d;
      row_mean(j) += d;
    }
  }
  row_mean /= static_cast<double>(total);
  const double grand = row_mean.mean();
  for (Eigen::Index j = 0; j < total; ++j) {
    for (Eigen::Index i = j; i < total; ++i) {
      dist(i, j) = static_cast<float>(static_cast<double>(dist(i, j)) - row_mean(i) - row_mean(j) + grand);
    }
  }

  Eigen::MatrixXf contrasts = Eigen::MatrixXf::Zero(total, permutations);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
  const float in_a = static_cast<float>(1.0 / static_cast<double>(n));
  const float in_b = static_cast<float>(-1.0 / static_cast<double>(m));
  for (int p = 0; p < permutations; ++p) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const rng::Stream stream(rng::derive(seed, static_cast<std::uint64_t>(p)));
    for (Eigen::Index i = total - 1; i > 0; --i) {
      const auto k = static_cast<Eigen::Index>(stream.bits(static_cast<std::uint64_t>(i), 0) %
                                               static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index i = 0; i < total; ++i) {
      contrasts(order[static_cast<std::size_t>(i)], p) = i < n ? in_a : in_b;
    }
  }
  const Eigen::MatrixXf product = dist.selfadjointView<Eigen::Lower>() * contrasts;
  const double factor = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(total);
  std::vector<double> perm_stats(static_cast<std::size_t>(permutations));
  for (int p = 0; p < permutations; ++p) {
    double q = 0.0;
    for (Eigen::Index i = 0; i < total; ++i) {
      q += static_cast<double>(contrasts(i, p)) * static_cast<double>(product(i, p));
    }
    perm_stats[static_cast<std::size_t>(p)] = -factor * q;
  }

  EnergyTest out;
  out.n_used = a.size();
  out.statistic = energy_statistic(a, b);
  std::vector<double> sorted = perm_stats;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(permutations)));
  out.quantile = sorted[std::min(sorted.size(), std::max<std::size_t>(rank, 1)) - 1];
  const auto exceed = std::count_if(perm_stats.begin(), perm_stats.end(),
                                    [&](double v) { return v >= out.statistic; });
  out.p_value = static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1);
  out.below = out.statistic < out.quantile;
  return out;
}

/// energy_distance plus its permutation quantile.
[[nodiscard]] inline EnergyTest energy_test(std::span<const Sample2> samples, double rho,
                                            std::uint64_t seed, int permutations = 200,
                                            double level = 0.99, std::size_t cap = kEnergyCap) {
  if (samples.size() < 2) throw std::invalid_argument("energy_test needs >= 2 samples");
  const auto batch = subsample(samples, cap, rng::derive(seed, kSubsampleTag));
  const auto reference = bivariate_normal_sample(batch.size(), rho, rng::derive(seed, kReferenceTag));
  return energy_permutation_test(batch, reference, permutations, level,
                                 rng::derive(seed, kPermutationTag));
}

/// Thresholds and settings for assess().
struct AssessParams {
  CfGrid grid = CfGrid::lattice();
  double cf_threshold = 0.03;
  double ks_coefficient = 1.63;  // KS threshold = coefficient / sqrt(R)
  int energy_permutations = 200;
  double energy_level = 0.99;
  std::size_t energy_cap = kEnergyCap;
  bool energy_permutation = true;  // false: statistic only, no verdict
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  std::uint64_t seed = 0;

  [[nodiscard]] double ks_threshold(std::size_t replications) const {
    return ks_coefficient / std::sqrt(static_cast<double>(replications));
  }
};

struct Verdicts {
  bool cf = false;
  bool ks_w = false;
  bool ks_u = false;
  bool energy = false;
  bool energy_tested = false;

  [[nodiscard]] bool all() const { return cf && ks_w && ks_u && (energy || !energy_tested); }
};

struct ConvergenceReport {
  NetPoint point;
  double cf_sup_dist = 0.0;
  double ks_w = 0.0;
  double ks_u = 0.0;
  double energy_dist = 0.0;
  double energy_quantile = 0.0;
  double target_rho = 0.0;
  double w_variance_target = 1.0;  // theta of the N_theta law used for ks_w
  double u_variance_target = 1.0;
  EmpiricalCf cf;
  Verdicts verdict;
};

/// Distances of a batch from the limit laws for correlation target_rho:
/// (y1, y2) against the bivariate normal with that correlation, W against
/// N(1 - rho*) and U against N(1 + rho*), with rho* taken at the batch's e.
[[nodiscard]] inline ConvergenceReport assess(const ReplicationBatch& batch, double target_rho,
                                              const AssessParams& params) {
  if (batch.stats.empty()) throw std::invalid_argument("assess: empty batch");
  ConvergenceReport r;
  r.point = batch.point;
  r.target_rho = target_rho;
  const auto ys = batch.y_pairs();
  r.cf = empirical_cf(ys, params.grid);
  r.cf_sup_dist = cf_sup_distance(r.cf, target_rho);

  const double e = batch.point.e();
  const double shift = e == 1.0 ? rho_star(target_rho, params.sigma1, params.sigma2)
                                : cross_weight(params.sigma1, params.sigma2, e) * target_rho;
  r.w_variance_target = 1.0 - shift;
  r.u_variance_target = 1.0 + shift;
  const auto w = batch.w_values();
  const auto u = batch.u_values();
  r.ks_w = ks_statistic(w, r.w_variance_target);
  r.ks_u = ks_statistic(u, r.u_variance_target);

  const double ks_limit = params.ks_threshold(batch.stats.size());
  r.verdict.cf = r.cf_sup_dist <= params.cf_threshold;
  r.verdict.ks_w = r.ks_w <= ks_limit;
  r.verdict.ks_u = r.ks_u <= ks_limit;

  if (ys.size() >= 2) {
    if (params.energy_permutation) {
      const EnergyTest e = energy_test(ys, target_rho, params.seed, params.energy_permutations,
                                       params.energy_level, params.energy_cap);
      r.energy_dist = e.statistic;
      r.energy_quantile = e.quantile;
      r.verdict.energy = e.below;
      r.verdict.energy_tested = true;
    } else {
      r.energy_dist = energy_distance(ys, target_rho, params.seed, params.energy_cap);
    }
  }
  return r;
}

}  // namespace cltlab
