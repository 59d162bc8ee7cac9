#pragma once

#include "cltlab/models.hpp"
#include "cltlab/netpath.hpp"
#include "cltlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace cltlab {

/// sqrt(n) (xbar - mu) / sigma
[[nodiscard]] inline double standardized_mean(std::span<const double> sample, double mu,
                                              double sigma) {
  if (sample.empty()) throw std::invalid_argument("standardized_mean: empty sample");
  if (!(sigma > 0.0)) throw std::invalid_argument("standardized_mean: sigma must be > 0");
  double sum = 0.0;
  for (double x : sample) sum += x;
  const double n = static_cast<double>(sample.size());
  return std::sqrt(n) * (sum / n - mu) / sigma;
}

/// (1 / m_alpha) sum_{j <= n_alpha} rho_jj
[[nodiscard]] inline double rho_bar(const PairModel& model, const NetPoint& point) {
  const std::int64_t k = point.n_min();
  if (model.identically_distributed()) {
    return model.correlation(1) * (static_cast<double>(k) / point.m_geom());
  }
  double sum = 0.0;
  for (std::int64_t j = 1; j <= k; ++j) sum += model.correlation(j);
  return sum / point.m_geom();
}

struct VWeights {
  double v1;
  double v2;
};

/// v1 = sigma1 / sqrt(sigma1^2 + e sigma2^2), v2 = sigma2 / sqrt(sigma1^2 / e + sigma2^2).
/// e = +infinity gives the limit (0, 1).
[[nodiscard]] inline VWeights v_weights(double sigma1, double sigma2, double e) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw std::invalid_argument("v_weights: sigmas must be > 0");
  }
  if (!(e > 0.0)) throw std::invalid_argument("v_weights: e must be > 0");
  return {sigma1 / std::sqrt(sigma1 * sigma1 + e * sigma2 * sigma2),
          sigma2 / std::sqrt(sigma1 * sigma1 / e + sigma2 * sigma2)};
}

/// Known location and scale of both coordinates.
struct PairParams {
  double mu1 = 0.0;
  double sigma1 = 1.0;
  double mu2 = 0.0;
  double sigma2 = 1.0;

  static PairParams of(const PairModel& model) {
    return {model.marginal1().mu, model.marginal1().sigma, model.marginal2().mu,
            model.marginal2().sigma};
  }
};

namespace detail {
inline double pooled_scale(const PairParams& p, const NetPoint& point) {
  if (!(p.sigma1 > 0.0) || !(p.sigma2 > 0.0)) {
    throw std::invalid_argument("difference statistic needs positive variances");
  }
  const double d = std::sqrt(p.sigma1 * p.sigma1 / static_cast<double>(point.n1) +
                             p.sigma2 * p.sigma2 / static_cast<double>(point.n2));
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw std::invalid_argument("difference statistic has a degenerate denominator");
  }
  return d;
}
}  // namespace detail

/// ((xbar1 - mu1) - (xbar2 - mu2)) / sqrt(sigma1^2 / n1 + sigma2^2 / n2)
[[nodiscard]] inline double w_hat(double x1bar, double x2bar, const PairParams& p,
                                  const NetPoint& point) {
  return ((x1bar - p.mu1) - (x2bar - p.mu2)) / detail::pooled_scale(p, point);
}

/// ((xbar1 - mu1) + (xbar2 - mu2)) / sqrt(sigma1^2 / n1 + sigma2^2 / n2)
[[nodiscard]] inline double u_hat(double x1bar, double x2bar, const PairParams& p,
                                  const NetPoint& point) {
  return ((x1bar - p.mu1) + (x2bar - p.mu2)) / detail::pooled_scale(p, point);
}

/// 2 sigma1 sigma2 rho / (sigma1^2 + sigma2^2)
[[nodiscard]] inline double rho_star(double rho, double sigma1, double sigma2) {
  return 2.0 * sigma1 * sigma2 * rho / (sigma1 * sigma1 + sigma2 * sigma2);
}

/// Coefficient of rho_bar in E(W^2) = 1 - c rho_bar at ratio e:
/// c = 2 sigma1 sigma2 sqrt(e) / (sigma1^2 + e sigma2^2). Equals the rho_star
/// factor when e = 1.
[[nodiscard]] inline double cross_weight(double sigma1, double sigma2, double e) {
  if (std::isinf(e)) return 0.0;
  return 2.0 * sigma1 * sigma2 * std::sqrt(e) / (sigma1 * sigma1 + e * sigma2 * sigma2);
}

/// One replication's statistics at a point.
struct PairStat {
  double y1;
  double y2;
  double w_hat;
  double u_hat;
};

struct ReplicationBatch {
  NetPoint point;
  std::vector<PairStat> stats;
  std::uint64_t seed = 0;
  std::string model_id;

  [[nodiscard]] std::vector<std::pair<double, double>> y_pairs() const {
    std::vector<std::pair<double, double>> out;
    out.reserve(stats.size());
    for (const auto& s : stats) out.emplace_back(s.y1, s.y2);
    return out;
  }
  [[nodiscard]] std::vector<double> w_values() const {
    std::vector<double> out;
    out.reserve(stats.size());
    for (const auto& s : stats) out.push_back(s.w_hat);
    return out;
  }
  [[nodiscard]] std::vector<double> u_values() const {
    std::vector<double> out;
    out.reserve(stats.size());
    for (const auto& s : stats) out.push_back(s.u_hat);
    return out;
  }
};

/// Stream tag of the aggregated tail draw; disjoint from the pair indices.
inline constexpr std::uint64_t kTailIndex = 0;

/// Sample means of one realization at `point` from the stream keyed by `key`.
/// Pairs j <= n_min come from the model; the longer coordinate's tail
/// j > n_min is summed element-wise, or drawn as one exact normal variate
/// when that coordinate's marginal is Gaussian.
[[nodiscard]] inline std::pair<double, double> realize_means(const PairModel& model,
                                                             const NetPoint& point,
                                                             std::uint64_t key) {
  const rng::Stream stream(key);
  const std::int64_t k = point.n_min();
  double sum1 = 0.0;
  double sum2 = 0.0;
  for (std::int64_t j = 1; j <= k; ++j) {
    const Pair p = model.draw(stream, static_cast<std::uint64_t>(j));
    sum1 += p.x1;
    sum2 += p.x2;
  }
  if (point.n1 != point.n2) {
    const int longer = point.n1 > point.n2 ? 1 : 2;
    const std::int64_t n_long = point.n_max();
    const MarginalSpec& m = model.marginal(longer);
    double tail = 0.0;
    if (m.family == MarginalFamily::gaussian) {
      const auto count = static_cast<double>(n_long - k);
      tail = count * m.mu + m.sigma * std::sqrt(count) * stream.normal(kTailIndex, 0);
    } else {
      for (std::int64_t j = k + 1; j <= n_long; ++j) {
        const Pair p = model.draw(stream, static_cast<std::uint64_t>(j));
        tail += longer == 1 ? p.x1 : p.x2;
      }
    }
    (longer == 1 ? sum1 : sum2) += tail;
  }
  return {sum1 / static_cast<double>(point.n1), sum2 / static_cast<double>(point.n2)};
}

/// Statistics from realized sample means.
[[nodiscard]] inline PairStat pair_stat(double x1bar, double x2bar, const PairParams& p,
                                        const NetPoint& point) {
  const double y1 = std::sqrt(static_cast<double>(point.n1)) * (x1bar - p.mu1) / p.sigma1;
  const double y2 = std::sqrt(static_cast<double>(point.n2)) * (x2bar - p.mu2) / p.sigma2;
  return {y1, y2, w_hat(x1bar, x2bar, p, point), u_hat(x1bar, x2bar, p, point)};
}

/// R independent realizations at `point`. Replication r uses the key
/// derive(seed, r), so the output does not depend on `workers`.
[[nodiscard]] inline ReplicationBatch replicate(const PairModel& model, const NetPoint& point,
                                                std::int64_t replications, std::uint64_t seed,
                                                unsigned workers = 0) {
  if (replications < 1) throw std::invalid_argument("replicate needs R >= 1");
  ReplicationBatch batch{point, std::vector<PairStat>(static_cast<std::size_t>(replications)),
                         seed, model.id()};
  const PairParams params = PairParams::of(model);
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto [x1bar, x2bar] = realize_means(model, point, rng::derive(seed, r));
      batch.stats[r] = pair_stat(x1bar, x2bar, params, point);
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t total = batch.stats.size();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  if (workers <= 1) {
    run(0, total);
    return batch;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run, begin, end);
    }
  }
  return batch;
}

/// Sample moments used by the Monte Carlo checks.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

[[nodiscard]] inline Moments moments(std::span<const double> v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.variance = ss / static_cast<double>(v.size() - 1);
  }
  return m;
}

[[nodiscard]] inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("sample_covariance needs equal sizes >= 2");
  }
  const double ma = moments(a).mean;
  const double mb = moments(b).mean;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

[[nodiscard]] inline double sample_correlation(std::span<const double> a, std::span<const double> b) {
  return sample_covariance(a, b) /
         std::sqrt(moments(a).variance * moments(b).variance);
}

}  // namespace cltlab
