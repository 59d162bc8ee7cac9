#pragma once

#include "cltlab/models.hpp"
#include "cltlab/netpath.hpp"
#include "cltlab/stats.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cltlab {

using Complex = std::complex<double>;

/// exp(-u^2 / 2), the CF of the standard normal law.
[[nodiscard]] inline Complex cf_zeta(double u) { return {std::exp(-0.5 * u * u), 0.0}; }

/// CF of the standard bivariate normal with correlation rho:
/// exp(-(s^2 + 2 s t rho + t^2) / 2).
[[nodiscard]] inline Complex cf_psi_rho(double s, double t, double rho) {
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("cf_psi_rho: |rho| must be <= 1");
  return {std::exp(-0.5 * (s * s + 2.0 * s * t * rho + t * t)), 0.0};
}

/// CF of N(0, theta); theta = 0 is the point mass at 0.
[[nodiscard]] inline Complex cf_normal_theta(double u, double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("cf_normal_theta: theta must be >= 0");
  return {std::exp(-0.5 * theta * u * u), 0.0};
}

/// z^n by repeated squaring.
[[nodiscard]] inline Complex complex_power(Complex z, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("complex_power: negative exponent");
  Complex result{1.0, 0.0};
  while (n > 0) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

/// [psi(u / sqrt(n))]^n, the CF of the standardized mean of n iid copies.
template <class Cf>
[[nodiscard]] Complex cf_marginal_power(const Cf& psi, std::int64_t n, double u) {
  if (n < 1) throw std::invalid_argument("cf_marginal_power needs n >= 1");
  return complex_power(Complex(psi(u / std::sqrt(static_cast<double>(n)))), n);
}

/// Evaluation lattice in the plane.
class CfGrid {
 public:
  CfGrid() = default;

  explicit CfGrid(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("CfGrid: no points");
    std::set<std::pair<double, double>> seen;
    bool origin = false;
    for (const auto& [s, t] : points_) {
      if (!std::isfinite(s) || !std::isfinite(t)) throw std::invalid_argument("CfGrid: non-finite point");
      if (!seen.insert({s, t}).second) throw std::invalid_argument("CfGrid: duplicate point");
      origin = origin || (s == 0.0 && t == 0.0);
    }
    if (!origin) throw std::invalid_argument("CfGrid: grid must contain the origin");
  }

  /// size x size lattice on [-half_width, half_width]^2; size must be odd so
  /// the origin is a node.
  static CfGrid lattice(int size = 13, double half_width = 3.0) {
    if (size < 1 || size % 2 == 0) throw std::invalid_argument("CfGrid: lattice size must be odd");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw std::invalid_argument("CfGrid: half width must be positive");
    }
    std::vector<double> axis(static_cast<std::size_t>(size));
    const int mid = (size - 1) / 2;
    for (int i = 0; i < size; ++i) {
      axis[static_cast<std::size_t>(i)] =
          size == 1 ? 0.0 : half_width * static_cast<double>(i - mid) / static_cast<double>(mid);
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(axis.size() * axis.size());
    for (double s : axis) {
      for (double t : axis) pts.emplace_back(s, t);
    }
    return CfGrid(std::move(pts));
  }

  [[nodiscard]] const std::vector<std::pair<double, double>>& points() const noexcept { return points_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }

  [[nodiscard]] std::optional<std::size_t> find(double s, double t) const {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].first == s && points_[i].second == t) return i;
    }
    return std::nullopt;
  }

 private:
  std::vector<std::pair<double, double>> points_;
};

struct EmpiricalCf {
  CfGrid grid;
  std::vector<Complex> values;
  std::size_t n_samples = 0;

  [[nodiscard]] Complex at(double s, double t) const {
    const auto i = grid.find(s, t);
    if (!i) throw std::out_of_range("EmpiricalCf: point not on grid");
    return values[*i];
  }
};

/// (1/R) sum_r exp(i (s y1_r + t y2_r)) at every grid node. Each node sums in
/// sample order, so the result is reproducible.
[[nodiscard]] inline EmpiricalCf empirical_cf(std::span<const std::pair<double, double>> samples,
                                              const CfGrid& grid) {
  if (samples.empty()) throw std::invalid_argument("empirical_cf: no samples");
  for (const auto& [a, b] : samples) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("empirical_cf: non-finite sample");
  }
  EmpiricalCf out{grid, std::vector<Complex>(grid.size()), samples.size()};
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto [s, t] = grid.points()[g];
    if (s == 0.0 && t == 0.0) {
      out.values[g] = {1.0, 0.0};
      continue;
    }
    double re = 0.0;
    double im = 0.0;
    for (const auto& [a, b] : samples) {
      const double arg = s * a + t * b;
      re += std::cos(arg);
      im += std::sin(arg);
    }
    out.values[g] = {re * inv, im * inv};
  }
  return out;
}

/// The three indicator-weighted terms of the joint CF at a point, and their sum.
struct CfDecomposition {
  Complex term1;
  Complex term2;
  Complex term3;
  Complex sum;
};

/// psi_alpha((s, t)) split by whether n1 = n2, n1 > n2 or n1 < n2.
/// `joint_diag_cf(k, a, b)` is the CF of (Y^1_k, Y^2_k) on the diagonal;
/// `psi1`, `psi2` are the standardized marginal CFs.
template <class DiagCf, class Cf1, class Cf2>
[[nodiscard]] CfDecomposition cf_decomposition(const NetPoint& point, const DiagCf& joint_diag_cf,
                                               const Cf1& psi1, const Cf2& psi2, double s,
                                               double t) {
  const double n1 = static_cast<double>(point.n1);
  const double n2 = static_cast<double>(point.n2);
  const std::int64_t k = point.n_min();
  CfDecomposition d{};
  if (point.j12() == 0 && point.j21() == 0) {
    d.term1 = Complex(joint_diag_cf(point.n1, s, t));
  }
  if (point.j12() == 1) {
    // sqrt(n2 / n1) = e^{-1/2}
    d.term2 = Complex(joint_diag_cf(point.n2, std::sqrt(n2 / n1) * s, t)) *
              complex_power(Complex(psi1(s / std::sqrt(n1))), point.n1 - k);
  }
  if (point.j21() == 1) {
    d.term3 = Complex(joint_diag_cf(point.n1, s, std::sqrt(n1 / n2) * t)) *
              complex_power(Complex(psi2(t / std::sqrt(n2))), point.n2 - k);
  }
  d.sum = d.term1 + d.term2 + d.term3;
  return d;
}

/// Analytic diagonal joint CF of a Gaussian-family model:
/// (k, a, b) -> exp(-(a^2 + 2 a b rho_bar_k + b^2) / 2).
class GaussianDiagCf {
 public:
  explicit GaussianDiagCf(const PairModel& model) : model_(model) {
    if (model.variant() != Variant::gaussian_iid_corr &&
        model.variant() != Variant::gaussian_varying_schedule) {
      throw std::invalid_argument("no analytic diagonal joint CF for model " + model.id());
    }
  }

  [[nodiscard]] Complex operator()(std::int64_t k, double a, double b) const {
    return cf_psi_rho(a, b, rho_bar(model_, NetPoint{k, k}));
  }

 private:
  const PairModel& model_;
};

/// Decomposition with the model's own analytic CFs.
[[nodiscard]] inline CfDecomposition cf_decomposition(const PairModel& model, const NetPoint& point,
                                                      double s, double t) {
  if (!model.marginal1().analytic_cf_available || !model.marginal2().analytic_cf_available) {
    throw std::invalid_argument("cf_decomposition: marginal CF unavailable");
  }
  const GaussianDiagCf diag(model);
  const auto psi1 = [&](double u) { return model.marginal1().standardized_cf(u); };
  const auto psi2 = [&](double u) { return model.marginal2().standardized_cf(u); };
  return cf_decomposition(point, diag, psi1, psi2, s, t);
}

struct TaylorRemainder {
  double lhs;
  double bound;
};

/// lhs = |exp(i theta) - sum_{q <= m} (i theta)^q / q!|, bound = |theta|^{m+1} / (m+1)!.
[[nodiscard]] inline TaylorRemainder taylor_remainder(double theta, int m) {
  if (m < 0) throw std::invalid_argument("taylor_remainder needs m >= 0");
  double bound = 1.0;
  for (int q = 1; q <= m + 1; ++q) bound *= std::abs(theta) / q;
  if (theta == 0.0) return {0.0, 0.0};
  if (std::abs(theta) <= 2.0) {
    // Sum the tail directly: lhs = bound * |sum_{q >= 0} (i theta)^q (m+1)! / (m+1+q)!|.
    // Subtracting the partial sum from exp(i theta) would cancel catastrophically here.
    Complex term{1.0, 0.0};
    Complex factor{1.0, 0.0};
    for (int q = 1; q < 60; ++q) {
      term *= Complex(0.0, theta) / static_cast<double>(m + 1 + q);
      factor += term;
      if (std::abs(term) < 1e-20) break;
    }
    return {bound * std::abs(factor), bound};
  }
  Complex partial{0.0, 0.0};
  Complex power{1.0, 0.0};
  for (int q = 0; q <= m; ++q) {
    if (q > 0) power *= Complex(0.0, theta) / static_cast<double>(q);
    partial += power;
  }
  return {std::abs(std::exp(Complex(0.0, theta)) - partial), bound};
}

}  // namespace cltlab
