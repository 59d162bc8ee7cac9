#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cltlab {

/// An index alpha = (n1, n2) of the double sequence, with its derived
/// quantities.
struct NetPoint {
  std::int64_t n1 = 1;
  std::int64_t n2 = 1;

  /// n1 / n2
  [[nodiscard]] double e() const noexcept {
    return static_cast<double>(n1) / static_cast<double>(n2);
  }
  [[nodiscard]] std::int64_t n_min() const noexcept { return std::min(n1, n2); }
  [[nodiscard]] std::int64_t n_max() const noexcept { return std::max(n1, n2); }
  /// sqrt(n1 n2)
  [[nodiscard]] double m_geom() const noexcept {
    return std::sqrt(static_cast<double>(n1) * static_cast<double>(n2));
  }
  [[nodiscard]] int j12() const noexcept { return n1 > n2 ? 1 : 0; }
  [[nodiscard]] int j21() const noexcept { return n1 < n2 ? 1 : 0; }
  [[nodiscard]] bool diagonal() const noexcept { return n1 == n2; }

  friend bool operator==(const NetPoint&, const NetPoint&) = default;
};

[[nodiscard]] inline NetPoint make_point(std::int64_t n1, std::int64_t n2) {
  if (n1 < 1 || n2 < 1) {
    throw std::invalid_argument("net point sizes must be >= 1, got (" + std::to_string(n1) +
                                ", " + std::to_string(n2) + ")");
  }
  return NetPoint{n1, n2};
}

enum class PathKind { diagonal, fixed_ratio, power };

[[nodiscard]] inline std::string_view to_string(PathKind k) {
  switch (k) {
    case PathKind::diagonal: return "diagonal";
    case PathKind::fixed_ratio: return "fixed_ratio";
    case PathKind::power: return "power";
  }
  return "?";
}

[[nodiscard]] inline PathKind parse_path_kind(std::string_view name) {
  if (name == "diagonal") return PathKind::diagonal;
  if (name == "fixed_ratio") return PathKind::fixed_ratio;
  if (name == "power") return PathKind::power;
  throw std::invalid_argument("unknown path kind '" + std::string(name) + "'");
}

struct PathSpec {
  PathKind kind = PathKind::diagonal;
  std::int64_t length = 2;
  std::int64_t scale = 1;
  std::int64_t p = 1;  // fixed_ratio numerator
  std::int64_t q = 1;  // fixed_ratio denominator
  double gamma = 2.0;  // power exponent
};

/// Finite path through N x N with the declared limit kappa of n1 / n2.
/// kappa is +infinity for paths along which n2 / n1 -> 0.
struct NetPath {
  PathKind kind = PathKind::diagonal;
  std::vector<NetPoint> points;
  double kappa = 1.0;
};

inline constexpr std::int64_t kDefaultSizeBudget = 1'000'000'000;

/// diagonal: (k s, k s), kappa 1. fixed_ratio: (p k s, q k s), kappa p/q.
/// power: (k s, ceil((k s)^gamma)), kappa 0 for gamma > 1 and infinity for gamma < 1.
[[nodiscard]] inline NetPath make_path(const PathSpec& spec,
                                       std::int64_t size_budget = kDefaultSizeBudget) {
  if (spec.length < 2) throw std::invalid_argument("path length must be >= 2");
  if (spec.scale < 1) throw std::invalid_argument("path scale must be >= 1");
  NetPath path;
  path.kind = spec.kind;
  const auto check = [&](double v) {
    if (!(v <= static_cast<double>(size_budget))) {
      throw std::invalid_argument("path point exceeds the size budget of " +
                                  std::to_string(size_budget));
    }
  };
  switch (spec.kind) {
    case PathKind::diagonal:
      path.kappa = 1.0;
      break;
    case PathKind::fixed_ratio:
      if (spec.p < 1 || spec.q < 1) throw std::invalid_argument("ratio p:q needs p, q >= 1");
      path.kappa = static_cast<double>(spec.p) / static_cast<double>(spec.q);
      break;
    case PathKind::power:
      if (!std::isfinite(spec.gamma) || !(spec.gamma > 0.0) || spec.gamma == 1.0) {
        throw std::invalid_argument("power path needs gamma > 0 and gamma != 1");
      }
      path.kappa = spec.gamma > 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
      break;
  }
  for (std::int64_t k = 1; k <= spec.length; ++k) {
    const double base = static_cast<double>(k) * static_cast<double>(spec.scale);
    check(base);
    const auto ks = static_cast<std::int64_t>(base);
    switch (spec.kind) {
      case PathKind::diagonal:
        path.points.push_back(make_point(ks, ks));
        break;
      case PathKind::fixed_ratio: {
        check(static_cast<double>(spec.p) * base);
        check(static_cast<double>(spec.q) * base);
        path.points.push_back(make_point(spec.p * ks, spec.q * ks));
        break;
      }
      case PathKind::power: {
        const double second = std::ceil(std::pow(base, spec.gamma));
        check(second);
        path.points.push_back(make_point(ks, static_cast<std::int64_t>(second)));
        break;
      }
    }
  }
  return path;
}

/// Relative tolerance on the final ratio for finite kappa; e <= this for
/// kappa = 0, e >= 1 / this for kappa = infinity.
inline constexpr double kPathTolerance = 0.05;

/// Whether e along the path numerically reaches the declared kappa.
[[nodiscard]] inline bool kappa_consistent(const NetPath& path) {
  if (path.points.empty()) return false;
  const double last = path.points.back().e();
  if (path.kappa == 0.0 || std::isinf(path.kappa)) {
    const bool toward_zero = path.kappa == 0.0;
    for (std::size_t i = 1; i < path.points.size(); ++i) {
      const double prev = path.points[i - 1].e();
      const double cur = path.points[i].e();
      if (toward_zero ? cur > prev : cur < prev) return false;
    }
    return toward_zero ? last <= kPathTolerance : last >= 1.0 / kPathTolerance;
  }
  return std::abs(last - path.kappa) <= kPathTolerance * path.kappa;
}

}  // namespace cltlab
