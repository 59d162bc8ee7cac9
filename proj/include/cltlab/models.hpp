#pragma once

#include "cltlab/random.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cltlab {

enum class MarginalFamily { gaussian, rademacher, exponential, uniform };

[[nodiscard]] inline std::string_view to_string(MarginalFamily f) {
  switch (f) {
    case MarginalFamily::gaussian: return "gaussian";
    case MarginalFamily::rademacher: return "rademacher";
    case MarginalFamily::exponential: return "exponential";
    case MarginalFamily::uniform: return "uniform";
  }
  return "?";
}

[[nodiscard]] inline MarginalFamily parse_marginal_family(std::string_view name) {
  if (name == "gaussian") return MarginalFamily::gaussian;
  if (name == "rademacher") return MarginalFamily::rademacher;
  if (name == "exponential") return MarginalFamily::exponential;
  if (name == "uniform") return MarginalFamily::uniform;
  throw std::invalid_argument("unknown marginal family '" + std::string(name) + "'");
}

/// One coordinate's law: a location-scale family whose standardized member has
/// mean 0 and variance 1.
struct MarginalSpec {
  MarginalFamily family = MarginalFamily::gaussian;
  double mu = 0.0;
  double sigma = 1.0;
  bool analytic_cf_available = true;

  void validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma)) {
      throw std::invalid_argument("marginal parameters must be finite");
    }
    if (!(sigma > 0.0)) throw std::invalid_argument("marginal sigma must be > 0");
  }

  /// CF of the standardized variable (X - mu) / sigma.
  [[nodiscard]] std::complex<double> standardized_cf(double u) const {
    switch (family) {
      case MarginalFamily::gaussian:
        return {std::exp(-0.5 * u * u), 0.0};
      case MarginalFamily::rademacher:
        return {std::cos(u), 0.0};
      case MarginalFamily::exponential: {
        // Exp(1) - 1
        const std::complex<double> iu{0.0, u};
        return std::exp(-iu) / (1.0 - iu);
      }
      case MarginalFamily::uniform: {
        // Uniform on [-sqrt(3), sqrt(3)]
        const double a = std::sqrt(3.0) * u;
        return {a == 0.0 ? 1.0 : std::sin(a) / a, 0.0};
      }
    }
    return {0.0, 0.0};
  }

  /// Standardized draw consuming slots (slot, slot + 1) of index j.
  [[nodiscard]] double standardized_draw(const rng::Stream& stream, std::uint64_t j,
                                         std::uint64_t slot) const {
    switch (family) {
      case MarginalFamily::gaussian: return stream.normal(j, slot);
      case MarginalFamily::rademacher: return stream.sign(j, slot);
      case MarginalFamily::exponential: return -std::log(stream.uniform_open0(j, slot)) - 1.0;
      case MarginalFamily::uniform: return std::sqrt(3.0) * (2.0 * stream.uniform(j, slot) - 1.0);
    }
    return 0.0;
  }
};

enum class ScheduleKind { constant, alternating, decay };

/// j -> rho_jj. constant: a; alternating: (-1)^(j+1) a; decay: a j^(-p).
struct Schedule {
  ScheduleKind kind = ScheduleKind::constant;
  double amplitude = 0.0;
  double exponent = 0.0;

  [[nodiscard]] double operator()(std::int64_t j) const noexcept {
    switch (kind) {
      case ScheduleKind::constant: return amplitude;
      case ScheduleKind::alternating: return (j % 2 == 1) ? amplitude : -amplitude;
      case ScheduleKind::decay: return amplitude * std::pow(static_cast<double>(j), -exponent);
    }
    return 0.0;
  }
};

[[nodiscard]] inline std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::alternating: return "alternating";
    case ScheduleKind::decay: return "decay";
  }
  return "?";
}

[[nodiscard]] inline ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "alternating") return ScheduleKind::alternating;
  if (name == "decay") return ScheduleKind::decay;
  throw std::invalid_argument("unknown schedule kind '" + std::string(name) + "'");
}

enum class Variant {
  gaussian_iid_corr,
  rademacher_product,
  gaussian_varying_schedule,
  bounded_rademacher_pair,
  independent_nongaussian,
};

[[nodiscard]] inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::gaussian_iid_corr: return "gaussian_iid_corr";
    case Variant::rademacher_product: return "rademacher_product";
    case Variant::gaussian_varying_schedule: return "gaussian_varying_schedule";
    case Variant::bounded_rademacher_pair: return "bounded_rademacher_pair";
    case Variant::independent_nongaussian: return "independent_nongaussian";
  }
  return "?";
}

[[nodiscard]] inline Variant parse_variant(std::string_view name) {
  if (name == "gaussian_iid_corr") return Variant::gaussian_iid_corr;
  if (name == "rademacher_product") return Variant::rademacher_product;
  if (name == "gaussian_varying_schedule") return Variant::gaussian_varying_schedule;
  if (name == "bounded_rademacher_pair") return Variant::bounded_rademacher_pair;
  if (name == "independent_nongaussian") return Variant::independent_nongaussian;
  throw std::invalid_argument("unknown model variant '" + std::string(name) + "'");
}

/// Standardized realization of pair j: z_i = (X_{i,j} - mu_i) / sigma_i.
struct StdPair {
  double z1;
  double z2;
};

struct Pair {
  double x1;
  double x2;
};

/// Generative law of the independent sequence {(X_{1,j}, X_{2,j})}.
/// Immutable after construction.
class PairModel {
 public:
  /// X2 = rho Z1 + sqrt(1 - rho^2) Z2, iid across j.
  static PairModel gaussian_iid_corr(double rho, double mu1 = 0.0, double sigma1 = 1.0,
                                     double mu2 = 0.0, double sigma2 = 1.0) {
    return PairModel(Variant::gaussian_iid_corr, gaussian(mu1, sigma1), gaussian(mu2, sigma2),
                     Schedule{ScheduleKind::constant, rho, 0.0});
  }

  /// X1 standard normal, X2 = S X1 with S an independent sign: uncorrelated
  /// but |X1| = |X2|.
  static PairModel rademacher_product(double mu1 = 0.0, double sigma1 = 1.0, double mu2 = 0.0,
                                      double sigma2 = 1.0) {
    return PairModel(Variant::rademacher_product, gaussian(mu1, sigma1), gaussian(mu2, sigma2),
                     Schedule{ScheduleKind::constant, 0.0, 0.0});
  }

  /// Independent, not identically distributed: correlation rho_jj = schedule(j).
  static PairModel gaussian_varying_schedule(Schedule schedule, double mu1 = 0.0,
                                             double sigma1 = 1.0, double mu2 = 0.0,
                                             double sigma2 = 1.0) {
    return PairModel(Variant::gaussian_varying_schedule, gaussian(mu1, sigma1),
                     gaussian(mu2, sigma2), schedule);
  }

  /// Both coordinates take values mu_i +- sigma_i; the signs agree with
  /// probability (1 + rho) / 2.
  static PairModel bounded_rademacher_pair(double rho, double mu1 = 0.0, double sigma1 = 1.0,
                                           double mu2 = 0.0, double sigma2 = 1.0) {
    return PairModel(Variant::bounded_rademacher_pair,
                     MarginalSpec{MarginalFamily::rademacher, mu1, sigma1, true},
                     MarginalSpec{MarginalFamily::rademacher, mu2, sigma2, true},
                     Schedule{ScheduleKind::constant, rho, 0.0});
  }

  static PairModel independent_nongaussian(MarginalSpec m1, MarginalSpec m2) {
    return PairModel(Variant::independent_nongaussian, m1, m2,
                     Schedule{ScheduleKind::constant, 0.0, 0.0});
  }

  [[nodiscard]] Variant variant() const noexcept { return variant_; }
  [[nodiscard]] const MarginalSpec& marginal1() const noexcept { return m1_; }
  [[nodiscard]] const MarginalSpec& marginal2() const noexcept { return m2_; }
  [[nodiscard]] const MarginalSpec& marginal(int i) const noexcept { return i == 1 ? m1_ : m2_; }
  [[nodiscard]] const Schedule& schedule() const noexcept { return schedule_; }

  /// True when the law of (X_{1,j}, X_{2,j}) does not depend on j.
  [[nodiscard]] bool identically_distributed() const noexcept {
    return variant_ != Variant::gaussian_varying_schedule ||
           schedule_.kind == ScheduleKind::constant;
  }

  /// Corr(X_{1,j}, X_{2,j}) for j >= 1.
  [[nodiscard]] double correlation(std::int64_t j) const {
    if (j < 1) throw std::invalid_argument("index j must be >= 1");
    return schedule_(j);
  }

  /// Short identifier, e.g. "gaussian_iid_corr(rho=0.5)".
  [[nodiscard]] std::string id() const {
    std::string out{to_string(variant_)};
    char buf[128];
    switch (variant_) {
      case Variant::gaussian_iid_corr:
      case Variant::bounded_rademacher_pair:
        std::snprintf(buf, sizeof buf, "(rho=%g)", schedule_.amplitude);
        out += buf;
        break;
      case Variant::gaussian_varying_schedule:
        std::snprintf(buf, sizeof buf, "(%s,a=%g,p=%g)",
                      std::string(to_string(schedule_.kind)).c_str(), schedule_.amplitude,
                      schedule_.exponent);
        out += buf;
        break;
      case Variant::independent_nongaussian:
        out += "(" + std::string(to_string(m1_.family)) + "," +
               std::string(to_string(m2_.family)) + ")";
        break;
      case Variant::rademacher_product:
        break;
    }
    return out;
  }

  /// Standardized pair j (j >= 1). Uses at most kSlotsPerIndex slots of j.
  [[nodiscard]] StdPair draw_standardized(const rng::Stream& stream, std::uint64_t j) const {
    switch (variant_) {
      case Variant::gaussian_iid_corr:
      case Variant::gaussian_varying_schedule: {
        const double rho = schedule_(static_cast<std::int64_t>(j));
        const auto [a, b] = stream.normal_pair(j, 0);
        return {a, rho * a + std::sqrt(1.0 - rho * rho) * b};
      }
      case Variant::rademacher_product: {
        const double a = stream.normal(j, 0);
        return {a, stream.sign(j, 2) * a};
      }
      case Variant::bounded_rademacher_pair: {
        const double s1 = stream.sign(j, 0);
        const bool agree = stream.uniform(j, 1) < 0.5 * (1.0 + schedule_.amplitude);
        return {s1, agree ? s1 : -s1};
      }
      case Variant::independent_nongaussian:
        return {m1_.standardized_draw(stream, j, 0), m2_.standardized_draw(stream, j, 2)};
    }
    return {0.0, 0.0};
  }

  [[nodiscard]] Pair draw(const rng::Stream& stream, std::uint64_t j) const {
    const StdPair z = draw_standardized(stream, j);
    return {m1_.mu + m1_.sigma * z.z1, m2_.mu + m2_.sigma * z.z2};
  }

 private:
  static MarginalSpec gaussian(double mu, double sigma) {
    return MarginalSpec{MarginalFamily::gaussian, mu, sigma, true};
  }

  PairModel(Variant v, MarginalSpec m1, MarginalSpec m2, Schedule s)
      : variant_(v), m1_(m1), m2_(m2), schedule_(s) {
    m1_.validate();
    m2_.validate();
    if (!std::isfinite(schedule_.amplitude) || !std::isfinite(schedule_.exponent)) {
      throw std::invalid_argument("correlation schedule parameters must be finite");
    }
    if (std::abs(schedule_.amplitude) > 1.0) {
      throw std::invalid_argument("correlation amplitude must lie in [-1, 1]");
    }
    if (schedule_.exponent < 0.0) throw std::invalid_argument("decay exponent must be >= 0");
    if (v == Variant::independent_nongaussian &&
        (m1_.family == MarginalFamily::gaussian && m2_.family == MarginalFamily::gaussian)) {
      throw std::invalid_argument("independent_nongaussian needs a non-gaussian marginal");
    }
  }

  Variant variant_;
  MarginalSpec m1_;
  MarginalSpec m2_;
  Schedule schedule_;
};

/// Corr(X_{1,j}, X_{2,j}) implied by the construction.
[[nodiscard]] inline double correlation_schedule(const PairModel& model, std::int64_t j) {
  return model.correlation(j);
}

/// Pairs j = 1..n of one realization. A pure function of (model, n, seed).
[[nodiscard]] inline std::vector<Pair> sample_block(const PairModel& model, std::int64_t n,
                                                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_block needs n >= 1");
  const rng::Stream stream(seed);
  std::vector<Pair> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t j = 1; j <= n; ++j) out.push_back(model.draw(stream, static_cast<std::uint64_t>(j)));
  return out;
}

}  // namespace cltlab
