#include "cltlab/lindeberg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cltlab;

namespace {
// 2 (a phi(a) + Phibar(a)), the closed form of E[Z^2 1{|Z| > a}].
double closed_form(double a) {
  const double phi = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
  return 2.0 * (a * phi + 0.5 * std::erfc(a / std::sqrt(2.0)));
}
}  // namespace

TEST(Lindeberg, QuadratureMatchesClosedForm) {
  for (double a : {0.01, 0.5, 1.0, 2.0, 3.5, 5.0, 8.0}) {
    EXPECT_NEAR(normal_tail_second_moment(a), closed_form(a), 1e-12 * std::max(1e-300, closed_form(a)) + 1e-15)
        << a;
  }
  EXPECT_NEAR(normal_tail_second_moment(1.0), 0.8012519569012008, 1e-14);
  EXPECT_EQ(normal_tail_second_moment(0.0), 1.0);
  EXPECT_EQ(normal_tail_second_moment(50.0), 0.0);
}

TEST(Lindeberg, GaussianExample) {
  const auto m = PairModel::gaussian_iid_corr(0.0);
  const auto L = lindeberg_L(m, {1.0, 0.0}, 100, 0.5);
  ASSERT_TRUE(L.has_value());
  EXPECT_NEAR(L->value, 1.5440498291101365e-5, 1e-17);
  EXPECT_EQ(L->method, LindebergMethod::quadrature);
}

TEST(Lindeberg, BoundedVanishesExactly) {
  const auto m = PairModel::bounded_rademacher_pair(0.5);
  for (std::int64_t k = 3; k <= 200; ++k) {
    const auto L = lindeberg_L(m, {1.0, 1.0}, k, 1.0);
    ASSERT_TRUE(L.has_value());
    EXPECT_EQ(L->value, 0.0) << k;
    EXPECT_EQ(L->method, LindebergMethod::exact);
  }
  // Below the threshold every term counts: L_1(eps) = 1 for small eps.
  const auto full = lindeberg_L(m, {1.0, 1.0}, 1, 0.1);
  EXPECT_DOUBLE_EQ(full->value, 1.0);
}

TEST(Lindeberg, DegenerateTauIsUndefined) {
  const auto m = PairModel::gaussian_iid_corr(-1.0);
  EXPECT_FALSE(lindeberg_L(m, {1.0, 1.0}, 10, 0.5).has_value());
  EXPECT_THROW((void)lindeberg_L(m, {1.0, 0.0}, 10, 0.0), std::invalid_argument);
}

TEST(Lindeberg, ScalingLawOnBoundedModel) {
  const auto m = PairModel::bounded_rademacher_pair(0.3);
  for (std::int64_t k : {1, 2, 3, 5, 9}) {
    for (double eps : {0.1, 0.5, 0.9, 1.3}) {
      EXPECT_EQ(script_L(m, {1.0, 1.0}, k, eps).value, script_L(m, {1.0, 1.0}, k, eps).value);
      EXPECT_EQ(script_L(m, {2.0, 2.0}, k, eps).value, 4.0 * script_L(m, {1.0, 1.0}, k, eps / 2.0).value);
      EXPECT_EQ(script_L(m, {-2.0, 1.0}, k, eps).value,
                4.0 * script_L(m, {-1.0, 0.5}, k, eps / 2.0).value);
    }
  }
}

TEST(Lindeberg, SubadditivityOnBoundedModel) {
  const auto m = PairModel::bounded_rademacher_pair(0.3);
  for (std::int64_t k : {1, 2, 4, 16}) {
    for (double eps : {0.05, 0.3, 0.7, 1.1, 2.0}) {
      const double lhs = script_L(m, {2.0, 0.0}, k, eps).value;
      const double rhs = 4.0 * script_L(m, {1.0, 1.0}, k, eps / 2.0).value +
                         4.0 * script_L(m, {1.0, -1.0}, k, eps / 2.0).value;
      EXPECT_LE(lhs, rhs);
    }
  }
}

TEST(Lindeberg, GaussianSweepAndMaxShareBound) {
  const auto m = PairModel::gaussian_iid_corr(0.5);
  for (double eps : {0.1, 0.5, 1.0}) {
    const auto r = max_share_bound(m, {1.0, 1.0}, 10000, eps);
    ASSERT_TRUE(r.has_value());
    EXPECT_LT(r->L_k, 1e-3);
    EXPECT_TRUE(r->bound_check);
    EXPECT_DOUBLE_EQ(r->a_k_sq, 1e-4);
  }
  const auto alt = PairModel::gaussian_varying_schedule({ScheduleKind::alternating, 0.9, 0.0});
  for (std::int64_t k : {1, 2, 5, 50, 1001}) {
    const auto r = max_share_bound(alt, {1.0, 1.0}, k, 0.3);
    ASSERT_TRUE(r.has_value());
    EXPECT_TRUE(r->bound_check) << k;
  }
}

TEST(Lindeberg, QuadratureAgreesWithMonteCarlo) {
  const auto m = PairModel::gaussian_iid_corr(0.5);
  const auto q = lindeberg_L(m, {1.0, 1.0}, 4, 0.5);
  const auto mc = lindeberg_L_monte_carlo(m, {1.0, 1.0}, 4, 0.5);
  EXPECT_NEAR(q->value, 0.8012519569012008, 1e-14);  // threshold = one standard deviation
  EXPECT_LE(std::abs(q->value - mc->value), 3.0 * mc->std_error);
  const auto rp = PairModel::rademacher_product();
  const auto q2 = lindeberg_L(rp, {1.0, 0.5}, 3, 0.6);
  const auto mc2 = lindeberg_L_monte_carlo(rp, {1.0, 0.5}, 3, 0.6);
  EXPECT_LE(std::abs(q2->value - mc2->value), 3.0 * mc2->std_error);
  const auto alt = PairModel::gaussian_varying_schedule({ScheduleKind::decay, 0.9, 0.5});
  const auto q3 = lindeberg_L(alt, {1.0, 1.0}, 7, 0.4);
  const auto mc3 = lindeberg_L_monte_carlo(alt, {1.0, 1.0}, 7, 0.4);
  EXPECT_LE(std::abs(q3->value - mc3->value), 3.0 * mc3->std_error);
}

TEST(Lindeberg, NonGaussianFallsBackToMonteCarlo) {
  const auto m = PairModel::independent_nongaussian({MarginalFamily::exponential, 0, 1, true},
                                                    {MarginalFamily::uniform, 0, 1, true});
  const auto L = lindeberg_L(m, {1.0, 1.0}, 50, 0.5);
  ASSERT_TRUE(L.has_value());
  EXPECT_EQ(L->method, LindebergMethod::monte_carlo);
  EXPECT_GT(L->std_error, 0.0);
  EXPECT_GE(L->value, 0.0);
}
