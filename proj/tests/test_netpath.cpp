#include "cltlab/netpath.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cltlab;

TEST(NetPath, DiagonalPoints) {
  const auto p = make_path({PathKind::diagonal, 4, 500});
  ASSERT_EQ(p.points.size(), 4u);
  EXPECT_EQ(p.points[0], make_point(500, 500));
  EXPECT_EQ(p.points[3], make_point(2000, 2000));
  EXPECT_EQ(p.kappa, 1.0);
  EXPECT_TRUE(kappa_consistent(p));
}

TEST(NetPath, FixedRatio) {
  PathSpec spec{PathKind::fixed_ratio, 3, 100};
  spec.p = 2;
  spec.q = 1;
  const auto p = make_path(spec);
  EXPECT_EQ(p.points.back(), make_point(600, 300));
  EXPECT_DOUBLE_EQ(p.points.back().e(), 2.0);
  EXPECT_TRUE(kappa_consistent(p));
}

TEST(NetPath, PowerPathReachesZero) {
  PathSpec spec{PathKind::power, 4, 500};
  spec.gamma = 2.0;
  const auto p = make_path(spec);
  EXPECT_EQ(p.points.back(), make_point(2000, 4000000));
  EXPECT_EQ(p.kappa, 0.0);
  EXPECT_TRUE(kappa_consistent(p));
}

TEST(NetPath, PowerPathBelowOneReachesInfinity) {
  PathSpec spec{PathKind::power, 3, 4000};
  spec.gamma = 0.5;
  const auto p = make_path(spec);
  EXPECT_TRUE(std::isinf(p.kappa));
  EXPECT_TRUE(kappa_consistent(p));
}

TEST(NetPath, PointQuantities) {
  const NetPoint a = make_point(8, 2);
  EXPECT_EQ(a.n_min(), 2);
  EXPECT_EQ(a.n_max(), 8);
  EXPECT_DOUBLE_EQ(a.m_geom(), 4.0);
  EXPECT_EQ(a.j12(), 1);
  EXPECT_EQ(a.j21(), 0);
  EXPECT_FALSE(a.diagonal());
  EXPECT_TRUE(make_point(3, 3).diagonal());
}

TEST(NetPath, Rejections) {
  EXPECT_THROW((void)make_point(0, 3), std::invalid_argument);
  EXPECT_THROW((void)make_path({PathKind::diagonal, 1, 10}), std::invalid_argument);
  EXPECT_THROW((void)make_path({PathKind::diagonal, 3, 0}), std::invalid_argument);
  PathSpec bad{PathKind::power, 3, 10};
  bad.gamma = 1.0;
  EXPECT_THROW((void)make_path(bad), std::invalid_argument);
  PathSpec huge{PathKind::power, 3, 100000};
  huge.gamma = 3.0;
  EXPECT_THROW((void)make_path(huge), std::invalid_argument);
  EXPECT_THROW((void)parse_path_kind("spiral"), std::invalid_argument);
}
