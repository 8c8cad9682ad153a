#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "semistab/numcore.hpp"

using namespace semistab;

TEST(StableExpSum, SmallCasesByDirectSummation) {
  EXPECT_NEAR(stable_exp_sum(1), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(stable_exp_sum(2), 3.0, 1e-13);
  // sum_{j<=10} (10^j/j!)^2 evaluated in extended precision
  EXPECT_NEAR(stable_exp_sum(10), 5301.2744459411832, 1e-8);
}

TEST(StableExpSum, TwoSidedBoundInLogDomain) {
  for (long long m = 1; m <= 500; ++m) {
    const double lv = log_stable_exp_sum(m);
    const double lm = std::log(double(m));
    EXPECT_GE(lv, double(m) - 2.0 - 0.25 * lm) << m;
    EXPECT_LE(lv, double(m) - 0.25 * lm) << m;
  }
}

TEST(StableExpSum, NoOverflowForLargeM) {
  const double lv = log_stable_exp_sum(100000);
  EXPECT_TRUE(std::isfinite(lv));
  // half of I_0(2m) asymptotically
  EXPECT_NEAR(lv, 1e5 - 0.25 * std::log(4 * kPi * 1e5) - 0.5 * std::log(2.0), 1e-2);
  EXPECT_NEAR(log_stable_exp_sum(1000), 997.30841028838624, 1e-9);
}

TEST(StableExpSum, RejectsNonPositive) {
  EXPECT_THROW(stable_exp_sum(0), DomainError);
  EXPECT_THROW(stable_exp_sum(-3), DomainError);
}

TEST(GeometricGrid, Examples) {
  const auto g = geometric_grid(1, 100, 3);
  ASSERT_EQ(g.count(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_NEAR(g[1], 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(g[2], 100.0);
  const auto h = geometric_grid(2, 32, 5);
  const double expect[] = {2, 4, 8, 16, 32};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(h[i], expect[i], 1e-12);
  EXPECT_THROW(geometric_grid(1, 1, 4), DomainError);
  EXPECT_THROW(geometric_grid(0, 1, 4), DomainError);
  EXPECT_THROW(geometric_grid(1, 2, 1), DomainError);
}

TEST(GeometricGrid, ConstantRatio) {
  const auto g = geometric_grid(1e-3, 7e5, 97);
  const double r = g.ratio();
  for (std::size_t i = 0; i + 1 < g.count(); ++i) EXPECT_NEAR(g[i + 1] / g[i], r, 1e-12 * r);
}

TEST(FitPowerLaw, ExactPowerLaws) {
  const auto g = geometric_grid(1, 1e4, 60);
  for (double e = -10; e <= 10; e += 0.5) {
    std::vector<double> v;
    for (double t : g.nodes) v.push_back(2.5 * std::pow(t, e));
    const auto f = fit_power_law(g, v);
    EXPECT_NEAR(f.exponent, e, 1e-10);
    EXPECT_LT(f.residual, 1e-10);
    EXPECT_NEAR(f.constant, 2.5, 1e-8);
  }
}

TEST(FitPowerLaw, ConstantAndWindow) {
  const auto g = geometric_grid(1, 1e3, 50);
  std::vector<double> v(50, 7.0);
  const auto f = fit_power_law(g, v);
  EXPECT_NEAR(f.exponent, 0.0, 1e-12);
  EXPECT_NEAR(f.constant, 7.0, 1e-10);
  EXPECT_EQ(f.window.first, 5u);
  EXPECT_EQ(f.window.last, 45u);
}

TEST(FitPowerLaw, NoisyData) {
  const auto g = geometric_grid(1, 1e3, 200);
  std::vector<double> v;
  for (std::size_t i = 0; i < g.count(); ++i) {
    const double noise = 1e-6 * std::sin(double(i) * 12.9898);
    v.push_back(3 * std::pow(g[i], 1.5) * (1 + noise));
  }
  EXPECT_NEAR(fit_power_law(g, v).exponent, 1.5, 1e-4);
}

TEST(FitPowerLaw, RefinementInvariance) {
  const auto g1 = geometric_grid(2, 2e3, 40);
  const auto g2 = geometric_grid(2, 2e3, 80);
  auto vals = [](const LogGrid& g) {
    std::vector<double> v;
    for (double t : g.nodes) v.push_back(std::pow(t, -3.25));
    return v;
  };
  EXPECT_NEAR(fit_power_law(g1, vals(g1)).exponent, fit_power_law(g2, vals(g2)).exponent, 1e-10);
}

TEST(FitPowerLaw, Errors) {
  const auto g = geometric_grid(1, 10, 10);
  std::vector<double> v(10, 1.0);
  EXPECT_THROW(fit_power_law(g, std::vector<double>(9, 1.0)), ShapeError);
  EXPECT_THROW(fit_power_law(g, v, FitWindow{0, 2}), InsufficientDataError);
  v[5] = -1;
  EXPECT_THROW(fit_power_law(g, v), DomainError);
}

TEST(FitPowerLawWithLog, RecoversLogFactor) {
  const auto g = geometric_grid(2, 1e6, 80);
  std::vector<double> v;
  for (double t : g.nodes) v.push_back(4.0 * std::pow(t, -1.25) * std::pow(1 + std::log(t), 3.0));
  const auto f = fit_power_law_with_log(g, v);
  EXPECT_NEAR(f.exponent, -1.25, 1e-8);
  EXPECT_NEAR(f.log_exponent, 3.0, 1e-7);
}

TEST(FitExponentialRate, SemiLog) {
  std::vector<double> t, v;
  for (int i = 0; i < 30; ++i) {
    t.push_back(0.5 * i);
    v.push_back(3.0 * std::exp(-0.75 * t.back()));
  }
  const auto f = fit_exponential_rate(t, v);
  EXPECT_NEAR(f.rate, -0.75, 1e-12);
  EXPECT_NEAR(std::exp(f.log_constant), 3.0, 1e-10);
}
