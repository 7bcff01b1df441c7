#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dualvote/errors.hpp"
#include "dualvote/rng.hpp"
#include "dualvote/stats.hpp"

using namespace dualvote;

TEST(Stats, BernoulliEstimate) {
  const auto e = bernoulli_estimate(30, 100, 1);
  EXPECT_DOUBLE_EQ(e.value, 0.3);
  EXPECT_DOUBLE_EQ(e.std_error, std::sqrt(0.3 * 0.7 / 100));
  EXPECT_EQ(e.n, 100u);
  EXPECT_THROW(bernoulli_estimate(0, 0, 1), Error);
}

TEST(Stats, MeanEstimate) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const auto e = mean_estimate(x, 0);
  EXPECT_DOUBLE_EQ(e.value, 2.5);
  // sample variance 5/3
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Stats, ZScore) {
  EstimateWithCI a{0.5, 0.03, 10, 0}, b{0.46, 0.04, 10, 0};
  EXPECT_NEAR(z_score(a, b), 0.04 / 0.05, 1e-12);
  EstimateWithCI c{1.0, 0.0, 10, 0};
  EXPECT_EQ(z_score(c, c), 0.0);
}

TEST(Stats, NormalQuantileInvertsCdf) {
  for (double p : {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-6})
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 + 1e-12 * p);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
}

TEST(Stats, KsCriticalValues) {
  // large-n asymptotic: 1.628 / sqrt(n) at 1%
  EXPECT_NEAR(ks_critical_value(10000, 0.01), 1.6276 / 100.0, 2e-4);
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-3);
}

TEST(Stats, KsOnGaussianSample) {
  Stream s(1);
  std::vector<double> x(5000);
  for (auto& v : x) v = s.normal();
  EXPECT_LT(ks_statistic(x, normal_cdf), ks_critical_value(x.size(), 0.001));
  std::vector<double> shifted = x;
  for (auto& v : shifted) v += 0.5;
  EXPECT_GT(ks_statistic(shifted, normal_cdf), ks_critical_value(x.size(), 0.01));
}

TEST(Stats, LeastSquaresExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Stats, EmpiricalQuantileType7) {
  EXPECT_DOUBLE_EQ(empirical_quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(empirical_quantile({4, 1, 3, 2}, 1.0), 4.0);
}
