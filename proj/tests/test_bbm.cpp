#include <cmath>

#include <gtest/gtest.h>

#include "dualvote/bbm.hpp"
#include "dualvote/errors.hpp"
#include "dualvote/parallel.hpp"

using namespace dualvote;

namespace {

BbmParams small_params(const ModelSpec& spec, double eps, double t) {
  auto p = BbmParams::for_model(spec, eps, t);
  const auto fp = fixed_points(make_g(spec));
  p.initial_condition = step_initial_condition(fp.u_minus, fp.u_plus);
  return p;
}

const double kZero[] = {0.0};

}  // namespace

TEST(Bbm, ConstantFixedPointInit) {
  for (const auto& spec : {ModelSpec::sexual(4.5), ModelSpec::majority()}) {
    auto p = BbmParams::for_model(spec, 0.5, 0.05);
    const double u = fixed_points(make_g(spec)).u_plus;
    p.initial_condition = constant_initial_condition(u);
    const double z[] = {0.3};
    const auto est = estimate_vote_probability(z, p, VoteRule::for_model(spec), 20000, 1);
    EXPECT_NEAR(est.value, u, 3.0 * est.std_error + 1e-12);
  }
}

TEST(Bbm, InterfaceCentreIsUnstablePoint) {
  for (const auto& spec : {ModelSpec::sexual(4.5), ModelSpec::majority()}) {
    const auto p = small_params(spec, 0.5, 0.05);
    const auto est = estimate_vote_probability(kZero, p, VoteRule::for_model(spec), 40000, 2);
    EXPECT_NEAR(est.value, fixed_points(make_g(spec)).u_zero, 3.0 * est.std_error);
  }
}

TEST(Bbm, ZeroHorizonReadsInitialCondition) {
  auto p = BbmParams::for_model(ModelSpec::majority(), 0.5, 0.0);
  p.initial_condition = [](std::span<const double> x) { return x[0] > 0 ? 0.8 : 0.1; };
  const double z[] = {1.0};
  const auto est = estimate_vote_probability(z, p, VoteRule::majority(), 20000, 3);
  EXPECT_NEAR(est.value, 0.8, 3.0 * est.std_error);
}

TEST(Bbm, ProfileMonotoneAntisymmetricAndAboveBound) {
  const auto spec = ModelSpec::sexual(4.5);
  const auto rule = VoteRule::sexual(4.5);
  const auto p = small_params(spec, 0.5, 0.1);
  const std::vector<double> zs{-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0};
  const auto prof = interface_profile_1d(zs, p, rule, 20000, 4);
  ASSERT_EQ(prof.rows.size(), zs.size());
  for (std::size_t i = 1; i < prof.rows.size(); ++i) {
    const auto& a = prof.rows[i - 1].estimate;
    const auto& b = prof.rows[i].estimate;
    EXPECT_GE(b.value, a.value - 3.0 * std::hypot(a.std_error, b.std_error));
  }
  for (const auto& r : prof.rows) {
    if (r.z < 0) continue;
    EXPECT_GE(r.estimate.value, brownian_step_bound(r.z, p.horizon, p.variance_rate, 0.0, 2.0 / 3.0) -
                                    3.0 * r.estimate.std_error);
  }
  for (double z : {0.1, 0.5, 1.0}) {
    const auto pair = antisymmetry_pair(z, p, rule, 20000, 5);
    EXPECT_NEAR(pair.sum.value, 2.0 / 3.0, 3.0 * pair.sum.std_error + 1e-12);
  }
}

TEST(Bbm, CsvColumns) {
  const auto p = small_params(ModelSpec::majority(), 0.5, 0.02);
  const auto prof = interface_profile_1d({0.0}, p, VoteRule::majority(), 100, 6);
  EXPECT_EQ(to_csv(prof).substr(0, to_csv(prof).find('\n')), "z,p_hat,stderr,trials,eps,t,rule,seed");
}

TEST(Bbm, BrownianStepBound) {
  EXPECT_NEAR(brownian_step_bound(0.0, 1.0, 1.0, 0.0, 2.0 / 3.0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(brownian_step_bound(1.0, 1.0, 1.0, 0.0, 1.0), normal_cdf(1.0), 1e-15);
}

TEST(SolveZEpsilon, Examples) {
  EXPECT_EQ(solve_z_epsilon(0.0, 1.0, 0.0, 1.0, 1.0), 0.0);
  const double eps = 1e-4, T = 0.7;
  EXPECT_NEAR(solve_z_epsilon(eps, T, 0.0, 2.0 / 3.0, 1.0) / (1.5 * eps * std::sqrt(2.0 * M_PI * T)), 1.0, 0.01);
  try {
    solve_z_epsilon(0.4, 1.0, 0.0, 2.0 / 3.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainError);
  }
}

TEST(MaxDisplacement, ZeroHorizon) {
  const auto p = BbmParams::for_model(ModelSpec::majority(), 0.1, 0.0);
  EXPECT_EQ(max_displacement_quantile(p, 3, 1, 10, 1), 0.0);
}

TEST(MaxDisplacement, SingleLineageGaussianQuantile) {
  auto p = BbmParams::for_model(ModelSpec::majority(), 0.1, 0.3);
  p.branch_rate = 1e-9;
  const std::uint64_t n = 100000;
  const double q = max_displacement_quantile(p, 3, 1, n, 7);
  const double sd = std::sqrt(p.variance_rate * p.horizon);
  const double x = normal_quantile(0.95);  // |B| quantile at 0.9
  const double se = std::sqrt(0.9 * 0.1 / n) / (2.0 * std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI) / sd);
  EXPECT_NEAR(q, sd * x, 3.0 * se);
}

TEST(MaxDisplacement, ScalesLikeEpsLogEps) {
  std::vector<double> ratio;
  for (double eps : {0.1, 0.05}) {
    const double h = eps * eps * std::abs(std::log(eps));
    const auto p = BbmParams::for_model(ModelSpec::majority(), eps, h);
    ratio.push_back(max_displacement_quantile(p, 3, 1, 4000, 8) / (eps * std::abs(std::log(eps))));
  }
  EXPECT_NEAR(ratio[1] / ratio[0], 1.0, 0.2);
}

TEST(SlopeConcavity, Examples) {
  const auto rule = VoteRule::majority();
  const auto p = small_params(ModelSpec::majority(), 0.1, 0.02);
  EXPECT_TRUE(slope_concavity_check(0.5, 0.25, p, rule, 20000, 9).pass);
  const auto zero = slope_concavity_check(0.3, 0.0, p, rule, 2000, 10);
  EXPECT_EQ(zero.second_difference, 0.0);
  EXPECT_EQ(zero.lower.value, zero.upper.value);
  EXPECT_TRUE(zero.pass);
  EXPECT_TRUE(slope_concavity_check(0.0, 0.25, p, rule, 20000, 11).pass);
}

TEST(Bbm, UpperFixedPointApproachedGeometrically) {
  const auto g = make_g(ModelSpec::sexual(4.5));
  const double up = 2.0 / 3.0, k2 = 1.0 - g.d1(up);
  for (int n = 0; n <= 30; ++n)
    EXPECT_LE(iterate_g(g, 1.0, static_cast<std::uint64_t>(n)) - up, std::pow(1.0 - k2, n) * (1.0 - up) + 1e-15);
}

TEST(Bbm, WorkerCountInvariance) {
  const auto p = small_params(ModelSpec::sexual(4.5), 0.5, 0.05);
  set_worker_count(1);
  const auto a = estimate_vote_probability(kZero, p, VoteRule::sexual(4.5), 3000, 12);
  set_worker_count(4);
  const auto b = estimate_vote_probability(kZero, p, VoteRule::sexual(4.5), 3000, 12);
  set_worker_count(0);
  EXPECT_EQ(a.value, b.value);
}

TEST(Bbm, SliceKeepsFixedPoints) {
  // the deterministic bottom slice preserves constant fixed-point data
  auto p = BbmParams::for_model(ModelSpec::sexual(4.5), 0.1, 0.25);
  p.initial_condition = constant_initial_condition(2.0 / 3.0);
  const auto s = slice_params(p, VoteRule::sexual(4.5));
  EXPECT_LT(s.horizon, p.horizon);
  const double x[] = {0.37};
  EXPECT_NEAR(s.initial_condition(x), 2.0 / 3.0, 1e-9);
}
