#include <cmath>

#include <gtest/gtest.h>

#include "dualvote/errors.hpp"
#include "dualvote/gfun.hpp"
#include "dualvote/pde.hpp"
#include "dualvote/rng.hpp"

using namespace dualvote;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::ConfigError;
}

RdeProblem front_problem(double beta, double eps, double h, double L) {
  const auto fp = forward_phi(ModelSpec::sexual(beta));
  RdeProblem pr;
  pr.phi = to_double(fp.phi);
  pr.eps = eps;
  pr.diffusion = 0.5;
  pr.h = h;
  pr.init = GridField::line(-L, L, h, Boundary::Neumann);
  const double top = fp.roots.back().value;
  pr.init.fill([&](double x, double) { return x < 0 ? top : 0.0; });
  pr.dt = stable_dt(pr);
  return pr;
}

double rho1(double beta) { return forward_phi(ModelSpec::sexual(beta)).roots[1].value; }

}  // namespace

TEST(Solve, FixedPointIsStationary) {
  auto pr = front_problem(4.5, 0.1, 0.02, 2.0);
  pr.init.fill([](double, double) { return 2.0 / 3.0; });
  const auto out = solve_final(pr, 0.2);
  for (double v : out.values) EXPECT_NEAR(v, 2.0 / 3.0, 1e-12);
}

TEST(Solve, StabilityGuards) {
  auto pr = front_problem(4.5, 0.1, 0.02, 2.0);
  pr.dt = 2.0 * pr.h * pr.h;  // diffusion limit is h^2 / 2D = h^2
  EXPECT_EQ(kind_of([&] { check_stability(pr); }), ErrorKind::StabilityViolation);
  pr = front_problem(4.5, 0.1, 0.02, 2.0);
  pr.init.fill([](double, double) { return 1.5; });
  EXPECT_EQ(kind_of([&] { solve(pr, 0.01); }), ErrorKind::RangeEscape);
}

TEST(Solve, OrderPreserved) {
  Stream s(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto lo = front_problem(4.8, 0.1, 0.02, 2.0);
    auto hi = lo;
    const double a = s.uniform() * 3.0, b = s.uniform() * 0.3, c = s.uniform() - 0.5;
    lo.init.fill([&](double x, double) { return 0.45 + 0.4 * std::tanh(a * (c - x)) - 0.05 * b; });
    hi.init.fill([&](double x, double) { return 0.45 + 0.4 * std::tanh(a * (c - x)) + 0.05 * b; });
    const auto fl = solve_final(lo, 0.05), fh = solve_final(hi, 0.05);
    for (std::size_t i = 0; i < fl.values.size(); ++i) EXPECT_LE(fl.values[i], fh.values[i] + 1e-10);
  }
}

TEST(Solve, OddDataKeepsCentreAtUnstableRoot) {
  auto pr = front_problem(4.5, 0.1, 0.02, 2.0);
  pr.init.fill([](double x, double) { return 1.0 / 3.0 - 0.3 * std::tanh(3.0 * x); });
  const auto out = solve_final(pr, 0.1);
  EXPECT_NEAR(out.interpolate(0.0), 1.0 / 3.0, 1e-8);
}

TEST(WaveSpeed, ZeroAtSymmetryPoint) {
  const auto tr = wave_speed(front_problem(4.5, 0.05, 0.01, 6.0), 3.0, rho1(4.5));
  EXPECT_LE(std::abs(tr.speed), 0.02);
}

TEST(WaveSpeed, SignMatchesIntegral) {
  for (double beta : {4.2, 4.8, 5.5}) {
    const auto fp = forward_phi(ModelSpec::sexual(beta));
    const auto tr = wave_speed(front_problem(beta, 0.05, 0.01, 20.0), 1.5, rho1(beta));
    const auto is = integral_sign(fp.phi, fp.roots.back());
    EXPECT_EQ(tr.speed > 0 ? 1 : -1, is.sign) << "beta " << beta;
    // quadrature oracle for the integral itself
    const auto phi = to_double(fp.phi);
    const double top = fp.roots.back().value;
    double q = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) q += phi((i + 0.5) * top / n) * top / n;
    EXPECT_NEAR(is.value, q, 1e-8);
  }
}

TEST(WaveSpeed, GridRefinement) {
  const double level = rho1(4.8);
  const auto coarse_pr = front_problem(4.8, 0.1, 0.02, 6.0);
  const auto coarse = wave_speed(coarse_pr, 2.0, level);
  auto fine_pr = front_problem(4.8, 0.1, 0.01, 6.0);
  fine_pr.dt = coarse_pr.dt / 4.0;
  const auto fine = wave_speed(fine_pr, 2.0, level);
  EXPECT_NEAR(fine.speed / coarse.speed, 1.0, 0.1);
}

TEST(WaveSpeed, FrontLost) {
  auto pr = front_problem(4.5, 0.1, 0.02, 2.0);
  pr.init.fill([](double, double) { return 0.0; });
  EXPECT_EQ(kind_of([&] { wave_speed(pr, 0.1, 1.0 / 3.0); }), ErrorKind::FrontLost);
}

TEST(IntegralSign, Examples) {
  const auto at = [](double beta) {
    const auto fp = forward_phi(ModelSpec::sexual(beta));
    return integral_sign(fp.phi, fp.roots.back());
  };
  const auto zero = at(4.5);
  EXPECT_EQ(zero.sign, 0);
  ASSERT_TRUE(zero.exact.has_value());
  EXPECT_EQ(*zero.exact, Rational(0));
  EXPECT_EQ(at(5.0).sign, 1);
  EXPECT_EQ(at(4.2).sign, -1);
}

TEST(Circle, RadialExtinctionTime) {
  const auto fp = forward_phi(ModelSpec::sexual(4.5));
  RadialProblem rp;
  rp.phi = to_double(fp.phi);
  rp.eps = 0.02;
  rp.diffusion = 0.5;
  rp.h = 5e-4;
  rp.r_max = 1.9;
  rp.dt = 0.25 * rp.eps * rp.eps / max_abs_slope(rp.phi);
  std::vector<double> times;
  for (int i = 1; i <= 60; ++i) times.push_back(0.02 * i);
  const auto r = radial_front(rp, 1.0, 0.0, 2.0 / 3.0, 1.0 / 3.0, times);
  double extinct = INFINITY;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (std::isnan(r[i])) {
      extinct = times[i];
      break;
    }
  EXPECT_NEAR(extinct, 1.0, 0.1);
}

TEST(Circle, LevelSetRadiusOfDisc) {
  auto f = GridField::square(0.0, 1.5, 0.01, Boundary::Neumann);
  f.fill([](double x, double y) { return std::hypot(x, y) < 0.8 ? 0.0 : 1.0; });
  EXPECT_NEAR(level_set_radius(f, 0.5), 0.8, 0.01);
}
