#include <cmath>

#include <gtest/gtest.h>

#include "dualvote/errors.hpp"
#include "dualvote/mcf.hpp"

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

// RK4 on dR/dt = -(d-1) D / R
double ode_radius(double R0, double t, int d, double D) {
  const int n = 100000;
  const double h = t / n;
  auto f = [&](double r) { return -(d - 1) * D / r; };
  double r = R0;
  for (int i = 0; i < n; ++i) {
    const double k1 = f(r), k2 = f(r + 0.5 * h * k1), k3 = f(r + 0.5 * h * k2), k4 = f(r + h * k3);
    r += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return r;
}

}  // namespace

TEST(SphereRadius, Examples) {
  EXPECT_EQ(sphere_radius(1.3, 0.0, 2, 1.0), 1.3);
  EXPECT_NEAR(sphere_radius(1.0, 0.5, 2, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(sphere_radius(1.0, 0.125, 3, 1.0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(sphere_radius(1.0, 0.125, 3, 1.0), ode_radius(1.0, 0.125, 3, 1.0), 1e-10);
  EXPECT_NEAR(sphere_radius(1.0, 0.45, 2, 1.0), ode_radius(1.0, 0.45, 2, 1.0), 1e-10);
  EXPECT_EQ(kind_of([] { sphere_radius(1.0, 0.51, 2, 1.0); }), ErrorKind::Extinct);
}

TEST(SphereRadius, ExtinctionConsistency) {
  for (int d : {2, 3}) {
    const double D = 0.7, R0 = 1.2, T = extinction_time(R0, d, D);
    EXPECT_NEAR(T, R0 * R0 / (2 * (d - 1) * D), 1e-15);
    double prev = INFINITY;
    for (int i = 0; i <= 1000; ++i) {
      const double t = T * i / 1000.0;
      const double r = sphere_radius(R0, t, d, D);
      EXPECT_LT(r, prev);
      EXPECT_NEAR(r * r + 2 * (d - 1) * D * t - R0 * R0, 0.0, 1e-12);
      prev = r;
    }
  }
}

TEST(SignedDistance, Examples) {
  const auto plane = FlowSpec::half_plane({0.0, 2.0}, 0.0);
  const double on[] = {3.0, 0.0};
  for (double t : {0.0, 1.0, 10.0}) EXPECT_EQ(signed_distance(plane, on, t), 0.0);
  const double above[] = {0.0, 0.5};
  EXPECT_DOUBLE_EQ(signed_distance(plane, above, 2.0), 0.5);
  const auto ball = FlowSpec::sphere({0.0, 0.0}, 1.0, 1.0);
  const double out[] = {2.0, 0.0}, in[] = {0.6, 0.0};
  EXPECT_DOUBLE_EQ(signed_distance(ball, out, 0.0), 1.0);
  EXPECT_NEAR(signed_distance(ball, in, 0.18), -0.2, 1e-15);
  EXPECT_EQ(kind_of([&] { signed_distance(ball, in, 0.6); }), ErrorKind::Extinct);
}

TEST(Regularity, PlanesAndSpheres) {
  const std::vector<FlowSpec> flows{FlowSpec::half_plane({1.0, 1.0}, 0.3), FlowSpec::half_plane({0.0, 1.0, 2.0}, -0.2),
                                    FlowSpec::sphere({0.0, 0.0}, 1.0, 0.5), FlowSpec::sphere({0.1, -0.2, 0.3}, 1.0)};
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto rep = regularity_check(flows[i], 1000, 0.2, 0.1, i);
    EXPECT_TRUE(rep.pass) << i;
    EXPECT_LE(rep.max_eikonal_error, 1e-6);
    EXPECT_LE(rep.max_velocity_error, 1e-6);
    EXPECT_EQ(rep.samples, 1000u);
    if (flows[i].shape == FlowSpec::Shape::HalfPlane) EXPECT_LT(rep.lipschitz_t, 1e-6);
  }
}

TEST(Regularity, SphereVelocityClosedForm) {
  // on the circle: -d_t d = R'(t) = -D / R and D * Lap d = D / R
  const auto ball = FlowSpec::sphere({0.0, 0.0}, 1.0, 0.5);
  const double t = 0.3, R = sphere_radius(1.0, t, 2, 0.5), h = 1e-5;
  const double x[] = {R, 0.0};
  const double dt = (signed_distance(ball, x, t + h) - signed_distance(ball, x, t - h)) / (2 * h);
  EXPECT_NEAR(-dt, -0.5 / R, 1e-6);
}

TEST(Regularity, BandGuard) {
  const auto ball = FlowSpec::sphere({0.0, 0.0}, 1.0, 1.0);
  EXPECT_EQ(kind_of([&] { regularity_check(ball, 10, 0.6, 0.0, 1); }), ErrorKind::DomainError);
  EXPECT_EQ(kind_of([&] { regularity_check(ball, 10, 0.1, 0.7, 1); }), ErrorKind::Extinct);
}

TEST(Regularity, CsvHeader) {
  const auto rep = regularity_check(FlowSpec::half_plane({1.0, 0.0}, 0.0), 5, 0.1, 0.0, 2);
  EXPECT_EQ(to_csv(rep).rfind("quantity,point,value,residual\n", 0), 0u);
}
