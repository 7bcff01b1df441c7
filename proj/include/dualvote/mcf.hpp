#pragma once

// Closed-form mean curvature flows (stationary hyperplane, shrinking sphere)
// and finite-difference checks of their signed distance functions.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dualvote {

struct FlowSpec {
  enum class Shape { HalfPlane, Sphere };
  Shape shape = Shape::Sphere;
  int dimension = 2;
  std::vector<double> normal;  // half plane {x : <x, n> <= offset} is the inside
  double offset = 0.0;
  std::vector<double> center;
  double R0 = 1.0;
  double speed_const = 1.0;  // normal velocity D * kappa

  static FlowSpec half_plane(std::vector<double> normal, double offset, double D = 1.0);
  static FlowSpec sphere(std::vector<double> center, double R0, double D = 1.0);
};

double extinction_time(double R0, int dimension, double D);
// sqrt(R0^2 - 2 (d-1) D t). Throws Extinct past the extinction time.
double sphere_radius(double R0, double t, int dimension, double D);

// Positive outside, negative inside. Throws Extinct.
double signed_distance(const FlowSpec& flow, std::span<const double> x, double t);

struct RegularityRow {
  std::string quantity;
  std::vector<double> point;
  double value = 0.0;
  double residual = 0.0;
};

struct RegularityReport {
  double max_eikonal_error = 0.0;   // max ||grad d| - 1| over band points
  double max_velocity_error = 0.0;  // max |d_t d - D Lap d| on the interface
  double lipschitz_t = 0.0;         // empirical sup |d(x,t+s) - d(x,t)| / s
  std::size_t samples = 0;
  bool pass = false;
  std::vector<RegularityRow> rows;
};

// Samples points with |d| <= band at time t, and the same number exactly on the interface.
// Throws DomainError when band >= R(t)/2 for spheres, Extinct past extinction.
RegularityReport regularity_check(const FlowSpec& flow, std::size_t samples, double band, double t,
                                  std::uint64_t seed, double tol = 1e-6);

std::string to_csv(const RegularityReport& report);

}  // namespace dualvote
