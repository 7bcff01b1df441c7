#pragma once

// Explicit finite differences for u_t = D Lap u + eps^-2 phi(u) on uniform
// cell-centred grids in one or two dimensions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dualvote/polynomial.hpp"

namespace dualvote {

enum class Boundary { Periodic, Neumann };

struct GridField {
  int dimension = 1;
  std::size_t nx = 0, ny = 1;
  double h = 0.0;
  double x0 = 0.0, y0 = 0.0;  // centre of cell (0,0)
  Boundary boundary = Boundary::Neumann;
  std::vector<double> values;  // row-major: index = j*nx + i

  static GridField line(double lo, double hi, double h, Boundary b);
  static GridField square(double lo, double hi, double h, Boundary b);

  double x(std::size_t i) const { return x0 + static_cast<double>(i) * h; }
  double y(std::size_t j) const { return y0 + static_cast<double>(j) * h; }
  double& at(std::size_t i, std::size_t j = 0) { return values[j * nx + i]; }
  double at(std::size_t i, std::size_t j = 0) const { return values[j * nx + i]; }
  // Piecewise-linear (1D) or bilinear (2D) interpolation, constant past the edges.
  double interpolate(double px, double py = 0.0) const;
  void fill(const std::function<double(double, double)>& f);
};

struct RdeProblem {
  DPoly phi;
  double eps = std::numeric_limits<double>::infinity();  // infinity: unscaled reaction
  double diffusion = 0.5;
  int dimension = 1;
  double h = 0.01;
  double dt = 1e-5;
  Boundary boundary = Boundary::Neumann;
  GridField init;

  double reaction_scale() const { return std::isinf(eps) ? 1.0 : 1.0 / (eps * eps); }
};

// max |phi'| over [0,1]
double max_abs_slope(const DPoly& phi);
// Largest dt with safety factor applied to both explicit-scheme limits.
double stable_dt(const RdeProblem& p, double safety = 0.5);
// Throws StabilityViolation.
void check_stability(const RdeProblem& p);

struct Trajectory {
  std::vector<double> times;
  std::vector<GridField> fields;
};

// Snapshots at 0 and at each sample time (ascending, <= horizon); the last is at horizon.
// Throws StabilityViolation, RangeEscape.
Trajectory solve(const RdeProblem& problem, double horizon, const std::vector<double>& sample_times = {});
GridField solve_final(const RdeProblem& problem, double horizon);

// First crossing of level scanning left to right (1D, or along row j in 2D). Throws FrontLost.
double level_crossing(const GridField& f, double level, std::size_t row = 0);

struct FrontTrack {
  std::vector<double> times;
  std::vector<double> positions;
  double speed = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

// Tracks the level crossing at n_samples equally spaced times; speed from a least-squares
// fit on the second half of the window. Positive speed means the crossing moves right.
FrontTrack wave_speed(const RdeProblem& problem, double horizon, double level, std::size_t n_samples = 41);

struct IntegralSign {
  int sign = 0;
  double value = 0.0;
  std::optional<Rational> exact;
};

// Sign of the integral of phi over [0, upper].
IntegralSign integral_sign(const RPoly& phi, const RealRoot& upper);

// Mean radius of the level set along rays from the origin of a quarter-domain field.
// Throws FrontLost when the radius is below 5h or no ray crosses.
double level_set_radius(const GridField& f, double level, std::size_t rays = 32);

struct CircleRun {
  FrontTrack track;      // positions hold radii
  Trajectory snapshots;  // fields at the track times
};

// 2D run on the quarter domain [0, L]^2 (mirror axes); init u_in inside radius R0, u_out outside.
CircleRun shrinking_circle(const RdeProblem& problem, double R0, double u_in, double u_out, double level,
                           const std::vector<double>& times);

struct RadialProblem {
  DPoly phi;
  double eps = 1.0;
  double diffusion = 0.5;
  double h = 1e-3;
  double dt = 1e-6;
  double r_max = 2.0;
};

// Fine 1D solve of u_t = D (u_rr + u_r / r) + eps^-2 phi(u), implicit in the diffusion term.
// Returns the level-crossing radius at each time (NaN once the inner phase has vanished).
std::vector<double> radial_front(const RadialProblem& p, double R0, double u_in, double u_out, double level,
                                 const std::vector<double>& times);

}  // namespace dualvote
