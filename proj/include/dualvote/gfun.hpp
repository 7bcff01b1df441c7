#pragma once

// Voting functions g of the four model families: exact polynomial form,
// fixed points, iteration and the bistability conditions (G0)-(G5).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualvote/polynomial.hpp"

namespace dualvote {

enum class Family { Majority, SexualReproduction, LotkaVolterraBoundary, NonlinearVoter, CustomCubic };

std::string_view to_string(Family f) noexcept;
// Throws InvalidSpec for unknown names.
Family family_from_string(std::string_view name);

struct ModelSpec {
  Family family = Family::Majority;
  double beta = 4.5;
  double theta = 1.0;
  double p2 = 0.0;
  double p3 = 0.32;
  double a1 = 0.25;
  double a2 = 0.3;
  double c = 1.0;
  double u_minus = 0.0;
  double u_zero = 0.5;
  double u_plus = 1.0;

  static ModelSpec majority();
  static ModelSpec sexual(double beta);
  static ModelSpec lotka_volterra(double theta, double p3, double p2 = 0.0);
  static ModelSpec nonlinear_voter(double a1, double a2);
  static ModelSpec custom_cubic(double c, double u_minus, double u_zero, double u_plus);

  // nonlinear voter weights; a(0) = 0, a(5) = 1
  double a(int k) const;
  double b1() const { return 5.0 * a1 - 1.0; }
  double b2() const { return 10.0 * a2 - 4.0; }
  // ternary dual for every family except the nonlinear voter (5 inputs)
  int arity() const { return family == Family::NonlinearVoter ? 5 : 3; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Throws InvalidSpec; NotInRegion2 when enforce_region2 and (A1) fails.
void validate(const ModelSpec& spec, bool enforce_region2 = false);

struct GFunction {
  ModelSpec spec;
  RPoly exact;
  DPoly poly;
  DPoly d1;  // g'
  DPoly d2;  // g''
  double reaction_rate = 1.0;

  // Unchecked evaluation.
  double operator()(double p) const { return poly(p); }
};

GFunction make_g(const ModelSpec& spec, bool enforce_region2 = false);

// Reaction rate r with phi = r (g - p).
double default_reaction_rate(const ModelSpec& spec);

double eval_g(const GFunction& g, double p);

enum class Stability { Stable, Unstable };

struct FixedPoint {
  double location = 0.0;
  double slope = 0.0;  // g' at the point
  Stability stability = Stability::Unstable;
  std::optional<Rational> exact;
};

struct FixedPointSet {
  double u_minus = 0.0;
  double u_zero = 0.0;
  double u_plus = 0.0;
  std::optional<Rational> exact_u_zero;
  std::vector<FixedPoint> all;             // every root of g(p) - p in [0,1]
  std::vector<FixedPoint> boundary_fixed;  // roots at 0 or 1 other than u_-, u_+
};

// Throws DegenerateRoots, NotBistable.
FixedPointSet fixed_points(const GFunction& g);

struct ConditionEntry {
  std::string name;
  bool pass = false;
  double witness_p = 0.0;
  double witness_value = 0.0;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;
  double c0 = 0.0;
  double delta0 = 0.0;
  std::size_t grid_resolution = 0;

  bool all_pass() const;
  // Throws DomainError when absent.
  const ConditionEntry& at(std::string_view name) const;
};

ConditionReport check_conditions(const GFunction& g, std::size_t grid = 10000);

double iterate_g(const GFunction& g, double p, std::uint64_t n);

struct ConvergenceSteps {
  std::uint64_t up = 0;    // g^n(u0 + eps) >= u+ - eps^k
  std::uint64_t down = 0;  // g^n(u0 - eps) <= u- + eps^k
};

// Throws DomainError, CapExceeded (cap 10^6 iterations).
ConvergenceSteps convergence_steps(const GFunction& g, double eps, int k);

// Exact g(p+eta) - 2 g(p) + g(p-eta) at the binary values of p and eta.
Rational second_difference(const GFunction& g, double p, double eta);
// Sign of the above; requires the stencil inside [u0, u+].
int second_difference_sign(const GFunction& g, double p, double eta);

struct ForwardPhi {
  RPoly phi;
  std::vector<RealRoot> roots;  // zeros in [0,1]
};

// Forward reaction term. Throws NoPositiveRoots for sexual reproduction with beta < 4.
ForwardPhi forward_phi(const ModelSpec& spec);

}  // namespace dualvote
