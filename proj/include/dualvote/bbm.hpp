#pragma once

// Branching Brownian motion duals: per-trial tree + Gaussian displacements,
// leaf states drawn from an initial condition, root decided by a vote rule.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dualvote/dualtree.hpp"
#include "dualvote/gfun.hpp"
#include "dualvote/stats.hpp"

namespace dualvote {

using InitialCondition = std::function<double(std::span<const double>)>;

struct BbmParams {
  double eps = 0.1;
  double branch_rate = 100.0;
  double variance_rate = 2.0;
  int dimension = 1;
  double horizon = 0.0;
  InitialCondition initial_condition;
  std::size_t vertex_cap = kDefaultVertexCap;

  // branch_rate = r / eps^2 with the family's reaction rate; variance per family.
  static BbmParams for_model(const ModelSpec& spec, double eps, double horizon, int dimension = 1);
};

// Brownian variance per unit time used for each family's dual.
double default_variance_rate(const ModelSpec& spec);

// u_plus on x[0] >= 0, u_minus otherwise.
InitialCondition step_initial_condition(double u_minus, double u_plus);
InitialCondition constant_initial_condition(double u);

// One sampled dual: tree, displacement of every vertex from the start, leaf uniforms.
struct DualSample {
  TimeLabelledTree tree;
  std::vector<double> displacement;  // dimension values per vertex
  std::vector<double> leaf_uniform;  // in leaf_indices() order
  Stream vote_stream;
};

DualSample draw_dual(const BbmParams& params, int arity, Stream trial);

// Vote of a drawn sample started at start, optionally reflected (x -> -x) with
// complemented leaf uniforms.
std::uint8_t evaluate_dual(const DualSample& s, std::span<const double> start, const BbmParams& params,
                           const VoteRule& rule, bool mirrored = false);

EstimateWithCI estimate_vote_probability(std::span<const double> start, const BbmParams& params,
                                         const VoteRule& rule, std::uint64_t trials, std::uint64_t seed);

struct ProfileRow {
  double z = 0.0;
  EstimateWithCI estimate;
};

struct InterfaceProfile {
  std::vector<ProfileRow> rows;
  double eps = 0.0;
  double t = 0.0;
  std::string rule;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

// With common_random_numbers every z shares the trial's tree, paths and leaf uniforms.
InterfaceProfile interface_profile_1d(const std::vector<double>& z_grid, const BbmParams& params,
                                      const VoteRule& rule, std::uint64_t trials, std::uint64_t seed,
                                      bool common_random_numbers = true);

std::string to_csv(const InterfaceProfile& profile);

struct PairedEstimate {
  EstimateWithCI plus;   // P(z)
  EstimateWithCI minus;  // P(-z)
  EstimateWithCI sum;    // per-trial V(z) + V(-z)
};

// Same tree, reflected paths, complemented leaf uniforms, same vote stream.
PairedEstimate antisymmetry_pair(double z, const BbmParams& params, const VoteRule& rule, std::uint64_t trials,
                                 std::uint64_t seed);

// u_plus P_z(B_t >= 0) + u_minus P_z(B_t < 0) for Brownian variance rate v.
double brownian_step_bound(double z, double t, double variance_rate, double u_minus, double u_plus);

// sqrt(v T) Phi^-1(1/2 + eps/(u+ - u-)); throws DomainError when the level is outside (0,1).
double solve_z_epsilon(double eps, double T_star, double u_minus, double u_plus, double variance_rate);

// Empirical (1 - eps^k) quantile over trials of max_i |B_i(t) - x| across particles alive at the horizon.
double max_displacement_quantile(const BbmParams& params, int arity, int k, std::uint64_t trials, std::uint64_t seed);

struct SlopeReport {
  EstimateWithCI lower, centre, upper;  // P(z - eta), P(z), P(z + eta)
  double second_difference = 0.0;       // mean of V(z+eta) - 2 V(z) + V(z-eta)
  double pooled_se = 0.0;
  bool pass = false;  // second difference <= 3 pooled SE
};

SlopeReport slope_concavity_check(double z, double eta, const BbmParams& params, const VoteRule& rule,
                                  std::uint64_t trials, std::uint64_t seed);

// The g polynomial realised by a vote rule with singleton partitions.
GFunction g_of_rule(const VoteRule& rule);

struct SliceOptions {
  double window_events = 1.5;  // branch_rate * window
  double grid_h = 0.0;         // 0: sqrt(v / branch_rate) / 8
  double half_width = 0.0;     // 0: chosen from the horizon
};

// Replaces the bottom of the dual by the deterministic field u(t - window, .) that solves
// u_s = (v/2) u'' + rate (g(u) - u): the dual then only runs over the top window.
// One dimension only; returns params unchanged if the horizon fits in one window.
BbmParams slice_params(const BbmParams& params, const VoteRule& rule, const SliceOptions& opt = {});

}  // namespace dualvote
