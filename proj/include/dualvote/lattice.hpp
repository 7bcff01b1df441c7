#pragma once

// Particle systems on the torus (eta Z / side)^d: forward graphical-representation
// simulation, the lattice dual (exact coalescing X and comparison X-hat run on
// shared randomness), and the collision and random-walk diagnostics.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dualvote/bbm.hpp"
#include "dualvote/gfun.hpp"
#include "dualvote/rng.hpp"
#include "dualvote/stats.hpp"

namespace dualvote {

// Lattice coordinates; entries past the dimension stay 0.
using Coord = std::array<std::int32_t, 3>;

struct ScalingParams {
  double delta = 0.1;
  double eps = 0.5;
  double eta = 0.05;
  double stir_rate = 200.0;  // per unordered nearest-neighbour pair
  double event_rate = 22.0;  // per site
  int torus_side = 16;
  int dimension = 2;
  int range = 1;  // L of the nonlinear voter neighbourhood [-L,L]^d

  // Defaults: stir_rate = eta^-2 / 2, event_rate from default_event_rate.
  // dimension 0 picks the family default.
  static ScalingParams make(const ModelSpec& model, double eps, double eta, int torus_side, int dimension = 0);

  // Voter models jump at 2 * stir_rate to a uniform nearest neighbour.
  double voter_rate() const noexcept { return 2.0 * stir_rate; }
  std::size_t sites() const;
};

// (1 + beta) eps^-2 for sexual reproduction, eps^-2 for the voter perturbations.
double default_event_rate(const ModelSpec& model, double eps);
// 2 for sexual reproduction, 3 otherwise.
int default_lattice_dimension(const ModelSpec& model);
// Rate at which one site's perturbation clock rings (theta * event_rate for Lotka-Volterra).
double site_event_rate(const ModelSpec& model, const ScalingParams& scaling);

// Throws InvalidSpec.
void validate(const ScalingParams& scaling);
// Throws InvalidSpec for families without a lattice model or inconsistent dimension.
void validate_lattice_model(const ModelSpec& model, const ScalingParams& scaling);

struct LatticeConfig {
  int dimension = 2;
  int side = 16;
  double eta = 0.05;
  std::vector<std::uint8_t> occupancy;
  ModelSpec model;
  double time = 0.0;

  static LatticeConfig filled(const ModelSpec& model, const ScalingParams& scaling, std::uint8_t value);
  // Independent Bernoulli(init(position)) sites.
  static LatticeConfig product(const ModelSpec& model, const ScalingParams& scaling, const InitialCondition& init,
                               Stream& rng);

  std::size_t sites() const noexcept { return occupancy.size(); }
  std::size_t count() const noexcept;
  // Coordinates are centred: each entry in [-side/2, side/2).
  std::size_t index(const Coord& c) const noexcept;
  Coord coords(std::size_t site) const noexcept;
  std::vector<double> position(std::size_t site) const;
  std::uint8_t at(const Coord& c) const { return occupancy[index(c)]; }
};

// "x [y [z]] state" per line.
std::string to_text(const LatticeConfig& config);

struct ForwardEvent {
  enum class Type : std::uint8_t { Stir, Voter, Birth, Death, Update };
  double time = 0.0;
  Type type = Type::Stir;
  std::size_t site = 0;
  std::size_t other = 0;
  std::uint8_t before = 0;
  std::uint8_t after = 0;
};

struct ForwardOptions {
  double event_budget = 1e9;
  bool stop_when_absorbed = false;
  std::vector<ForwardEvent>* log = nullptr;
};

// Exact superposition-clock simulation up to the horizon (or absorption when requested;
// config.time is the stopping time). Throws RateOverflow, ConfigError, InvalidSpec.
LatticeConfig run_forward(const ModelSpec& model, const ScalingParams& scaling, LatticeConfig init, double horizon,
                          Stream& rng, const ForwardOptions& options = {});

std::string to_csv(const std::vector<ForwardEvent>& log);

enum class DualProcess { Exact, Comparison };
enum class DualMode { Both, ExactOnly, ComparisonOnly };

struct DualOptions {
  DualMode mode = DualMode::Both;
  bool record_paths = false;
  bool stop_at_first_collision = false;
  std::size_t particle_cap = 1'000'000;
  double event_budget = 1e9;
};

struct PathPoint {
  double time = 0.0;
  Coord site{};
};

struct DualParticle {
  std::int64_t parent = -1;
  double birth_time = 0.0;
  bool offspring = false;  // false for the root and for continuing lineages
  Coord site{};            // unwrapped lattice coordinates at the end of the run
  bool in_exact = false;
  bool in_comparison = false;
  std::vector<PathPoint> path;
};

// One step of the backward log. Branch: particle reads its children and itself.
// Merge: particle takes the state of children[0] from here on (backward).
struct DualOp {
  enum class Kind : std::uint8_t { Branch, Merge };
  double time = 0.0;
  Kind kind = Kind::Branch;
  std::uint32_t particle = 0;
  std::uint8_t n_children = 0;
  std::array<std::uint32_t, 4> children{};
  double u = 0.0;
  bool birth = false;  // sexual reproduction: birth-type event
};

struct CollisionEvent {
  double time = 0.0;
  std::uint32_t parent = 0;
  Coord site{};
  std::uint32_t occupant = 0;
};

struct CoalescenceEvent {
  double time = 0.0;
  std::uint32_t from = 0;
  std::uint32_t into = 0;
  bool exact = false;
  bool comparison = false;
};

struct DualRealization {
  ModelSpec model;
  ScalingParams scaling;
  Coord start{};
  double horizon = 0.0;
  std::vector<DualParticle> particles;
  std::vector<DualOp> exact_ops;
  std::vector<DualOp> comparison_ops;
  std::vector<std::uint32_t> exact_leaves;
  std::vector<std::uint32_t> comparison_leaves;
  std::vector<CollisionEvent> collisions;
  std::vector<CoalescenceEvent> coalescences;
  std::vector<double> comparison_branch_times;
  std::vector<double> blocked_branch_times;  // exact branches inside a comparison window
  double divergence_time = std::numeric_limits<double>::infinity();
  double first_collision_time = std::numeric_limits<double>::infinity();
  std::uint64_t events = 0;
  std::int32_t max_excursion = 0;  // largest |coordinate| displacement from start, lattice units
  bool wrapped = false;            // some lineage travelled half the torus or more
};

// Throws ExplosionGuard past particle_cap, RateOverflow past event_budget.
DualRealization run_dual(const ModelSpec& model, const ScalingParams& scaling, const Coord& start, double horizon,
                         Stream& rng, const DualOptions& options = {});

// Root state: leaves Bernoulli(init(position of their torus site)), then the log replayed
// backward. Leaf draws use rng.split(particle id).
std::uint8_t evaluate_dual(const DualRealization& dual, DualProcess which, const InitialCondition& init,
                           const Stream& rng);

// Output of one branch vertex with inputs {parent, children...}.
std::uint8_t lattice_vertex_rule(const ModelSpec& model, std::span<const std::uint8_t> inputs, double u);

EstimateWithCI dual_vote_estimate(const ModelSpec& model, const ScalingParams& scaling, const Coord& start,
                                  double horizon, const InitialCondition& init, std::uint64_t trials,
                                  std::uint64_t seed, DualProcess which = DualProcess::Comparison);

struct CollisionRow {
  double eta = 0.0;
  EstimateWithCI collision;  // P(first collision before the horizon)
  EstimateWithCI crowded;    // time a neighbouring pair spends within distance eta
  double crowded_scale = 0.0;  // eta^2 log(eta^-2)
  double mean_particles = 0.0;
  bool wrapped = false;
};

// Sweep over eta at fixed eps. torus_side 0 picks a side that avoids wrap-around.
std::vector<CollisionRow> collision_stats(const ModelSpec& model, double eps, std::span<const double> etas,
                                          double horizon, std::uint64_t trials, std::uint64_t seed,
                                          int torus_side = 0);

std::string to_csv(const std::vector<CollisionRow>& rows);

// Two stirring walks started one lattice step apart; time with L1 distance <= eta.
EstimateWithCI pair_crowded_time(const ScalingParams& scaling, double horizon, std::uint64_t trials,
                                 std::uint64_t seed);

enum class WalkKind { Stirring, Voter };

struct WalkDiagnostic {
  bool skipped = false;  // horizon 0: point mass, nothing to test
  std::uint64_t trials = 0;
  double sigma2 = 0.0;  // variance per coordinate per unit time
  double ks = 0.0;      // first coordinate against N(0, sigma2 t)
  double ks_critical = 0.0;
  double variance_per_coord = 0.0;
  double predicted_variance = 0.0;
  double relative_error = 0.0;
  double quantile_deviation = 0.0;  // 0.99 quantile of |walk - gaussian| under the quantile coupling
};

WalkDiagnostic walk_vs_bm_diagnostic(const ScalingParams& scaling, WalkKind kind, double horizon,
                                     std::uint64_t trials, std::uint64_t seed, double alpha = 0.01);

struct DualityRow {
  Coord probe{};
  EstimateWithCI forward;
  EstimateWithCI dual;
  double z = 0.0;
};

struct DualityReport {
  std::vector<DualityRow> rows;
  bool config_error = false;
  std::string message;
  double max_abs_z = 0.0;
  bool pass = false;
};

// Forward marginals P(xi_t(x) = 1) from independent replicas against the exact dual.
DualityReport duality_check(const ModelSpec& forward_model, const ModelSpec& dual_model, const ScalingParams& scaling,
                            const InitialCondition& init, std::span<const Coord> probes, double horizon,
                            std::uint64_t trials, std::uint64_t seed, double z_bound = 4.0);

std::string to_csv(const DualityReport& report);

}  // namespace dualvote
