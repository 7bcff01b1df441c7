#include "dualvote/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "dualvote/errors.hpp"
#include "dualvote/parallel.hpp"
#include "dualvote/pde.hpp"

namespace dualvote {

namespace {

Stream trial_stream(std::uint64_t seed, std::uint64_t trial) { return derive_stream(seed, {"bbm", trial}); }

}  // namespace

double default_variance_rate(const ModelSpec& spec) {
  switch (spec.family) {
    case Family::SexualReproduction: return 1.0;  // stirring walk, sigma^2 = 1
    case Family::NonlinearVoter:
    case Family::LotkaVolterraBoundary: return 1.0 / 3.0;  // voter walk in d = 3
    default: return 2.0;
  }
}

BbmParams BbmParams::for_model(const ModelSpec& spec, double eps, double horizon, int dimension) {
  require(eps > 0.0, ErrorKind::DomainError, "eps must be > 0");
  BbmParams p;
  p.eps = eps;
  p.branch_rate = default_reaction_rate(spec) / (eps * eps);
  p.variance_rate = default_variance_rate(spec);
  p.dimension = dimension;
  p.horizon = horizon;
  return p;
}

InitialCondition step_initial_condition(double u_minus, double u_plus) {
  return [u_minus, u_plus](std::span<const double> x) { return x[0] >= 0.0 ? u_plus : u_minus; };
}

InitialCondition constant_initial_condition(double u) {
  return [u](std::span<const double>) { return u; };
}

DualSample draw_dual(const BbmParams& params, int arity, Stream trial) {
  require(params.branch_rate >= 0.0 && params.variance_rate > 0.0 && params.horizon >= 0.0 && params.dimension >= 1,
          ErrorKind::DomainError, "invalid branching Brownian motion parameters");
  DualSample s;
  Stream tree_rng = trial.split("tree");
  Stream path_rng = trial.split("path");
  Stream leaf_rng = trial.split("leaf");
  s.vote_stream = trial.split("vote");
  s.tree = sample_tree(params.branch_rate, params.horizon, arity, tree_rng, params.vertex_cap);
  const auto d = static_cast<std::size_t>(params.dimension);
  s.displacement.assign(s.tree.size() * d, 0.0);
  for (std::size_t v = 0; v < s.tree.size(); ++v) {
    const double dt = s.tree.segment_start(v) - s.tree.vertices[v].time;
    const double sd = std::sqrt(params.variance_rate * std::max(dt, 0.0));
    const std::int64_t parent = s.tree.vertices[v].parent;
    for (std::size_t i = 0; i < d; ++i) {
      const double base = parent < 0 ? 0.0 : s.displacement[static_cast<std::size_t>(parent) * d + i];
      s.displacement[v * d + i] = base + sd * path_rng.normal();
    }
  }
  const std::size_t leaves = s.tree.leaf_count();
  s.leaf_uniform.resize(leaves);
  for (auto& u : s.leaf_uniform) u = leaf_rng.uniform();
  return s;
}

std::uint8_t evaluate_dual(const DualSample& s, std::span<const double> start, const BbmParams& params,
                           const VoteRule& rule, bool mirrored) {
  const auto d = static_cast<std::size_t>(params.dimension);
  require(start.size() == d, ErrorKind::DomainError, "start point has the wrong dimension");
  std::vector<std::uint8_t> state(s.tree.size(), 0);
  std::vector<double> pos(d);
  std::size_t leaf = 0;
  for (std::size_t v = 0; v < s.tree.size(); ++v) {
    if (s.tree.vertices[v].kind != VertexKind::Leaf) continue;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = start[i] + s.displacement[v * d + i];
      pos[i] = mirrored ? -x : x;
    }
    const double u = mirrored ? 1.0 - s.leaf_uniform[leaf] : s.leaf_uniform[leaf];
    state[v] = static_cast<std::uint8_t>(u < params.initial_condition(pos));
    ++leaf;
  }
  return vote_vertices(s.tree, state, rule, s.vote_stream);
}

EstimateWithCI estimate_vote_probability(std::span<const double> start, const BbmParams& params,
                                         const VoteRule& rule, std::uint64_t trials, std::uint64_t seed) {
  require(trials >= 1, ErrorKind::EmptyEstimate, "vote probability needs at least one trial");
  require(static_cast<bool>(params.initial_condition), ErrorKind::DomainError, "initial condition not set");
  const std::vector<double> x(start.begin(), start.end());
  const auto out = parallel_map<std::uint8_t>(trials, [&](std::size_t t) {
    const DualSample s = draw_dual(params, rule.arity(), trial_stream(seed, t));
    return evaluate_dual(s, x, params, rule);
  });
  std::uint64_t ones = 0;
  for (auto v : out) ones += v;
  return bernoulli_estimate(ones, trials, seed);
}

InterfaceProfile interface_profile_1d(const std::vector<double>& z_grid, const BbmParams& params,
                                      const VoteRule& rule, std::uint64_t trials, std::uint64_t seed,
                                      bool common_random_numbers) {
  require(params.dimension == 1, ErrorKind::DomainError, "interface profile is one-dimensional");
  require(trials >= 1, ErrorKind::EmptyEstimate, "profile needs at least one trial");
  InterfaceProfile prof;
  prof.eps = params.eps;
  prof.t = params.horizon;
  prof.rule = std::string(to_string(rule.kind));
  prof.trials = trials;
  prof.seed = seed;
  if (common_random_numbers) {
    const auto out = parallel_map<std::vector<std::uint8_t>>(trials, [&](std::size_t t) {
      const DualSample s = draw_dual(params, rule.arity(), trial_stream(seed, t));
      std::vector<std::uint8_t> row(z_grid.size());
      for (std::size_t k = 0; k < z_grid.size(); ++k) {
        const double z = z_grid[k];
        row[k] = evaluate_dual(s, std::span<const double>(&z, 1), params, rule);
      }
      return row;
    });
    for (std::size_t k = 0; k < z_grid.size(); ++k) {
      std::uint64_t ones = 0;
      for (const auto& row : out) ones += row[k];
      prof.rows.push_back({z_grid[k], bernoulli_estimate(ones, trials, seed)});
    }
  } else {
    for (std::size_t k = 0; k < z_grid.size(); ++k) {
      const double z = z_grid[k];
      const std::uint64_t sub = derive_stream(seed, {"profile", k}).key();
      prof.rows.push_back({z, estimate_vote_probability(std::span<const double>(&z, 1), params, rule, trials, sub)});
      prof.rows.back().estimate.seed = seed;
    }
  }
  return prof;
}

std::string to_csv(const InterfaceProfile& p) {
  std::ostringstream os;
  os.precision(17);
  os << "z,p_hat,stderr,trials,eps,t,rule,seed\n";
  for (const auto& r : p.rows)
    os << r.z << ',' << r.estimate.value << ',' << r.estimate.std_error << ',' << r.estimate.n << ',' << p.eps << ','
       << p.t << ',' << p.rule << ',' << p.seed << '\n';
  return os.str();
}

PairedEstimate antisymmetry_pair(double z, const BbmParams& params, const VoteRule& rule, std::uint64_t trials,
                                 std::uint64_t seed) {
  require(params.dimension == 1, ErrorKind::DomainError, "antisymmetry pairing is one-dimensional");
  require(trials >= 1, ErrorKind::EmptyEstimate, "pairing needs at least one trial");
  const auto out = parallel_map<std::pair<std::uint8_t, std::uint8_t>>(trials, [&](std::size_t t) {
    const DualSample s = draw_dual(params, rule.arity(), trial_stream(seed, t));
    const std::span<const double> x(&z, 1);
    return std::make_pair(evaluate_dual(s, x, params, rule, false), evaluate_dual(s, x, params, rule, true));
  });
  std::uint64_t a = 0, b = 0;
  std::vector<double> sums(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    a += out[t].first;
    b += out[t].second;
    sums[t] = out[t].first + out[t].second;
  }
  return {bernoulli_estimate(a, trials, seed), bernoulli_estimate(b, trials, seed), mean_estimate(sums, seed)};
}

double brownian_step_bound(double z, double t, double variance_rate, double u_minus, double u_plus) {
  if (t <= 0.0) return z >= 0.0 ? u_plus : u_minus;
  const double up = normal_cdf(z / std::sqrt(variance_rate * t));
  return u_plus * up + u_minus * (1.0 - up);
}

double solve_z_epsilon(double eps, double T_star, double u_minus, double u_plus, double variance_rate) {
  require(u_plus > u_minus && T_star >= 0.0 && variance_rate > 0.0, ErrorKind::DomainError,
          "z_eps needs u+ > u-, T* >= 0, v > 0");
  const double level = 0.5 + eps / (u_plus - u_minus);
  require(level > 0.0 && level < 1.0, ErrorKind::DomainError, "target probability outside (0,1)");
  if (eps == 0.0) return 0.0;
  return std::sqrt(variance_rate * T_star) * normal_quantile(level);
}

double max_displacement_quantile(const BbmParams& params, int arity, int k, std::uint64_t trials,
                                 std::uint64_t seed) {
  require(trials >= 1, ErrorKind::EmptyEstimate, "quantile needs at least one trial");
  if (params.horizon == 0.0) return 0.0;
  const auto d = static_cast<std::size_t>(params.dimension);
  const auto maxima = parallel_map<double>(trials, [&](std::size_t t) {
    const DualSample s = draw_dual(params, arity, trial_stream(seed, t));
    double m = 0.0;
    for (std::size_t v = 0; v < s.tree.size(); ++v) {
      if (s.tree.vertices[v].kind != VertexKind::Leaf) continue;
      double r2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) r2 += s.displacement[v * d + i] * s.displacement[v * d + i];
      m = std::max(m, std::sqrt(r2));
    }
    return m;
  });
  return empirical_quantile(maxima, 1.0 - std::pow(params.eps, k));
}

SlopeReport slope_concavity_check(double z, double eta, const BbmParams& params, const VoteRule& rule,
                                  std::uint64_t trials, std::uint64_t seed) {
  require(params.dimension == 1, ErrorKind::DomainError, "slope check is one-dimensional");
  require(trials >= 1, ErrorKind::EmptyEstimate, "slope check needs at least one trial");
  require(eta >= 0.0, ErrorKind::DomainError, "eta must be >= 0");
  struct Triple {
    std::uint8_t lo = 0, mid = 0, hi = 0;
  };
  const auto out = parallel_map<Triple>(trials, [&](std::size_t t) {
    const DualSample s = draw_dual(params, rule.arity(), trial_stream(seed, t));
    const double xs[3] = {z - eta, z, z + eta};
    return Triple{evaluate_dual(s, std::span<const double>(&xs[0], 1), params, rule),
                  evaluate_dual(s, std::span<const double>(&xs[1], 1), params, rule),
                  evaluate_dual(s, std::span<const double>(&xs[2], 1), params, rule)};
  });
  std::uint64_t a = 0, b = 0, c = 0;
  std::vector<double> second(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    a += out[t].lo;
    b += out[t].mid;
    c += out[t].hi;
    second[t] = static_cast<double>(out[t].hi) - 2.0 * out[t].mid + out[t].lo;
  }
  SlopeReport rep;
  rep.lower = bernoulli_estimate(a, trials, seed);
  rep.centre = bernoulli_estimate(b, trials, seed);
  rep.upper = bernoulli_estimate(c, trials, seed);
  const EstimateWithCI sd = mean_estimate(second, seed);
  rep.second_difference = sd.value;
  rep.pooled_se = sd.std_error;
  rep.pass = rep.second_difference <= 3.0 * rep.pooled_se;
  return rep;
}

GFunction g_of_rule(const VoteRule& rule) {
  switch (rule.kind) {
    case VoteRule::Kind::SexualBirthDeath: return make_g(ModelSpec::sexual(rule.beta));
    case VoteRule::Kind::Majority: return make_g(ModelSpec::majority());
    case VoteRule::Kind::NonlinearVoterAk:
      if (rule.partition && rule.partition->singleton_probability() != 1.0)
        raise(ErrorKind::InvalidSpec, "g of a nonlinear voter rule needs singleton partitions");
      return make_g(ModelSpec::nonlinear_voter(rule.a[1], rule.a[2]));
  }
  raise(ErrorKind::InvalidSpec, "unknown vote rule");
}

BbmParams slice_params(const BbmParams& params, const VoteRule& rule, const SliceOptions& opt) {
  require(params.dimension == 1, ErrorKind::DomainError, "slice estimator is one-dimensional");
  require(params.branch_rate > 0.0 && opt.window_events > 0.0, ErrorKind::DomainError,
          "slice estimator needs a positive branch rate and window");
  const double window = opt.window_events / params.branch_rate;
  if (params.horizon <= window) return params;
  const double s_end = params.horizon - window;
  const GFunction g = g_of_rule(rule);

  RdeProblem pr;
  pr.phi = params.branch_rate * (g.poly - DPoly::linear(0.0, 1.0));
  pr.diffusion = params.variance_rate / 2.0;
  pr.dimension = 1;
  pr.h = opt.grid_h > 0.0 ? opt.grid_h : std::sqrt(params.variance_rate / params.branch_rate) / 8.0;
  const double half = opt.half_width > 0.0 ? opt.half_width : 4.0 + 6.0 * std::sqrt(params.variance_rate * params.horizon);
  // even cell count keeps the grid mirror-symmetric with no cell centred on 0
  const double cells = 2.0 * std::ceil(half / pr.h);
  pr.init = GridField::line(-half, half, 2.0 * half / cells, Boundary::Neumann);
  pr.h = pr.init.h;
  pr.init.fill([&](double x, double) {
    const double p = params.initial_condition(std::span<const double>(&x, 1));
    return p;
  });
  pr.dt = stable_dt(pr);
  auto field = std::make_shared<const GridField>(solve_final(pr, s_end));

  BbmParams out = params;
  out.horizon = window;
  out.initial_condition = [field](std::span<const double> x) {
    return std::clamp(field->interpolate(x[0]), 0.0, 1.0);
  };
  return out;
}

}  // namespace dualvote
