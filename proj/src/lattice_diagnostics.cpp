#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dualvote/errors.hpp"
#include "dualvote/lattice.hpp"
#include "dualvote/parallel.hpp"
#include "lattice_internal.hpp"

namespace dualvote {

EstimateWithCI pair_crowded_time(const ScalingParams& scaling, double horizon, std::uint64_t trials,
                                 std::uint64_t seed) {
  require(trials > 0, ErrorKind::EmptyEstimate, "crowded time needs trials > 0");
  require(horizon >= 0.0, ErrorKind::DomainError, "horizon must be >= 0");
  const int d = scaling.dimension;
  const double rate = 2.0 * d * scaling.stir_rate;  // per walker
  const auto times = parallel_map<double>(trials, [&](std::size_t i) {
    Stream s = derive_stream(seed, {"crowded", static_cast<std::uint64_t>(i)});
    std::array<Coord, 2> w{};
    w[1][0] = 1;
    auto near = [&] {
      int l1 = 0;
      for (std::size_t k = 0; k < 3; ++k) l1 += std::abs(w[0][k] - w[1][k]);
      return l1 <= 1;
    };
    double t = 0.0, crowded = 0.0;
    if (rate <= 0.0) return near() ? horizon : 0.0;
    for (;;) {
      const double dt = s.exponential(2.0 * rate);
      const double next = std::min(t + dt, horizon);
      if (near()) crowded += next - t;
      t = next;
      if (t >= horizon) break;
      const auto k = s.below(2);
      const Coord to = detail::step(w[k], static_cast<int>(s.below(static_cast<std::uint64_t>(2 * d))));
      if (to == w[1 - k]) {
        // shared edge: the exchange fires at the edge rate, half of the two clocks
        if (s.uniform() < 0.5) std::swap(w[0], w[1]);
      } else {
        w[k] = to;
      }
    }
    return crowded;
  });
  return mean_estimate(times, seed);
}

std::vector<CollisionRow> collision_stats(const ModelSpec& model, double eps, std::span<const double> etas,
                                          double horizon, std::uint64_t trials, std::uint64_t seed, int torus_side) {
  require(trials > 0, ErrorKind::EmptyEstimate, "collision stats need trials > 0");
  std::vector<CollisionRow> rows;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    const double eta = etas[e];
    int side = torus_side;
    if (side <= 0) {
      // room for 8 standard deviations of a unit-variance walk each way
      side = 2 * static_cast<int>(std::ceil((8.0 * std::sqrt(horizon) + 0.5) / eta));
    }
    const ScalingParams sc = ScalingParams::make(model, eps, eta, side);
    validate_lattice_model(model, sc);
    DualOptions opt;
    opt.mode = DualMode::ExactOnly;
    opt.stop_at_first_collision = true;
    struct Trial {
      std::uint8_t hit = 0;
      double particles = 0.0;
      bool wrapped = false;
    };
    const auto res = parallel_map<Trial>(trials, [&](std::size_t i) {
      Stream s = derive_stream(seed, {"collision", static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(i)});
      const auto dual = run_dual(model, sc, Coord{}, horizon, s, opt);
      Trial r;
      r.hit = dual.first_collision_time <= horizon ? 1 : 0;
      for (const auto& p : dual.particles) r.particles += p.in_exact ? 1.0 : 0.0;
      r.wrapped = dual.wrapped;
      return r;
    });
    CollisionRow row;
    row.eta = eta;
    std::uint64_t hits = 0;
    for (const auto& r : res) {
      hits += r.hit;
      row.mean_particles += r.particles;
      row.wrapped = row.wrapped || r.wrapped;
    }
    row.mean_particles /= static_cast<double>(trials);
    row.collision = bernoulli_estimate(hits, trials, seed);
    row.crowded = pair_crowded_time(sc, horizon, trials, seed ^ mix64(e + 1));
    row.crowded_scale = eta * eta * std::log(1.0 / (eta * eta));
    rows.push_back(row);
  }
  return rows;
}

std::string to_csv(const std::vector<CollisionRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "eta,p_collision,stderr,trials,crowded_time,crowded_stderr,crowded_scale,mean_particles,wrapped\n";
  for (const auto& r : rows)
    os << r.eta << ',' << r.collision.value << ',' << r.collision.std_error << ',' << r.collision.n << ','
       << r.crowded.value << ',' << r.crowded.std_error << ',' << r.crowded_scale << ',' << r.mean_particles << ','
       << (r.wrapped ? 1 : 0) << '\n';
  return os.str();
}

WalkDiagnostic walk_vs_bm_diagnostic(const ScalingParams& scaling, WalkKind kind, double horizon,
                                     std::uint64_t trials, std::uint64_t seed, double alpha) {
  validate(scaling);
  require(trials > 1, ErrorKind::EmptyEstimate, "walk diagnostic needs at least 2 trials");
  require(horizon >= 0.0, ErrorKind::DomainError, "horizon must be >= 0");
  WalkDiagnostic out;
  out.trials = trials;
  const int d = scaling.dimension;
  const double rate = kind == WalkKind::Stirring ? 2.0 * d * scaling.stir_rate : scaling.voter_rate();
  out.sigma2 = rate * scaling.eta * scaling.eta / d;
  out.predicted_variance = out.sigma2 * horizon;
  if (horizon == 0.0 || rate == 0.0) {
    out.skipped = true;
    return out;
  }
  const auto ud = static_cast<std::size_t>(d);
  const auto ends = parallel_map<std::array<double, 3>>(trials, [&](std::size_t i) {
    Stream s = derive_stream(seed, {"walk", static_cast<std::uint64_t>(i)});
    std::poisson_distribution<long long> jumps(rate * horizon);
    long long left = jumps(s);
    std::array<double, 3> x{};
    for (std::size_t k = 0; k < ud; ++k) {
      long long nk = left;
      if (k + 1 < ud) {
        std::binomial_distribution<long long> share(left, 1.0 / static_cast<double>(ud - k));
        nk = share(s);
      }
      left -= nk;
      std::binomial_distribution<long long> plus(nk, 0.5);
      x[k] = scaling.eta * static_cast<double>(2 * plus(s) - nk);
    }
    return x;
  });
  std::vector<double> first(trials);
  double ss = 0.0;
  for (std::size_t k = 0; k < ud; ++k) {
    double m = 0.0;
    for (const auto& e : ends) m += e[k];
    m /= static_cast<double>(trials);
    for (const auto& e : ends) ss += (e[k] - m) * (e[k] - m);
  }
  out.variance_per_coord = ss / (static_cast<double>(trials - 1) * static_cast<double>(d));
  out.relative_error = std::abs(out.variance_per_coord - out.predicted_variance) / out.predicted_variance;
  for (std::size_t i = 0; i < trials; ++i) first[i] = ends[i][0];
  const double sd = std::sqrt(out.predicted_variance);
  out.ks = ks_statistic(first, [&](double v) { return normal_cdf(v / sd); });
  out.ks_critical = ks_critical_value(trials, alpha);
  std::sort(first.begin(), first.end());
  std::vector<double> dev(trials);
  for (std::size_t i = 0; i < trials; ++i)
    dev[i] = std::abs(first[i] - sd * normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(trials)));
  out.quantile_deviation = empirical_quantile(dev, 0.99);
  return out;
}

DualityReport duality_check(const ModelSpec& forward_model, const ModelSpec& dual_model, const ScalingParams& scaling,
                            const InitialCondition& init, std::span<const Coord> probes, double horizon,
                            std::uint64_t trials, std::uint64_t seed, double z_bound) {
  DualityReport rep;
  if (!(forward_model == dual_model)) {
    rep.config_error = true;
    rep.message = "forward and dual model specs differ";
    return rep;
  }
  require(trials > 0, ErrorKind::EmptyEstimate, "duality check needs trials > 0");
  require(!probes.empty(), ErrorKind::ConfigError, "duality check needs at least one probe site");
  validate_lattice_model(forward_model, scaling);
  const ModelSpec& model = forward_model;

  const auto fwd = parallel_map<std::vector<std::uint8_t>>(trials, [&](std::size_t i) {
    const Stream s = derive_stream(seed, {"duality-forward", static_cast<std::uint64_t>(i)});
    Stream init_rng = s.split("init");
    Stream ev = s.split("events");
    auto cfg = run_forward(model, scaling, LatticeConfig::product(model, scaling, init, init_rng), horizon, ev);
    std::vector<std::uint8_t> v(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) v[p] = cfg.at(probes[p]);
    return v;
  });

  DualOptions opt;
  opt.mode = DualMode::ExactOnly;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto votes = parallel_map<std::uint8_t>(trials, [&](std::size_t i) {
      const Stream s = derive_stream(seed, {"duality-dual", static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(i)});
      Stream walk = s.split("walk");
      const auto dual = run_dual(model, scaling, probes[p], horizon, walk, opt);
      return evaluate_dual(dual, DualProcess::Exact, init, s.split("leaf"));
    });
    std::uint64_t f1 = 0, d1 = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      f1 += fwd[i][p];
      d1 += votes[i];
    }
    DualityRow row;
    row.probe = probes[p];
    row.forward = bernoulli_estimate(f1, trials, seed);
    row.dual = bernoulli_estimate(d1, trials, seed);
    row.z = z_score(row.forward, row.dual);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
    rep.rows.push_back(row);
  }
  rep.pass = rep.max_abs_z <= z_bound;
  return rep;
}

std::string to_csv(const DualityReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "probe,forward,forward_stderr,dual,dual_stderr,z,trials\n";
  for (const auto& r : report.rows) {
    os << '"' << r.probe[0] << ';' << r.probe[1] << ';' << r.probe[2] << "\"," << r.forward.value << ','
       << r.forward.std_error << ',' << r.dual.value << ',' << r.dual.std_error << ',' << r.z << ',' << r.forward.n
       << '\n';
  }
  return os.str();
}

}  // namespace dualvote
