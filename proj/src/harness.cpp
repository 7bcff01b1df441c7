#include "dualvote/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/math/special_functions/binomial.hpp>

#include "dualvote/bbm.hpp"
#include "dualvote/dualtree.hpp"
#include "dualvote/errors.hpp"
#include "dualvote/mcf.hpp"
#include "dualvote/parallel.hpp"
#include "dualvote/pde.hpp"

namespace dualvote {

using nlohmann::json;

namespace {

struct ExperimentName {
  Experiment e;
  std::string_view name;
  std::string_view kebab;
};

constexpr ExperimentName kNames[] = {
    {Experiment::CheckG, "CheckG", "check-g"},
    {Experiment::Iterate, "Iterate", "iterate"},
    {Experiment::BbmInterface, "BbmInterface", "bbm-interface"},
    {Experiment::DualVote, "DualVote", "dual-vote"},
    {Experiment::Forward, "Forward", "forward"},
    {Experiment::DualityCheck, "DualityCheck", "duality-check"},
    {Experiment::Collisions, "Collisions", "collisions"},
    {Experiment::Coupling, "Coupling", "coupling"},
    {Experiment::PdeFront, "PdeFront", "pde-front"},
    {Experiment::PdeCircle, "PdeCircle", "pde-circle"},
    {Experiment::McfCheck, "McfCheck", "mcf-check"},
    {Experiment::PartitionLaw, "PartitionLaw", "partition-law"},
};

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  raise(ErrorKind::ConfigError, "at '" + path + "': " + what);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  return j.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) config_error(path, "expected a non-negative integer");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) config_error(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_error(path, "expected an integer");
  return j.get<int>();
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      config_error(path.empty() ? k : path + "." + k, "unknown key");
  }
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Per-run context: config, parameter lookup with defaults, file output and summary.
class Run {
 public:
  explicit Run(const ExperimentConfig& c) : cfg(c), dir(c.output_dir.empty() ? default_output_dir() : c.output_dir) {
    std::filesystem::create_directories(dir);
  }

  double param(const std::string& key, double dflt) const {
    if (!cfg.params.contains(key)) return dflt;
    return get_number(cfg.params.at(key), "params." + key);
  }
  std::vector<double> param_list(const std::string& key, std::vector<double> dflt) const {
    if (!cfg.params.contains(key)) return dflt;
    const auto& v = cfg.params.at(key);
    if (!v.is_array()) config_error("params." + key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], "params." + key + "[" + std::to_string(i) + "]"));
    return out;
  }
  double tol(const std::string& key, double dflt) const {
    const auto it = cfg.tolerances.find(key);
    return it == cfg.tolerances.end() ? dflt : it->second;
  }
  std::uint64_t trials(std::uint64_t dflt) const { return cfg.trials ? cfg.trials : dflt; }
  std::uint64_t seed() const { return cfg.seed.value_or(0); }

  void write(const std::string& name, const std::string& body) {
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream f(path);
    if (!f) raise(ErrorKind::ConfigError, "cannot write " + path);
    f << body;
    result.files.push_back(path);
  }
  void check(std::string id, std::string what, bool pass, double measured, double bound) {
    result.summary.push_back({std::move(id), std::move(what), pass, measured, bound});
  }

  const ExperimentConfig& cfg;
  std::string dir;
  RunResult result;
};

std::string label(const ModelSpec& m) {
  std::string s(to_string(m.family));
  if (m.family == Family::SexualReproduction) s += "(beta=" + csv_number(m.beta) + ")";
  if (m.family == Family::NonlinearVoter) s += "(a1=" + csv_number(m.a1) + ";a2=" + csv_number(m.a2) + ")";
  return s;
}

DPoly phi_double(const RPoly& p) {
  std::vector<double> c;
  for (const auto& r : p.coeffs()) c.push_back(to_double(r));
  return DPoly(c);
}

void run_check_g(Run& run) {
  std::vector<ModelSpec> specs;
  if (run.cfg.model)
    specs.push_back(*run.cfg.model);
  else
    specs = {ModelSpec::majority(), ModelSpec::sexual(4.5), ModelSpec::lotka_volterra(1.0, 0.32),
             ModelSpec::nonlinear_voter(0.25, 0.3)};
  std::ostringstream cond, fps;
  cond << "spec,condition,pass,witness_p,witness_value\n";
  fps << "spec,location,slope,stability,exact\n";
  for (const auto& spec : specs) {
    const auto g = make_g(spec);
    const auto fp = fixed_points(g);
    for (const auto& f : fp.all)
      fps << '"' << label(spec) << "\"," << csv_number(f.location) << ',' << csv_number(f.slope) << ','
          << (f.stability == Stability::Stable ? "stable" : "unstable") << ','
          << (f.exact ? f.exact->str() : std::string()) << '\n';
    const auto rep = check_conditions(g);
    std::size_t passed = 0;
    for (const auto& e : rep.entries) {
      cond << '"' << label(spec) << "\"," << e.name << ',' << (e.pass ? 1 : 0) << ',' << csv_number(e.witness_p) << ','
           << csv_number(e.witness_value) << '\n';
      passed += e.pass;
    }
    run.check("1", label(spec) + " conditions", rep.all_pass(), static_cast<double>(passed),
              static_cast<double>(rep.entries.size()));
    if (spec.family == Family::NonlinearVoter) {
      double worst = 0.0;
      for (int i = 0; i < 100; ++i) {
        const double p = (i + 0.5) / 100.0;
        double sum = 0.0;
        for (int k = 0; k <= 5; ++k)
          sum += boost::math::binomial_coefficient<double>(5, static_cast<unsigned>(k)) * std::pow(p, k) *
                 std::pow(1.0 - p, 5 - k) * spec.a(k);
        worst = std::max(worst, std::abs(g(p) - sum));
      }
      const double bound = run.tol("binomial_identity", 1e-12);
      run.check("2", "polynomial vs binomial vote sum", worst <= bound, worst, bound);
    }
  }
  run.write("conditions.csv", cond.str());
  run.write("fixed_points.csv", fps.str());
  if (run.cfg.model) return;

  // reference fixed-point sets
  const double b0 = std::sqrt(0.3125) / 2.5;
  const std::vector<std::vector<double>> expected{
      {0.0, 0.5, 1.0}, {0.0, 1.0 / 3.0, 2.0 / 3.0}, {0.0, 0.5, 1.0}, {0.0, 0.5 - b0, 0.5, 0.5 + b0, 1.0}};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto fp = fixed_points(make_g(specs[i]));
    double err = fp.all.size() == expected[i].size() ? 0.0 : INFINITY;
    for (std::size_t k = 0; k < fp.all.size() && std::isfinite(err); ++k)
      err = std::max(err, std::abs(fp.all[k].location - expected[i][k]));
    const double bound = run.tol("fixed_point", 1e-9);
    run.check("1", label(specs[i]) + " fixed points", err <= bound, err, bound);
  }

  // cubic: g'' + 6c(p - u0) has all coefficients exactly zero
  const auto cubic = ModelSpec::custom_cubic(1.0, 0.0, 0.5, 1.0);
  const RPoly residual =
      make_g(cubic).exact.derivative().derivative() + RPoly::linear(Rational(-3), Rational(6));
  bool zero = true;
  for (const auto& c : residual.coeffs()) zero = zero && c == 0;
  run.check("1", "cubic g'' = -6c(p - u0) exact", zero, zero ? 0.0 : 1.0, 0.0);

  // quintic: finite-difference phi'' at the upper interior root
  const auto nlv = ModelSpec::nonlinear_voter(0.25, 0.3);
  const DPoly phi = phi_double(forward_phi(nlv).phi);
  const double a0 = 0.5 + b0, h = 1e-4;
  const double fd = (phi(a0 + h) - 2.0 * phi(a0) + phi(a0 - h)) / (h * h);
  const double closed = -4.0 * b0 * (6.0 * nlv.b1() + nlv.b2());
  const double qb = run.tol("quintic_fd", 1e-6);
  run.check("1", "quintic phi''(alpha0) finite difference", std::abs(fd - closed) <= qb, std::abs(fd - closed), qb);
}

void run_iterate(Run& run) {
  const ModelSpec spec = run.cfg.model.value_or(ModelSpec::majority());
  const auto g = make_g(spec);
  const int k = static_cast<int>(run.param("k", 2));
  const auto eps_list = run.param_list("eps", {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  std::ostringstream os;
  os << "eps,abs_log_eps,up,down\n";
  std::vector<double> x, y;
  bool symmetric = true;
  for (double e : eps_list) {
    const auto st = convergence_steps(g, e, k);
    os << csv_number(e) << ',' << csv_number(std::abs(std::log(e))) << ',' << st.up << ',' << st.down << '\n';
    x.push_back(std::abs(std::log(e)));
    y.push_back(static_cast<double>(st.up));
    symmetric = symmetric && st.up == st.down;
  }
  run.write("convergence.csv", os.str());
  if (x.size() >= 2) {
    const auto fit = least_squares(x, y);
    const double bound = run.tol("r_squared", 0.99);
    run.check("3", "steps linear in |log eps|", fit.r_squared >= bound, fit.r_squared, bound);
  }
  run.check("3", "up/down step counts equal", symmetric, symmetric ? 0.0 : 1.0, 0.0);

  // every vote rule: regular trees reproduce iteration of g, random trees match Monte Carlo
  const std::vector<VoteRule> rules{VoteRule::majority(), VoteRule::sexual(4.5), VoteRule::nonlinear_voter(0.25, 0.3)};
  const std::uint64_t n = run.trials(20000);
  const double rate = run.param("branch_rate", 1.0), horizon = run.param("horizon", 1.0), p = run.param("p", 0.4);
  const double zb = run.tol("z_bound", 4.0);
  const double bound = run.tol("tree_identity", 1e-12);
  std::ostringstream tr, mc;
  tr << "rule,depth,p,tree_dp,iterate_g\n";
  mc << "rule,tree,leaves,dp,monte_carlo,stderr,z\n";
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const auto& rule = rules[r];
    const auto rg = g_of_rule(rule);
    const std::string name(to_string(rule.kind));
    double worst = 0.0;
    for (int depth = 0; depth <= 6; ++depth) {
      const auto tree = regular_tree(depth, rule.arity());
      for (double q : {0.1, 0.3, 0.45, 0.5, 0.55, 0.7, 0.9}) {
        const std::vector<double> probs(tree.leaf_count(), q);
        const double dp = exact_vote_probability(tree, probs, rule);
        const double it = iterate_g(rg, q, static_cast<std::uint64_t>(depth));
        worst = std::max(worst, std::abs(dp - it));
        tr << name << ',' << depth << ',' << csv_number(q) << ',' << csv_number(dp) << ',' << csv_number(it) << '\n';
      }
    }
    run.check("4", name + " regular tree DP equals iterate_g", worst <= bound, worst, bound);

    double worst_z = 0.0;
    for (std::uint64_t t = 0; t < 3; ++t) {
      Stream s = derive_stream(run.seed(), {"iterate-tree", r, t});
      const auto tree = sample_tree(rate, horizon, rule.arity(), s);
      const std::vector<double> probs(tree.leaf_count(), p);
      const double dp = exact_vote_probability(tree, probs, rule);
      const auto votes = parallel_map<std::uint8_t>(n, [&](std::size_t i) {
        const Stream v = derive_stream(run.seed(), {"iterate-vote", r, t, static_cast<std::uint64_t>(i)});
        Stream lr = v.split("leaf");
        std::vector<std::uint8_t> leaves(tree.leaf_count());
        for (auto& l : leaves) l = lr.bernoulli(p) ? 1 : 0;
        return vote(tree, leaves, rule, v.split("vote"));
      });
      std::uint64_t ones = 0;
      for (auto v : votes) ones += v;
      const auto est = bernoulli_estimate(ones, n, run.seed());
      const double z = est.std_error > 0 ? (est.value - dp) / est.std_error : (est.value == dp ? 0.0 : INFINITY);
      worst_z = std::max(worst_z, std::abs(z));
      mc << name << ',' << t << ',' << tree.leaf_count() << ',' << csv_number(dp) << ',' << csv_number(est.value) << ','
         << csv_number(est.std_error) << ',' << csv_number(z) << '\n';
    }
    run.check("4", name + " random tree DP vs Monte Carlo |z|", worst_z <= zb, worst_z, zb);
  }
  run.write("regular_trees.csv", tr.str());
  run.write("random_trees.csv", mc.str());
}

void run_bbm_interface(Run& run) {
  const ModelSpec spec = run.cfg.model.value_or(ModelSpec::sexual(4.5));
  const auto rule = VoteRule::for_model(spec);
  const auto g = g_of_rule(rule);
  const auto fp = fixed_points(g);
  const double eps = run.param("eps", 0.1);
  const auto times = run.param_list("t", {0.25, 1.0});
  const auto zs = run.param_list("z", {-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0});
  const auto pair_z = run.param_list("pair_z", {0.1, 0.5, 1.0});
  const std::uint64_t n = run.trials(20000);
  const double margin = run.tol("plateau", 0.02);
  const double k_se = run.tol("se_multiple", 3.0);
  std::ostringstream pairs;
  pairs << "t,z,p_plus,p_minus,sum,stderr\n";
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    auto params = BbmParams::for_model(spec, eps, t);
    params.initial_condition = step_initial_condition(fp.u_minus, fp.u_plus);
    const auto sliced = slice_params(params, rule);
    auto prof = interface_profile_1d(zs, sliced, rule, n, run.seed() + ti);
    prof.t = t;
    run.write("profile_t" + csv_number(t) + ".csv", to_csv(prof));
    const std::string tt = "t=" + csv_number(t);
    for (const auto& row : prof.rows) {
      if (row.z == 1.0)
        run.check("5", tt + " P(z=1) >= u+ - 0.02", row.estimate.value >= fp.u_plus - margin, row.estimate.value,
                  fp.u_plus - margin);
      if (row.z == -1.0)
        run.check("5", tt + " P(z=-1) <= u- + 0.02", row.estimate.value <= fp.u_minus + margin, row.estimate.value,
                  fp.u_minus + margin);
    }
    int violations = 0;
    for (std::size_t i = 1; i < prof.rows.size(); ++i) {
      const auto& a = prof.rows[i - 1].estimate;
      const auto& b = prof.rows[i].estimate;
      if (b.value < a.value - k_se * std::hypot(a.std_error, b.std_error)) ++violations;
    }
    run.check("5", tt + " monotone profile", violations == 0, violations, 0);
    double worst_gap = -INFINITY;
    for (const auto& row : prof.rows) {
      if (row.z < 0.0) continue;
      const double lb = brownian_step_bound(row.z, t, params.variance_rate, fp.u_minus, fp.u_plus);
      worst_gap = std::max(worst_gap, lb - row.estimate.value - k_se * row.estimate.std_error);
    }
    run.check("5", tt + " Brownian lower bound (z >= 0)", worst_gap <= 0.0, worst_gap, 0.0);
    for (std::size_t zi = 0; zi < pair_z.size(); ++zi) {
      const auto pe = antisymmetry_pair(pair_z[zi], sliced, rule, n, run.seed() + 100 * (ti + 1) + zi);
      const double target = 2.0 * fp.u_zero;
      const double dev = std::abs(pe.sum.value - target);
      pairs << csv_number(t) << ',' << csv_number(pair_z[zi]) << ',' << csv_number(pe.plus.value) << ','
            << csv_number(pe.minus.value) << ',' << csv_number(pe.sum.value) << ',' << csv_number(pe.sum.std_error)
            << '\n';
      run.check("5", tt + " antisymmetry z=" + csv_number(pair_z[zi]), dev <= k_se * pe.sum.std_error, dev,
                k_se * pe.sum.std_error);
    }
  }
  run.write("antisymmetry.csv", pairs.str());
}

ScalingParams scaling_or(const Run& run, const ModelSpec& model, double eps, double eta, int side, int dim = 0) {
  if (run.cfg.scaling) return *run.cfg.scaling;
  return ScalingParams::make(model, eps, eta, side, dim);
}

void run_dual_vote(Run& run) {
  const ModelSpec spec = run.cfg.model.value_or(ModelSpec::sexual(4.5));
  const auto sc = scaling_or(run, spec, 0.5, 0.05, 64);
  const double horizon = run.param("horizon", 0.1);
  const auto fp = fixed_points(make_g(spec));
  const double p = run.param("init_p", fp.u_plus);
  const auto est = dual_vote_estimate(spec, sc, Coord{}, horizon, constant_initial_condition(p), run.trials(4000),
                                      run.seed());
  std::ostringstream os;
  os << "p_hat,stderr,trials,init_p,horizon,seed\n"
     << csv_number(est.value) << ',' << csv_number(est.std_error) << ',' << est.n << ',' << csv_number(p) << ','
     << csv_number(horizon) << ',' << run.seed() << '\n';
  run.write("dual_vote.csv", os.str());
  if (run.cfg.params.contains("expected")) {
    const double expected = run.param("expected", 0.0);
    const double bound = run.tol("se_multiple", 3.0) * est.std_error;
    run.check("dual-vote", "estimate vs expected", std::abs(est.value - expected) <= bound,
              std::abs(est.value - expected), bound);
  } else {
    run.check("dual-vote", "estimate", true, est.value, NAN);
  }
}

void run_forward_experiment(Run& run) {
  const ModelSpec spec = run.cfg.model.value_or(ModelSpec::sexual(4.5));
  const auto sc = scaling_or(run, spec, 0.5, 0.05, 16);
  const double horizon = run.param("horizon", 0.2);
  const double p = run.param("init_p", 0.5);
  const auto samples = run.param_list("sample_times", {horizon});
  Stream rng = derive_stream(run.seed(), {"forward"});
  Stream init_rng = rng.split("init");
  auto cfg = LatticeConfig::product(spec, sc, constant_initial_condition(p), init_rng);
  Stream ev = rng.split("events");
  std::vector<ForwardEvent> log;
  ForwardOptions opt;
  if (run.param("event_log", 0.0) != 0.0) opt.log = &log;
  std::ostringstream dens;
  dens << "t,density\n" << "0," << csv_number(static_cast<double>(cfg.count()) / cfg.sites()) << '\n';
  double t = 0.0;
  for (double s : samples) {
    require(s >= t, ErrorKind::ConfigError, "params.sample_times must be ascending");
    cfg = run_forward(spec, sc, cfg, s - t, ev, opt);
    t = s;
    run.write("snapshot_t" + csv_number(s) + ".txt", to_text(cfg));
    dens << csv_number(s) << ',' << csv_number(static_cast<double>(cfg.count()) / cfg.sites()) << '\n';
  }
  run.write("density.csv", dens.str());
  if (opt.log) run.write("events.csv", to_csv(log));
  run.check("forward", "final density", true, static_cast<double>(cfg.count()) / cfg.sites(), NAN);
}

std::vector<Coord> default_probes(int side, int dim) {
  std::vector<Coord> out{Coord{}};
  Coord a{}, b{}, c{};
  a[0] = static_cast<std::int32_t>(side / 4);
  b[0] = static_cast<std::int32_t>(-side / 2);
  if (dim > 1) {
    a[1] = static_cast<std::int32_t>(-side / 8);
    b[1] = static_cast<std::int32_t>(side / 4);
    c[1] = static_cast<std::int32_t>(side / 2 - 1);
  }
  c[0] = static_cast<std::int32_t>(side / 2 - 1);
  out.insert(out.end(), {a, b, c});
  return out;
}

void run_duality(Run& run) {
  const ModelSpec spec = run.cfg.model.value_or(ModelSpec::sexual(4.5));
  const auto sc = scaling_or(run, spec, 0.5, 0.05, 16);
  const double horizon = run.param("horizon", 0.2);
  const double p = run.param("init_p", 0.5);
  ModelSpec dual_spec = spec;
  if (run.cfg.params.contains("dual_model")) dual_spec = model_from_json(run.cfg.params.at("dual_model"), "params.dual_model");
  const auto probes = default_probes(sc.torus_side, sc.dimension);
  const double zb = run.tol("z_bound", 4.0);
  const auto rep = duality_check(spec, dual_spec, sc, constant_initial_condition(p), probes, horizon,
                                 run.trials(10000), run.seed(), zb);
  if (rep.config_error) {
    run.check("6", "configuration: " + rep.message, false, NAN, NAN);
    return;
  }
  run.write("duality.csv", to_csv(rep));
  run.check("6", "max |z| forward vs dual", rep.pass, rep.max_abs_z, zb);
}

void run_collisions(Run& run) {
  const ModelSpec spec = run.cfg.model.value_or(ModelSpec::sexual(4.5));
  const auto etas = run.param_list("eta", {0.05, 0.02, 0.01});
  const auto rows = collision_stats(spec, run.param("eps", 0.5), etas, run.param("horizon", 0.1), run.trials(2000),
                                    run.seed());
  run.write("collisions.csv", to_csv(rows));
  const double k = run.tol("se_multiple", 3.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1].collision;
    const auto& b = rows[i].collision;
    const double gap = a.value - b.value;
    const double need = k * std::hypot(a.std_error, b.std_error);
    run.check("7", "collision drop eta " + csv_number(rows[i - 1].eta) + " -> " + csv_number(rows[i].eta),
              gap > need, gap, need);
  }
}

void run_coupling(Run& run) {
  const ModelSpec stir_model = ModelSpec::sexual(4.5);
  auto sc = ScalingParams::make(stir_model, 0.5, run.param("eta", 1e-3), 16, 1);
  const auto ks = walk_vs_bm_diagnostic(sc, WalkKind::Stirring, run.param("horizon", 0.01), run.trials(10000),
                                        run.seed(), run.tol("ks_alpha", 0.01));
  const ModelSpec voter = run.cfg.model.value_or(ModelSpec::nonlinear_voter(0.25, 0.3));
  const int vd = static_cast<int>(run.param("voter_dimension", 2));
  const auto vsc = ScalingParams::make(voter, 0.5, run.param("voter_eta", 1e-2), 16, vd);
  const auto var = walk_vs_bm_diagnostic(vsc, WalkKind::Voter, run.param("voter_horizon", 1.0),
                                         run.param("voter_trials", 100000), run.seed() + 1);
  std::ostringstream os;
  os << "walk,trials,sigma2,ks,ks_critical,variance_per_coord,predicted_variance,relative_error,quantile_deviation\n";
  for (const auto* w : {&ks, &var})
    os << (w == &ks ? "stirring" : "voter") << ',' << w->trials << ',' << csv_number(w->sigma2) << ','
       << csv_number(w->ks) << ',' << csv_number(w->ks_critical) << ',' << csv_number(w->variance_per_coord) << ','
       << csv_number(w->predicted_variance) << ',' << csv_number(w->relative_error) << ','
       << csv_number(w->quantile_deviation) << '\n';
  run.write("coupling.csv", os.str());
  if (ks.skipped)
    run.check("7", "KS skipped (horizon 0)", true, 0.0, 0.0);
  else
    run.check("7", "stirring walk KS vs Gaussian", ks.ks < ks.ks_critical, ks.ks, ks.ks_critical);
  const double vb = run.tol("variance_rel", 0.02);
  const double expected = 1.0 / vd;
  const double rel = std::abs(var.variance_per_coord / run.param("voter_horizon", 1.0) - expected) / expected;
  run.check("7", "voter walk variance vs 1/d", rel <= vb, rel, vb);
}

void run_pde_front(Run& run) {
  const auto betas = run.param_list("beta", {4.2, 4.5, 5.0});
  const double eps = run.param("eps", 0.05), D = run.param("diffusion", 0.5), h = run.param("h", 0.01);
  const double L = run.param("half_width", 20.0), horizon = run.param("horizon", 3.0);
  const double zero_tol = run.tol("zero_speed", 0.02);
  std::ostringstream os;
  os << "beta,speed,residual,integral_sign,integral_value\n";
  for (double beta : betas) {
    const auto fp = forward_phi(ModelSpec::sexual(beta));
    RdeProblem pr;
    pr.phi = phi_double(fp.phi);
    pr.eps = eps;
    pr.diffusion = D;
    pr.h = h;
    pr.init = GridField::line(-L, L, h, Boundary::Neumann);
    const double rho2 = fp.roots.back().value, rho1 = fp.roots[1].value;
    pr.init.fill([&](double x, double) { return x < 0 ? rho2 : 0.0; });
    pr.dt = stable_dt(pr);
    const auto tr = wave_speed(pr, horizon, rho1);
    const auto is = integral_sign(fp.phi, fp.roots.back());
    os << csv_number(beta) << ',' << csv_number(tr.speed) << ',' << csv_number(tr.residual) << ',' << is.sign << ','
       << csv_number(is.value) << '\n';
    const std::string b = "beta=" + csv_number(beta);
    const int sc = std::abs(tr.speed) <= zero_tol ? 0 : (tr.speed > 0 ? 1 : -1);
    if (beta == 4.5) run.check("8", b + " |c| <= 0.02", std::abs(tr.speed) <= zero_tol, std::abs(tr.speed), zero_tol);
    if (beta < 4.5) run.check("8", b + " c < 0", tr.speed < 0, tr.speed, 0.0);
    if (beta > 4.5) run.check("8", b + " c > 0", tr.speed > 0, tr.speed, 0.0);
    run.check("8", b + " sign(c) = sign(integral)", sc == is.sign, sc, is.sign);
  }
  run.write("fronts.csv", os.str());
}

void run_pde_circle(Run& run) {
  const ModelSpec spec = ModelSpec::sexual(run.param("beta", 4.5));
  const auto fp = forward_phi(spec);
  const double eps = run.param("eps", 0.02), D = run.param("diffusion", 0.5), R0 = run.param("R0", 1.0);
  const double h = run.param("h", 0.005), L = run.param("domain", 1.9);
  const double u_in = fp.roots.front().value, u_out = fp.roots.back().value, level = fp.roots[1].value;
  RdeProblem pr;
  pr.phi = phi_double(fp.phi);
  pr.eps = eps;
  pr.diffusion = D;
  pr.dimension = 2;
  pr.h = h;
  pr.init = GridField::square(0.0, L, h, Boundary::Neumann);
  pr.dt = stable_dt(pr);
  const auto times = run.param_list("t", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  const auto circle = shrinking_circle(pr, R0, u_in, u_out, level, times);
  RadialProblem rp;
  rp.phi = pr.phi;
  rp.eps = eps;
  rp.diffusion = D;
  rp.h = h / 10.0;
  rp.r_max = L;
  rp.dt = 0.25 * eps * eps / max_abs_slope(pr.phi);
  const auto oracle = radial_front(rp, R0, u_in, u_out, level, times);
  std::ostringstream os;
  os << "t,radius,radial_oracle,sphere_radius\n";
  std::vector<double> r2;
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double R = circle.track.positions[i];
    os << csv_number(times[i]) << ',' << csv_number(R) << ',' << csv_number(oracle[i]) << ','
       << csv_number(sphere_radius(R0, times[i], 2, D)) << '\n';
    r2.push_back(oracle[i] * oracle[i]);
    worst = std::max(worst, std::abs(R - oracle[i]) / oracle[i]);
  }
  run.write("circle.csv", os.str());
  const double oracle_slope = least_squares(times, r2).slope;
  const double slope_rel = std::abs(circle.track.speed - oracle_slope) / std::abs(oracle_slope);
  run.check("9", "R^2 slope vs radial oracle", slope_rel <= run.tol("slope_rel", 0.10), slope_rel,
            run.tol("slope_rel", 0.10));
  run.check("9", "radius vs radial oracle (pointwise)", worst <= run.tol("radius_rel", 0.05), worst,
            run.tol("radius_rel", 0.05));
  // plateaus away from the front
  const double collar = 10.0 * eps * std::abs(std::log(eps));
  const double ptol = run.tol("plateau", 0.02);
  double dev = 0.0;
  for (std::size_t i = 0; i < circle.snapshots.fields.size(); ++i) {
    const auto& f = circle.snapshots.fields[i];
    const double R = circle.track.positions[std::min(i, circle.track.positions.size() - 1)];
    for (std::size_t j = 0; j < f.ny; ++j)
      for (std::size_t k = 0; k < f.nx; ++k) {
        const double r = std::hypot(f.x(k), f.y(j));
        if (r <= R - collar) dev = std::max(dev, std::abs(f.at(k, j) - u_in));
        if (r >= R + collar) dev = std::max(dev, std::abs(f.at(k, j) - u_out));
      }
  }
  run.check("9", "plateaus at distance >= 10 eps |log eps|", dev <= ptol, dev, ptol);
}

void run_mcf(Run& run) {
  const auto n = static_cast<std::size_t>(run.trials(1000));
  const double tol = run.tol("identity", 1e-6);
  std::vector<std::pair<std::string, FlowSpec>> flows{
      {"plane d=2", FlowSpec::half_plane({1.0, 1.0}, 0.3, 1.0)},
      {"plane d=3", FlowSpec::half_plane({0.0, 1.0, 2.0}, -0.2, 1.0)},
      {"sphere d=2", FlowSpec::sphere({0.0, 0.0}, 1.0, 1.0)},
      {"sphere d=3", FlowSpec::sphere({0.1, -0.2, 0.3}, 1.0, 1.0)},
  };
  const double t = run.param("t", 0.1), band = run.param("band", 0.2);
  std::ostringstream all;
  all << "flow,quantity,point,value,residual\n";
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto rep = regularity_check(flows[i].second, n, band, t, run.seed() + i, tol);
    std::istringstream body(to_csv(rep));
    std::string line;
    std::getline(body, line);
    while (std::getline(body, line)) all << '"' << flows[i].first << "\"," << line << '\n';
    run.check("10", flows[i].first + " eikonal", rep.max_eikonal_error <= tol, rep.max_eikonal_error, tol);
    run.check("10", flows[i].first + " velocity identity", rep.max_velocity_error <= tol, rep.max_velocity_error, tol);
  }
  run.write("mcf.csv", all.str());
}

void run_partition_law(Run& run) {
  const double eta = run.param("eta", 1e-2);
  const int L = static_cast<int>(run.param("range", 3));
  const int d = static_cast<int>(run.param("dimension", 3));
  Stream rng = derive_stream(run.seed(), {"partition-law"});
  const auto law = estimate_partition_law(eta, L, d, run.trials(20000), rng);
  std::ostringstream os;
  os << "partition,probability\n";
  const auto& parts = PartitionLaw::all_partitions();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    os << '"';
    for (auto c : parts[i]) os << static_cast<int>(c);
    os << "\"," << csv_number(law.prob[i]) << '\n';
  }
  run.write("partition_law.csv", os.str());
  run.check("partition", "singleton probability", true, law.singleton_probability(), NAN);
}

}  // namespace

std::string_view to_string(Experiment e) noexcept {
  for (const auto& n : kNames)
    if (n.e == e) return n.name;
  return "Unknown";
}

Experiment experiment_from_string(std::string_view name) {
  for (const auto& n : kNames)
    if (n.name == name || n.kebab == name) return n.e;
  raise(ErrorKind::ConfigError, "at 'experiment': unknown experiment '" + std::string(name) + "'");
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> v = [] {
    std::vector<Experiment> out;
    for (const auto& n : kNames) out.push_back(n.e);
    return out;
  }();
  return v;
}

bool is_stochastic(Experiment e) noexcept {
  switch (e) {
    case Experiment::CheckG:
    case Experiment::PdeFront:
    case Experiment::PdeCircle:
      return false;
    default:
      return true;
  }
}

json to_json(const ModelSpec& m) {
  json j;
  j["family"] = std::string(to_string(m.family));
  switch (m.family) {
    case Family::SexualReproduction: j["beta"] = m.beta; break;
    case Family::LotkaVolterraBoundary:
      j["theta"] = m.theta;
      j["p2"] = m.p2;
      j["p3"] = m.p3;
      break;
    case Family::NonlinearVoter:
      j["a1"] = m.a1;
      j["a2"] = m.a2;
      break;
    case Family::CustomCubic:
      j["c"] = m.c;
      j["u_minus"] = m.u_minus;
      j["u_zero"] = m.u_zero;
      j["u_plus"] = m.u_plus;
      break;
    case Family::Majority: break;
  }
  return j;
}

ModelSpec model_from_json(const json& j, const std::string& path) {
  check_keys(j, path, {"family", "beta", "theta", "p2", "p3", "a1", "a2", "c", "u_minus", "u_zero", "u_plus"});
  if (!j.contains("family") || !j.at("family").is_string()) config_error(path + ".family", "expected a family name");
  ModelSpec m;
  try {
    m.family = family_from_string(j.at("family").get<std::string>());
  } catch (const Error& e) {
    config_error(path + ".family", e.what());
  }
  auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = get_number(j.at(key), path + "." + key);
  };
  num("beta", m.beta);
  num("theta", m.theta);
  num("p2", m.p2);
  num("p3", m.p3);
  num("a1", m.a1);
  num("a2", m.a2);
  num("c", m.c);
  num("u_minus", m.u_minus);
  num("u_zero", m.u_zero);
  num("u_plus", m.u_plus);
  try {
    validate(m);
  } catch (const Error& e) {
    config_error(path, e.what());
  }
  return m;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "", {"experiment", "model", "scaling", "trials", "seed", "output_dir", "tolerances", "params"});
  ExperimentConfig c;
  if (!j.contains("experiment") || !j.at("experiment").is_string()) config_error("experiment", "expected a name");
  c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  if (j.contains("model")) c.model = model_from_json(j.at("model"), "model");
  if (j.contains("scaling")) {
    const auto& s = j.at("scaling");
    check_keys(s, "scaling", {"eps", "eta", "delta", "stir_rate", "event_rate", "torus_side", "dimension", "range"});
    if (!s.contains("eps") || !s.contains("eta")) config_error("scaling", "eps and eta are required");
    if (!s.contains("torus_side")) config_error("scaling.torus_side", "required");
    const ModelSpec m = c.model.value_or(ModelSpec::sexual(4.5));
    ScalingParams sc = ScalingParams::make(m, get_number(s.at("eps"), "scaling.eps"), get_number(s.at("eta"), "scaling.eta"),
                                           get_int(s.at("torus_side"), "scaling.torus_side"),
                                           s.contains("dimension") ? get_int(s.at("dimension"), "scaling.dimension") : 0);
    if (s.contains("delta")) sc.delta = get_number(s.at("delta"), "scaling.delta");
    if (s.contains("stir_rate")) sc.stir_rate = get_number(s.at("stir_rate"), "scaling.stir_rate");
    if (s.contains("event_rate")) sc.event_rate = get_number(s.at("event_rate"), "scaling.event_rate");
    if (s.contains("range")) sc.range = get_int(s.at("range"), "scaling.range");
    try {
      validate(sc);
    } catch (const Error& e) {
      config_error("scaling", e.what());
    }
    c.scaling = sc;
  }
  if (j.contains("trials")) c.trials = get_count(j.at("trials"), "trials");
  if (j.contains("seed")) c.seed = get_count(j.at("seed"), "seed");
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) config_error("output_dir", "expected a path");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (!t.is_object()) config_error("tolerances", "expected an object");
    for (const auto& [k, v] : t.items()) c.tolerances[k] = get_number(v, "tolerances." + k);
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) config_error("params", "expected an object");
    c.params = j.at("params");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) raise(ErrorKind::ConfigError, "cannot open config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::ConfigError, "config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = std::string(to_string(c.experiment));
  if (c.model) j["model"] = to_json(*c.model);
  if (c.scaling) {
    const auto& s = *c.scaling;
    j["scaling"] = {{"eps", s.eps},         {"eta", s.eta},   {"delta", s.delta},
                    {"stir_rate", s.stir_rate}, {"event_rate", s.event_rate}, {"torus_side", s.torus_side},
                    {"dimension", s.dimension}, {"range", s.range}};
  }
  j["trials"] = c.trials;
  if (c.seed) j["seed"] = *c.seed;
  j["output_dir"] = c.output_dir.empty() ? default_output_dir() : c.output_dir;
  j["tolerances"] = c.tolerances;
  j["params"] = c.params;
  return j;
}

bool RunResult::pass() const {
  return std::all_of(summary.begin(), summary.end(), [](const SummaryLine& l) { return l.pass; });
}

std::string format_summary(const std::vector<SummaryLine>& lines) {
  std::ostringstream os;
  os << "id,check,status,measured,bound\n";
  for (const auto& l : lines)
    os << l.id << ",\"" << l.check << "\"," << (l.pass ? "PASS" : "FAIL") << ',' << csv_number(l.measured) << ','
       << csv_number(l.bound) << '\n';
  return os.str();
}

std::string default_output_dir() {
  const char* env = std::getenv("DUALVOTE_OUT");
  return env && *env ? std::string(env) : std::string("dualvote-out");
}

RunResult run_experiment(const ExperimentConfig& config) {
  if (is_stochastic(config.experiment) && !config.seed)
    raise(ErrorKind::ConfigError, "at 'seed': experiment " + std::string(to_string(config.experiment)) +
                                      " is stochastic and needs an explicit seed");
  Run run(config);
  run.write("config.json", to_json(config).dump(2) + "\n");
  const auto started = std::chrono::system_clock::now();
  try {
    switch (config.experiment) {
      case Experiment::CheckG: run_check_g(run); break;
      case Experiment::Iterate: run_iterate(run); break;
      case Experiment::BbmInterface: run_bbm_interface(run); break;
      case Experiment::DualVote: run_dual_vote(run); break;
      case Experiment::Forward: run_forward_experiment(run); break;
      case Experiment::DualityCheck: run_duality(run); break;
      case Experiment::Collisions: run_collisions(run); break;
      case Experiment::Coupling: run_coupling(run); break;
      case Experiment::PdeFront: run_pde_front(run); break;
      case Experiment::PdeCircle: run_pde_circle(run); break;
      case Experiment::McfCheck: run_mcf(run); break;
      case Experiment::PartitionLaw: run_partition_law(run); break;
    }
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(to_string(config.experiment)) + ": " + e.what());
  }
  const auto finished = std::chrono::system_clock::now();
  json meta;
  meta["started_unix"] = std::chrono::duration_cast<std::chrono::seconds>(started.time_since_epoch()).count();
  meta["wall_seconds"] = std::chrono::duration<double>(finished - started).count();
  run.write("metadata.json", meta.dump(2) + "\n");
  run.write("summary.csv", format_summary(run.result.summary));
  return run.result;
}

}  // namespace dualvote
