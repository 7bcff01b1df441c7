#include <algorithm>
#include <cmath>

#include "dualvote/errors.hpp"
#include "dualvote/lattice.hpp"
#include "dualvote/parallel.hpp"
#include "lattice_internal.hpp"

namespace dualvote {

namespace {

using detail::Occupancy;
using detail::site_index;

constexpr std::uint32_t kNone = Occupancy::kEmpty;

class DualRun {
 public:
  DualRun(const ModelSpec& model, const ScalingParams& scaling, const Coord& start, double horizon, Stream& rng,
          const DualOptions& opt)
      : model_(model),
        sc_(scaling),
        opt_(opt),
        rng_(rng),
        d_(scaling.dimension),
        side_(scaling.torus_side),
        sexual_(model.family == Family::SexualReproduction),
        occ_(scaling.sites()) {
    out_.model = model;
    out_.scaling = scaling;
    out_.start = start;
    out_.horizon = horizon;
    move_rate_ = sexual_ ? 2.0 * d_ * sc_.stir_rate : sc_.voter_rate();
    branch_rate_ = site_event_rate(model, scaling);
    birth_p_ = model.beta / (1.0 + model.beta);
    window_ = std::sqrt(scaling.eta);
    const bool x = opt.mode != DualMode::ComparisonOnly;
    const bool h = opt.mode != DualMode::ExactOnly;
    spawn(-1, 0.0, start, x, h, false);
  }

  DualRealization run() {
    const double per = move_rate_ + branch_rate_;
    double t = 0.0;
    while (per > 0.0 && !stopped_) {
      const auto n = alive_.size();
      t += rng_.exponential(per * static_cast<double>(n));
      if (t > out_.horizon) break;
      if (++out_.events > opt_.event_budget) raise(ErrorKind::RateOverflow, "dual event budget exceeded");
      const std::uint32_t id = alive_[rng_.below(n)];
      if (rng_.uniform() * per < move_rate_)
        sexual_ ? stir(id, t) : voter_move(id, t);
      else
        sexual_ ? sexual_branch(id, t) : voter_branch(id, t);
    }
    for (const auto id : alive_) {
      auto& p = out_.particles[id];
      if (p.in_exact) out_.exact_leaves.push_back(id);
      if (p.in_comparison) out_.comparison_leaves.push_back(id);
    }
    return std::move(out_);
  }

 private:
  std::size_t site(const Coord& c) const { return site_index(c, side_, d_); }

  std::uint32_t spawn(std::int64_t parent, double t, const Coord& pos, bool in_x, bool in_hat, bool offspring) {
    if (out_.particles.size() >= opt_.particle_cap)
      raise(ErrorKind::ExplosionGuard, "dual exceeded " + std::to_string(opt_.particle_cap) + " particles");
    const auto id = static_cast<std::uint32_t>(out_.particles.size());
    DualParticle p;
    p.parent = parent;
    p.birth_time = t;
    p.offspring = offspring;
    p.site = pos;
    p.in_exact = in_x;
    p.in_comparison = in_hat;
    if (opt_.record_paths) p.path.push_back({t, pos});
    out_.particles.push_back(std::move(p));
    slot_.push_back(static_cast<std::uint32_t>(alive_.size()));
    alive_.push_back(id);
    if (in_x) occ_.set(site(pos), id);
    return id;
  }

  void retire_if_gone(std::uint32_t id) {
    const auto& p = out_.particles[id];
    if (p.in_exact || p.in_comparison) return;
    const std::uint32_t s = slot_[id];
    const std::uint32_t last = alive_.back();
    alive_[s] = last;
    slot_[last] = s;
    alive_.pop_back();
  }

  void place(std::uint32_t id, const Coord& pos, double t) {
    auto& p = out_.particles[id];
    p.site = pos;
    if (opt_.record_paths) p.path.push_back({t, pos});
    for (int i = 0; i < d_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      out_.max_excursion = std::max(out_.max_excursion, std::abs(pos[k] - out_.start[k]));
    }
    if (2 * out_.max_excursion >= side_) out_.wrapped = true;
  }

  void diverge(double t) { out_.divergence_time = std::min(out_.divergence_time, t); }

  void collide(double t, std::uint32_t parent, const Coord& at, std::uint32_t occupant) {
    out_.collisions.push_back({t, parent, at, occupant});
    out_.first_collision_time = std::min(out_.first_collision_time, t);
    if (opt_.stop_at_first_collision) stopped_ = true;
  }

  // Stirring: an edge fires at stir_rate; with an exact particle across the edge both
  // clocks point at it, so each fires the swap with probability 1/2.
  void stir(std::uint32_t id, double t) {
    auto& p = out_.particles[id];
    const Coord from = p.site;
    const Coord to = detail::step(from, static_cast<int>(rng_.below(static_cast<std::uint64_t>(2 * d_))));
    if (!p.in_exact) {
      place(id, to, t);
      return;
    }
    const std::uint32_t q = occ_.get(site(to));
    if (q == kNone) {
      occ_.erase(site(from));
      occ_.set(site(to), id);
      place(id, to, t);
    } else if (rng_.uniform() < 0.5) {
      occ_.set(site(to), id);
      occ_.set(site(from), q);
      const Coord qfrom = out_.particles[q].site;
      place(id, to, t);
      // q may sit on a different unwrapped copy of the same torus site
      Coord qto = qfrom;
      for (int i = 0; i < d_; ++i) {
        const auto k = static_cast<std::size_t>(i);
        qto[k] += from[k] - to[k];
      }
      place(q, qto, t);
    }
  }

  void voter_move(std::uint32_t id, double t) {
    auto& p = out_.particles[id];
    const Coord from = p.site;
    const Coord to = detail::step(from, static_cast<int>(rng_.below(static_cast<std::uint64_t>(2 * d_))));
    const bool was_x = p.in_exact, was_h = p.in_comparison;
    std::uint32_t xq = kNone, hq = kNone;
    if (was_x) xq = occ_.get(site(to));
    if (was_h && t < window_end_ && in_family(id)) {
      for (std::size_t k = 0; k < family_n_; ++k) {
        const auto f = family_[k];
        if (f != id && out_.particles[f].in_comparison && site(out_.particles[f].site) == site(to)) {
          hq = f;
          break;
        }
      }
    }
    place(id, to, t);
    if (was_x) {
      occ_.erase(site(from));
      if (xq != kNone) {
        p.in_exact = false;
        out_.exact_ops.push_back(merge_op(t, id, xq));
      } else {
        occ_.set(site(to), id);
      }
    }
    if (hq != kNone) {
      p.in_comparison = false;
      out_.comparison_ops.push_back(merge_op(t, id, hq));
    }
    if (xq != kNone || hq != kNone) out_.coalescences.push_back({t, id, xq != kNone ? xq : hq, xq != kNone, hq != kNone});
    if (was_x && was_h && xq != hq) diverge(t);
    retire_if_gone(id);
  }

  static DualOp merge_op(double t, std::uint32_t from, std::uint32_t into) {
    DualOp op;
    op.time = t;
    op.kind = DualOp::Kind::Merge;
    op.particle = from;
    op.n_children = 1;
    op.children[0] = into;
    return op;
  }

  bool in_family(std::uint32_t id) const {
    return std::find(family_.begin(), family_.begin() + static_cast<long>(family_n_), id) !=
           family_.begin() + static_cast<long>(family_n_);
  }

  void sexual_branch(std::uint32_t id, double t) {
    const double u = rng_.uniform();
    const auto pair = detail::diagonal_pair(static_cast<int>(rng_.below(4)));
    const bool birth = u < birth_p_;
    const Coord at = out_.particles[id].site;
    const bool in_x = out_.particles[id].in_exact, in_h = out_.particles[id].in_comparison;
    DualOp xop, hop;
    xop.time = hop.time = t;
    xop.particle = hop.particle = id;
    xop.n_children = hop.n_children = 2;
    xop.u = hop.u = u;
    xop.birth = hop.birth = birth;
    for (std::size_t j = 0; j < 2; ++j) {
      const Coord y = detail::step(at, pair[j]);
      bool fresh = false;
      if (in_x) {
        const std::uint32_t q = occ_.get(site(y));
        if (q != kNone) {
          collide(t, id, y, q);
          if (in_h) diverge(t);
          xop.children[j] = q;
        } else {
          xop.children[j] = spawn(id, t, y, true, in_h, true);
          fresh = true;
        }
      }
      if (in_h) hop.children[j] = fresh ? xop.children[j] : spawn(id, t, y, false, true, true);
    }
    if (in_x) out_.exact_ops.push_back(xop);
    if (in_h) {
      out_.comparison_ops.push_back(hop);
      out_.comparison_branch_times.push_back(t);
    }
  }

  void voter_branch(std::uint32_t id, double t) {
    const double u = rng_.uniform();
    const Coord at = out_.particles[id].site;
    const bool nlv = model_.family == Family::NonlinearVoter;
    std::array<Coord, 4> ys{};
    std::size_t m = 0;
    if (nlv) {
      for (const auto& o : detail::range_offsets(rng_, sc_.range, d_)) ys[m++] = detail::add(at, o);
    } else {
      for (int j = 0; j < 2; ++j)
        ys[m++] = detail::step(at, static_cast<int>(rng_.below(static_cast<std::uint64_t>(2 * d_))));
    }
    const bool x_branch = out_.particles[id].in_exact;
    const bool in_h = out_.particles[id].in_comparison;
    const bool h_branch = in_h && t >= window_end_;
    if (in_h && !h_branch && x_branch) {
      out_.blocked_branch_times.push_back(t);
      diverge(t);
    }
    if (!x_branch && !h_branch) return;
    DualOp xop, hop;
    xop.time = hop.time = t;
    xop.particle = hop.particle = id;
    xop.n_children = hop.n_children = static_cast<std::uint8_t>(m);
    xop.u = hop.u = u;
    std::array<bool, 4> fresh{};
    for (std::size_t j = 0; j < m; ++j) {
      if (x_branch) {
        const std::uint32_t q = occ_.get(site(ys[j]));
        if (q != kNone) {
          collide(t, id, ys[j], q);
          xop.children[j] = q;
        } else {
          xop.children[j] = spawn(id, t, ys[j], true, h_branch, true);
          fresh[j] = true;
        }
      }
      if (h_branch) {
        std::uint32_t hc = kNone;
        if (x_branch && fresh[j]) hc = xop.children[j];
        for (std::size_t i = 0; i < j && hc == kNone; ++i)
          if (site(ys[i]) == site(ys[j])) hc = hop.children[i];  // family coalescence at birth
        if (hc == kNone) hc = spawn(id, t, ys[j], false, true, true);
        hop.children[j] = hc;
        if (x_branch && hc != xop.children[j]) diverge(t);
      }
    }
    if (x_branch) out_.exact_ops.push_back(xop);
    if (h_branch) {
      out_.comparison_ops.push_back(hop);
      out_.comparison_branch_times.push_back(t);
      window_end_ = t + window_;
      family_n_ = 0;
      family_[family_n_++] = id;
      for (std::size_t j = 0; j < m; ++j)
        if (!in_family(hop.children[j])) family_[family_n_++] = hop.children[j];
    }
  }

  const ModelSpec& model_;
  const ScalingParams& sc_;
  const DualOptions& opt_;
  Stream& rng_;
  int d_;
  int side_;
  bool sexual_;
  Occupancy occ_;
  DualRealization out_;
  std::vector<std::uint32_t> alive_;
  std::vector<std::uint32_t> slot_;
  double move_rate_ = 0.0;
  double branch_rate_ = 0.0;
  double birth_p_ = 0.0;
  double window_ = 0.0;
  double window_end_ = -1.0;
  std::array<std::uint32_t, 5> family_{};
  std::size_t family_n_ = 0;
  bool stopped_ = false;
};

}  // namespace

DualRealization run_dual(const ModelSpec& model, const ScalingParams& scaling, const Coord& start, double horizon,
                         Stream& rng, const DualOptions& options) {
  validate_lattice_model(model, scaling);
  require(horizon >= 0.0, ErrorKind::DomainError, "horizon must be >= 0");
  return DualRun(model, scaling, start, horizon, rng, options).run();
}

std::uint8_t lattice_vertex_rule(const ModelSpec& model, std::span<const std::uint8_t> in, double u) {
  switch (model.family) {
    case Family::SexualReproduction:
      require(in.size() == 3, ErrorKind::ArityMismatch, "sexual reproduction vertex takes 3 inputs");
      if (u < model.beta / (1.0 + model.beta)) return (in[0] == 1 || (in[1] == 1 && in[2] == 1)) ? 1 : 0;
      return 0;
    case Family::NonlinearVoter: {
      require(in.size() == 5, ErrorKind::ArityMismatch, "nonlinear voter vertex takes 5 inputs");
      int k = 0;
      for (auto v : in) k += v;
      return u < model.a(k) ? 1 : 0;
    }
    case Family::LotkaVolterraBoundary:
      require(in.size() == 3, ErrorKind::ArityMismatch, "Lotka-Volterra vertex takes 3 inputs");
      return (in[0] + in[1] + in[2] >= 2) ? 1 : 0;
    default:
      raise(ErrorKind::InvalidSpec, "no lattice vote for this family");
  }
}

std::uint8_t evaluate_dual(const DualRealization& dual, DualProcess which, const InitialCondition& init,
                           const Stream& rng) {
  const bool exact = which == DualProcess::Exact;
  const auto& leaves = exact ? dual.exact_leaves : dual.comparison_leaves;
  const auto& ops = exact ? dual.exact_ops : dual.comparison_ops;
  require(!leaves.empty() || !ops.empty(), ErrorKind::DomainError, "dual realization does not track this process");
  const auto& sc = dual.scaling;
  std::vector<std::uint8_t> state(dual.particles.size(), 0);
  std::vector<double> pos(static_cast<std::size_t>(sc.dimension));
  for (const auto id : leaves) {
    const Coord c = detail::site_coords(site_index(dual.particles[id].site, sc.torus_side, sc.dimension),
                                        sc.torus_side, sc.dimension);
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = sc.eta * c[i];
    Stream s = rng.split(id);
    state[id] = s.bernoulli(init(pos)) ? 1 : 0;
  }
  std::array<std::uint8_t, 5> in{};
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    if (it->kind == DualOp::Kind::Merge) {
      state[it->particle] = state[it->children[0]];
      continue;
    }
    in[0] = state[it->particle];
    for (std::size_t j = 0; j < it->n_children; ++j) in[j + 1] = state[it->children[j]];
    state[it->particle] = lattice_vertex_rule(dual.model, std::span(in.data(), it->n_children + 1u), it->u);
  }
  return state[0];
}

EstimateWithCI dual_vote_estimate(const ModelSpec& model, const ScalingParams& scaling, const Coord& start,
                                  double horizon, const InitialCondition& init, std::uint64_t trials,
                                  std::uint64_t seed, DualProcess which) {
  require(trials > 0, ErrorKind::EmptyEstimate, "dual vote estimate needs trials > 0");
  validate_lattice_model(model, scaling);
  DualOptions opt;
  opt.mode = which == DualProcess::Exact ? DualMode::ExactOnly : DualMode::ComparisonOnly;
  const auto votes = parallel_map<std::uint8_t>(trials, [&](std::size_t i) {
    const Stream trial = derive_stream(seed, {"lattice-dual", static_cast<std::uint64_t>(i)});
    Stream walk = trial.split("walk");
    const auto dual = run_dual(model, scaling, start, horizon, walk, opt);
    return evaluate_dual(dual, which, init, trial.split("leaf"));
  });
  std::uint64_t ones = 0;
  for (auto v : votes) ones += v;
  return bernoulli_estimate(ones, trials, seed);
}

}  // namespace dualvote
