#include <cmath>
#include <sstream>

#include "dualvote/errors.hpp"
#include "dualvote/lattice.hpp"
#include "lattice_internal.hpp"

namespace dualvote {

using detail::site_coords;
using detail::site_index;

double default_event_rate(const ModelSpec& model, double eps) {
  require(eps > 0.0, ErrorKind::InvalidSpec, "eps must be > 0");
  const double base = 1.0 / (eps * eps);
  return model.family == Family::SexualReproduction ? (1.0 + model.beta) * base : base;
}

int default_lattice_dimension(const ModelSpec& model) {
  return model.family == Family::SexualReproduction ? 2 : 3;
}

double site_event_rate(const ModelSpec& model, const ScalingParams& scaling) {
  return model.family == Family::LotkaVolterraBoundary ? model.theta * scaling.event_rate : scaling.event_rate;
}

ScalingParams ScalingParams::make(const ModelSpec& model, double eps, double eta, int torus_side, int dimension) {
  require(eps > 0.0 && eta > 0.0, ErrorKind::InvalidSpec, "eps and eta must be > 0");
  ScalingParams s;
  s.eps = eps;
  s.eta = eta;
  s.delta = eta / eps;
  s.stir_rate = 0.5 / (eta * eta);
  s.event_rate = default_event_rate(model, eps);
  s.torus_side = torus_side;
  s.dimension = dimension > 0 ? dimension : default_lattice_dimension(model);
  return s;
}

std::size_t ScalingParams::sites() const {
  std::size_t n = 1;
  for (int i = 0; i < dimension; ++i) n *= static_cast<std::size_t>(torus_side);
  return n;
}

void validate(const ScalingParams& s) {
  require(s.eps > 0.0 && s.delta > 0.0 && s.eta > 0.0, ErrorKind::InvalidSpec, "delta, eps, eta must be > 0");
  require(std::abs(s.eta - s.delta * s.eps) <= 1e-15, ErrorKind::InvalidSpec, "eta must equal delta * eps");
  require(s.stir_rate >= 0.0 && s.event_rate >= 0.0 && std::isfinite(s.stir_rate) && std::isfinite(s.event_rate),
          ErrorKind::InvalidSpec, "rates must be finite and >= 0");
  require(s.stir_rate + s.event_rate > 0.0, ErrorKind::InvalidSpec, "at least one rate must be positive");
  require(s.torus_side >= 2 && s.torus_side % 2 == 0, ErrorKind::InvalidSpec, "torus side must be even and >= 2");
  require(s.dimension >= 1 && s.dimension <= 3, ErrorKind::InvalidSpec, "lattice dimension must be 1, 2 or 3");
  require(s.range >= 1, ErrorKind::InvalidSpec, "range must be >= 1");
}

void validate_lattice_model(const ModelSpec& model, const ScalingParams& scaling) {
  validate(model);
  validate(scaling);
  switch (model.family) {
    case Family::SexualReproduction:
      require(scaling.dimension >= 2, ErrorKind::InvalidSpec, "diagonal pair neighbourhood needs dimension >= 2");
      break;
    case Family::NonlinearVoter:
      require(scaling.torus_side >= 2 * scaling.range + 1, ErrorKind::InvalidSpec, "torus smaller than the range box");
      require(std::pow(2.0 * scaling.range + 1.0, scaling.dimension) - 1.0 >= 4.0, ErrorKind::InvalidSpec,
              "range box has fewer than 4 sites");
      break;
    case Family::LotkaVolterraBoundary:
      require(model.theta >= 0.0, ErrorKind::InvalidSpec, "lattice Lotka-Volterra needs theta >= 0");
      break;
    default:
      raise(ErrorKind::InvalidSpec, std::string("no lattice model for family ") + std::string(to_string(model.family)));
  }
}

LatticeConfig LatticeConfig::filled(const ModelSpec& model, const ScalingParams& scaling, std::uint8_t value) {
  LatticeConfig c;
  c.dimension = scaling.dimension;
  c.side = scaling.torus_side;
  c.eta = scaling.eta;
  c.model = model;
  c.occupancy.assign(scaling.sites(), value ? 1 : 0);
  return c;
}

LatticeConfig LatticeConfig::product(const ModelSpec& model, const ScalingParams& scaling, const InitialCondition& init,
                                     Stream& rng) {
  LatticeConfig c = filled(model, scaling, 0);
  for (std::size_t i = 0; i < c.sites(); ++i) {
    const auto x = c.position(i);
    c.occupancy[i] = rng.bernoulli(init(x)) ? 1 : 0;
  }
  return c;
}

std::size_t LatticeConfig::count() const noexcept {
  std::size_t n = 0;
  for (auto v : occupancy) n += v;
  return n;
}

std::size_t LatticeConfig::index(const Coord& c) const noexcept { return site_index(c, side, dimension); }

Coord LatticeConfig::coords(std::size_t site) const noexcept { return site_coords(site, side, dimension); }

std::vector<double> LatticeConfig::position(std::size_t site) const {
  const Coord c = coords(site);
  std::vector<double> x(static_cast<std::size_t>(dimension));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = eta * c[i];
  return x;
}

std::string to_text(const LatticeConfig& config) {
  std::ostringstream os;
  for (std::size_t s = 0; s < config.sites(); ++s) {
    const Coord c = config.coords(s);
    for (int i = 0; i < config.dimension; ++i) os << c[static_cast<std::size_t>(i)] << ' ';
    os << static_cast<int>(config.occupancy[s]) << '\n';
  }
  return os.str();
}

LatticeConfig run_forward(const ModelSpec& model, const ScalingParams& scaling, LatticeConfig init, double horizon,
                          Stream& rng, const ForwardOptions& options) {
  validate_lattice_model(model, scaling);
  require(init.model == model, ErrorKind::ConfigError, "initial configuration was built for another model");
  require(init.dimension == scaling.dimension && init.side == scaling.torus_side &&
              init.sites() == scaling.sites(),
          ErrorKind::ConfigError, "initial configuration does not match the torus");
  require(horizon >= 0.0, ErrorKind::DomainError, "horizon must be >= 0");

  const int d = scaling.dimension;
  const int side = scaling.torus_side;
  const std::size_t n = init.sites();
  const auto nd = static_cast<std::size_t>(2 * d);
  std::vector<std::uint32_t> nbr(n * nd);
  for (std::size_t s = 0; s < n; ++s) {
    const Coord c = site_coords(s, side, d);
    for (int k = 0; k < 2 * d; ++k)
      nbr[s * nd + static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(site_index(detail::step(c, k), side, d));
  }

  const bool sexual = model.family == Family::SexualReproduction;
  const double dn = static_cast<double>(n);
  const double move_total = sexual ? scaling.stir_rate * d * dn : scaling.voter_rate() * dn;
  const double event_total = site_event_rate(model, scaling) * dn;
  const double total = move_total + event_total;
  if (total * horizon > options.event_budget)
    raise(ErrorKind::RateOverflow, "expected " + std::to_string(total * horizon) + " events exceeds the budget");

  const double birth_p = model.beta / (1.0 + model.beta);
  std::array<double, 6> a{};
  for (int k = 0; k <= 5; ++k) a[static_cast<std::size_t>(k)] = model.a(k);

  auto& xi = init.occupancy;
  std::size_t ones = init.count();
  auto absorbed = [&] { return sexual ? ones == 0 : (ones == 0 || ones == n); };
  auto log = [&](double t, ForwardEvent::Type type, std::size_t site, std::size_t other, std::uint8_t before) {
    if (options.log) options.log->push_back({t, type, site, other, before, xi[site]});
  };
  auto set = [&](std::size_t site, std::uint8_t v) {
    ones += v;
    ones -= xi[site];
    xi[site] = v;
  };

  const double t0 = init.time;
  double t = 0.0;
  if (options.stop_when_absorbed && absorbed()) return init;
  while (total > 0.0) {
    t += rng.exponential(total);
    if (t > horizon) break;
    if (rng.uniform() * total < move_total) {
      const auto s = static_cast<std::size_t>(rng.below(n));
      if (sexual) {
        const std::size_t o = nbr[s * nd + 2 * rng.below(static_cast<std::uint64_t>(d))];
        const std::uint8_t before = xi[s];
        std::swap(xi[s], xi[o]);
        log(t0 + t, ForwardEvent::Type::Stir, s, o, before);
      } else {
        const std::size_t o = nbr[s * nd + rng.below(nd)];
        const std::uint8_t before = xi[s];
        set(s, xi[o]);
        log(t0 + t, ForwardEvent::Type::Voter, s, o, before);
      }
    } else {
      const auto s = static_cast<std::size_t>(rng.below(n));
      const std::uint8_t before = xi[s];
      switch (model.family) {
        case Family::SexualReproduction: {
          const double u = rng.uniform();
          const auto pair = detail::diagonal_pair(static_cast<int>(rng.below(4)));
          if (u < birth_p) {
            const std::size_t y1 = nbr[s * nd + static_cast<std::size_t>(pair[0])];
            const std::size_t y2 = nbr[s * nd + static_cast<std::size_t>(pair[1])];
            if (xi[s] == 0 && xi[y1] == 1 && xi[y2] == 1) set(s, 1);
            log(t0 + t, ForwardEvent::Type::Birth, s, y1, before);
          } else {
            set(s, 0);
            log(t0 + t, ForwardEvent::Type::Death, s, s, before);
          }
          break;
        }
        case Family::NonlinearVoter: {
          const Coord c = site_coords(s, side, d);
          const auto offs = detail::range_offsets(rng, scaling.range, d);
          int k = xi[s];
          for (const auto& o : offs) k += xi[site_index(detail::add(c, o), side, d)];
          set(s, rng.uniform() < a[static_cast<std::size_t>(k)] ? 1 : 0);
          log(t0 + t, ForwardEvent::Type::Update, s, s, before);
          break;
        }
        default: {
          const std::size_t y1 = nbr[s * nd + rng.below(nd)];
          const std::size_t y2 = nbr[s * nd + rng.below(nd)];
          if (xi[y1] != xi[s] && xi[y2] != xi[s]) set(s, xi[s] ^ 1);
          log(t0 + t, ForwardEvent::Type::Update, s, y1, before);
          break;
        }
      }
    }
    if (options.stop_when_absorbed && absorbed()) {
      init.time = t0 + t;
      return init;
    }
  }
  init.time = t0 + horizon;
  return init;
}

std::string to_csv(const std::vector<ForwardEvent>& log) {
  static constexpr const char* names[] = {"stir", "voter", "birth", "death", "update"};
  std::ostringstream os;
  os.precision(17);
  os << "time,type,site,other,before,after\n";
  for (const auto& e : log)
    os << e.time << ',' << names[static_cast<int>(e.type)] << ',' << e.site << ',' << e.other << ','
       << static_cast<int>(e.before) << ',' << static_cast<int>(e.after) << '\n';
  return os.str();
}

}  // namespace dualvote
