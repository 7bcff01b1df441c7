#include "dualvote/gfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualvote/errors.hpp"

namespace dualvote {

namespace {

RPoly rp(std::vector<Rational> c) { return RPoly(std::move(c)); }

const RPoly& ident() {
  static const RPoly p = rp({0, 1});
  return p;
}

RPoly one_minus_p() { return rp({1, -1}); }

RPoly power(const RPoly& base, int k) {
  RPoly out = RPoly::constant(1);
  for (int i = 0; i < k; ++i) out = out * base;
  return out;
}

RPoly majority_poly() { return rp({0, 0, 3, -2}); }

// (A1)
bool region2(const ModelSpec& s) { return s.b1() > 0.0 && 3.0 * s.b1() + s.b2() < 0.0; }

long double eval_ld(const std::vector<long double>& c, long double x) {
  long double acc = 0.0L;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double eval_or_exact(const RPoly& p, double x, const std::optional<Rational>& exact) {
  return exact ? to_double(p(*exact)) : to_double(p)(x);
}

}  // namespace

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::Majority: return "Majority";
    case Family::SexualReproduction: return "SexualReproduction";
    case Family::LotkaVolterraBoundary: return "LotkaVolterraBoundary";
    case Family::NonlinearVoter: return "NonlinearVoter";
    case Family::CustomCubic: return "CustomCubic";
  }
  return "Unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::Majority, Family::SexualReproduction, Family::LotkaVolterraBoundary,
                   Family::NonlinearVoter, Family::CustomCubic})
    if (to_string(f) == name) return f;
  raise(ErrorKind::InvalidSpec, "unknown model family '" + std::string(name) + "'");
}

ModelSpec ModelSpec::majority() { return ModelSpec{}; }

ModelSpec ModelSpec::sexual(double beta) {
  ModelSpec s;
  s.family = Family::SexualReproduction;
  s.beta = beta;
  return s;
}

ModelSpec ModelSpec::lotka_volterra(double theta, double p3, double p2) {
  ModelSpec s;
  s.family = Family::LotkaVolterraBoundary;
  s.theta = theta;
  s.p3 = p3;
  s.p2 = p2;
  return s;
}

ModelSpec ModelSpec::nonlinear_voter(double a1, double a2) {
  ModelSpec s;
  s.family = Family::NonlinearVoter;
  s.a1 = a1;
  s.a2 = a2;
  return s;
}

ModelSpec ModelSpec::custom_cubic(double c, double u_minus, double u_zero, double u_plus) {
  ModelSpec s;
  s.family = Family::CustomCubic;
  s.c = c;
  s.u_minus = u_minus;
  s.u_zero = u_zero;
  s.u_plus = u_plus;
  return s;
}

double ModelSpec::a(int k) const {
  switch (k) {
    case 0: return 0.0;
    case 1: return a1;
    case 2: return a2;
    case 3: return 1.0 - a2;
    case 4: return 1.0 - a1;
    case 5: return 1.0;
    default: raise(ErrorKind::DomainError, "vote weight index outside 0..5");
  }
}

void validate(const ModelSpec& s, bool enforce_region2) {
  auto is_prob = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
  switch (s.family) {
    case Family::Majority: break;
    case Family::SexualReproduction:
      require(std::isfinite(s.beta) && s.beta >= 0.0, ErrorKind::InvalidSpec, "beta must be >= 0");
      break;
    case Family::LotkaVolterraBoundary:
      require(std::isfinite(s.theta) && s.theta > 0.0, ErrorKind::InvalidSpec, "theta must be > 0");
      require(is_prob(s.p3) && s.p3 > 0.0, ErrorKind::InvalidSpec, "p3 must lie in (0,1]");
      require(is_prob(s.p2), ErrorKind::InvalidSpec, "p2 must be a probability");
      break;
    case Family::NonlinearVoter:
      require(std::isfinite(s.a1) && std::isfinite(s.a2) && 0.0 <= s.a1 && s.a1 <= s.a2 && s.a2 <= 0.5,
              ErrorKind::InvalidSpec, "nonlinear voter needs 0 <= a1 <= a2 <= 1/2");
      if (enforce_region2 && !region2(s))
        raise(ErrorKind::NotInRegion2, "b1 > 0 and 3 b1 + b2 < 0 fail for a1=" + std::to_string(s.a1) +
                                           ", a2=" + std::to_string(s.a2));
      break;
    case Family::CustomCubic:
      require(std::isfinite(s.c) && s.c > 0.0, ErrorKind::InvalidSpec, "cubic scale c must be > 0");
      require(s.u_minus < s.u_zero && s.u_zero < s.u_plus, ErrorKind::InvalidSpec,
              "cubic roots must satisfy u- < u0 < u+");
      require(std::abs((s.u_plus - s.u_zero) - (s.u_zero - s.u_minus)) <= 1e-12, ErrorKind::InvalidSpec,
              "cubic roots must be equally spaced");
      break;
  }
}

double default_reaction_rate(const ModelSpec& s) {
  switch (s.family) {
    case Family::SexualReproduction: return 1.0 + s.beta;
    case Family::LotkaVolterraBoundary: return s.theta * s.p3;
    default: return 1.0;
  }
}

GFunction make_g(const ModelSpec& spec, bool enforce_region2) {
  validate(spec, enforce_region2);
  GFunction g;
  g.spec = spec;
  const RPoly& p = ident();
  switch (spec.family) {
    case Family::Majority:
    case Family::LotkaVolterraBoundary:
      g.exact = majority_poly();
      break;
    case Family::SexualReproduction: {
      const Rational beta = snap_rational(spec.beta);
      // birth: lineage input OR both offspring inputs
      g.exact = (beta / (1 + beta)) * rp({0, 1, 1, -1});
      break;
    }
    case Family::NonlinearVoter: {
      const Rational b1 = 5 * snap_rational(spec.a1) - 1;
      const Rational b2 = 10 * snap_rational(spec.a2) - 4;
      const RPoly q = one_minus_p();
      const RPoly phi = b1 * (p * power(q, 4)) + b2 * (power(p, 2) * power(q, 3)) -
                        b2 * (power(p, 3) * power(q, 2)) - b1 * (power(p, 4) * q);
      g.exact = p + phi;
      break;
    }
    case Family::CustomCubic: {
      const RPoly cubic = rp({-snap_rational(spec.u_minus), 1}) * rp({-snap_rational(spec.u_zero), 1}) *
                          rp({-snap_rational(spec.u_plus), 1});
      g.exact = p - snap_rational(spec.c) * cubic;
      break;
    }
  }
  g.poly = to_double(g.exact);
  g.d1 = g.poly.derivative();
  g.d2 = g.d1.derivative();
  g.reaction_rate = default_reaction_rate(spec);

  // g must map [0,1] into [0,1]: check endpoints and interior critical points
  std::vector<double> probes{0.0, 1.0};
  const RPoly dg = g.exact.derivative();
  if (!dg.is_zero())
    for (const auto& r : roots_in(dg, 0, 1)) probes.push_back(r.value);
  for (double x : probes) {
    const double v = g.poly(x);
    require(v >= -1e-12 && v <= 1.0 + 1e-12, ErrorKind::InvalidSpec,
            "g leaves [0,1] at p=" + std::to_string(x));
  }
  return g;
}

double eval_g(const GFunction& g, double p) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::DomainError, "g evaluated outside [0,1]");
  return std::clamp(g.poly(p), 0.0, 1.0);
}

FixedPointSet fixed_points(const GFunction& g) {
  const RPoly f = g.exact - ident();
  if (has_multiple_root(f, 0, 1))
    raise(ErrorKind::DegenerateRoots, "g(p) - p has a multiple root in (0,1)");
  FixedPointSet out;
  const RPoly dg = g.exact.derivative();
  for (const auto& r : roots_in(f, 0, 1)) {
    FixedPoint fp;
    fp.location = r.value;
    fp.exact = r.exact;
    fp.slope = eval_or_exact(dg, r.value, r.exact);
    fp.stability = std::abs(fp.slope) < 1.0 ? Stability::Stable : Stability::Unstable;
    out.all.push_back(fp);
  }
  std::size_t mid = 0;
  for (std::size_t i = 1; i + 1 < out.all.size(); ++i) {
    if (out.all[i].stability == Stability::Unstable && out.all[i - 1].stability == Stability::Stable &&
        out.all[i + 1].stability == Stability::Stable) {
      mid = i;
      break;
    }
  }
  if (mid == 0) raise(ErrorKind::NotBistable, "no stable-unstable-stable triple of fixed points");
  out.u_minus = out.all[mid - 1].location;
  out.u_zero = out.all[mid].location;
  out.u_plus = out.all[mid + 1].location;
  out.exact_u_zero = out.all[mid].exact;
  for (std::size_t i = 0; i < out.all.size(); ++i) {
    if (i + 1 == mid || i == mid || i == mid + 1) continue;
    if (out.all[i].location == 0.0 || out.all[i].location == 1.0) out.boundary_fixed.push_back(out.all[i]);
  }
  return out;
}

bool ConditionReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const ConditionEntry& e) { return e.pass; });
}

const ConditionEntry& ConditionReport::at(std::string_view name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  raise(ErrorKind::DomainError, "condition '" + std::string(name) + "' not in report");
}

ConditionReport check_conditions(const GFunction& g, std::size_t grid) {
  require(grid >= 2, ErrorKind::DomainError, "condition grid needs at least 2 points");
  const FixedPointSet fp = fixed_points(g);
  ConditionReport rep;
  rep.grid_resolution = grid;
  const double um = fp.u_minus, u0 = fp.u_zero, up = fp.u_plus;
  const RPoly dg = g.exact.derivative();

  // G0
  {
    const double asym = std::abs((up - u0) - (u0 - um));
    bool ok = asym <= 1e-10;
    for (const auto& b : fp.boundary_fixed) ok = ok && b.stability == Stability::Unstable;
    rep.entries.push_back({"G0", ok, u0, asym});
  }
  // G1
  {
    if (fp.exact_u_zero) {
      const Rational& c = *fp.exact_u_zero;
      const RPoly h = g.exact.compose_affine(c, 1) + g.exact.compose_affine(c, -1) - RPoly::constant(2 * c);
      double worst = 0.0;
      for (const auto& v : h.coeffs()) worst = std::max(worst, std::abs(to_double(v)));
      rep.entries.push_back({"G1", h.is_zero(), u0, worst});
    } else {
      double worst = 0.0, where = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        const double x = (up - u0) * i / 1000.0;
        const double r = std::abs(g.poly(up - x) + g.poly(um + x) - 2.0 * u0);
        if (r > worst) {
          worst = r;
          where = x;
        }
      }
      rep.entries.push_back({"G1", worst <= 1e-12, where, worst});
    }
  }
  // G2
  {
    const auto& lo = *std::find_if(fp.all.begin(), fp.all.end(), [&](const FixedPoint& f) { return f.location == um; });
    const auto& hi = *std::find_if(fp.all.begin(), fp.all.end(), [&](const FixedPoint& f) { return f.location == up; });
    const auto& md = *std::find_if(fp.all.begin(), fp.all.end(), [&](const FixedPoint& f) { return f.location == u0; });
    bool equal_slopes;
    if (lo.exact && hi.exact)
      equal_slopes = dg(*lo.exact) == dg(*hi.exact);
    else
      equal_slopes = std::abs(lo.slope - hi.slope) <= 1e-10;
    const bool ok = md.slope > 1.0 && lo.slope < 1.0 && hi.slope < 1.0 && equal_slopes;
    rep.entries.push_back({"G2", ok, u0, md.slope});
  }
  // G3
  {
    bool ok = true;
    double wp = u0, wv = 0.0;
    double worst_left = std::numeric_limits<double>::infinity();
    double worst_right = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j <= grid; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(grid + 1);
      const double pl = um + (u0 - um) * t;
      const double pr = u0 + (up - u0) * t;
      const double vl = g.d2(pl), vr = g.d2(pr);
      if (vl < worst_left) worst_left = vl;
      if (vr > worst_right) worst_right = vr;
      if (vl <= 0.0 && ok) {
        ok = false;
        wp = pl;
        wv = vl;
      }
      if (vr >= 0.0 && ok) {
        ok = false;
        wp = pr;
        wv = vr;
      }
    }
    if (ok) wv = std::max(-worst_left, worst_right);
    rep.entries.push_back({"G3", ok, wp, wv});
  }
  // G4
  {
    const double slope_minus = g.d1(um);
    rep.c0 = (1.0 - slope_minus) / 2.0;
    const double step = 1e-4;
    std::size_t k = 0;
    while (um + k * step <= u0 && g.d1(um + k * step) < 1.0 - rep.c0) ++k;
    rep.delta0 = k == 0 ? 0.0 : static_cast<double>(k - 1) * step;
    bool ok = rep.delta0 > 0.0 && rep.c0 > 0.0;
    double wp = 0.0, wv = 0.0;
    for (std::size_t j = 1; ok && j <= grid; ++j) {
      const double delta = rep.delta0 * static_cast<double>(j) / static_cast<double>(grid);
      const double bound = (1.0 - rep.c0) * delta + 1e-14;
      const double top = up - g.poly(up - delta);
      const double bottom = g.poly(um + delta) - um;
      const double slack = std::max(top, bottom) - bound;
      if (slack > wv || j == 1) {
        wv = slack;
        wp = delta;
      }
      if (top > bound || bottom > bound) ok = false;
    }
    rep.entries.push_back({"G4", ok, wp, wv});
  }
  // G5
  {
    bool ok = true;
    std::vector<Rational> cuts{Rational(0)};
    if (!dg.is_zero()) {
      if (dg.degree() >= 1)
        for (const auto& r : roots_in(dg, 0, 1)) cuts.push_back(r.exact ? *r.exact : exact_rational(r.value));
    } else {
      ok = false;
    }
    cuts.push_back(Rational(1));
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; ok && i + 1 < cuts.size(); ++i) {
      if (cuts[i] == cuts[i + 1]) continue;
      if (dg((cuts[i] + cuts[i + 1]) / 2) <= 0) ok = false;
    }
    double wmin = std::numeric_limits<double>::infinity(), wp = 0.0;
    for (std::size_t j = 0; j < grid; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(grid - 1);
      const double v = g.d1(x);
      if (v < wmin) {
        wmin = v;
        wp = x;
      }
    }
    rep.entries.push_back({"G5", ok, wp, wmin});
  }
  if (g.spec.family == Family::NonlinearVoter) {
    const double b1 = g.spec.b1(), b2 = g.spec.b2();
    rep.entries.push_back({"A1", b1 > 0.0 && 3.0 * b1 + b2 < 0.0, 0.0, 3.0 * b1 + b2});
    rep.entries.push_back({"A2", 0.0 <= g.spec.a1 && g.spec.a1 <= g.spec.a2 && g.spec.a2 <= 0.5, 0.0, g.spec.a2 - g.spec.a1});
    rep.entries.push_back({"A3", 6.0 * b1 + b2 > 0.0, 0.0, 6.0 * b1 + b2});
  }
  return rep;
}

double iterate_g(const GFunction& g, double p, std::uint64_t n) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::DomainError, "iterate_g start outside [0,1]");
  if (n == 0) return p;
  // exact fixed points stay put; rounding would otherwise push off unstable ones
  const Rational ep = snap_rational(p);
  if (g.exact(ep) == ep) return p;
  double x = p;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double next = std::clamp(g.poly(x), 0.0, 1.0);
    if (next == x) break;
    x = next;
  }
  return x;
}

ConvergenceSteps convergence_steps(const GFunction& g, double eps, int k) {
  const FixedPointSet fp = fixed_points(g);
  require(eps > 0.0 && eps < fp.u_plus - fp.u_zero, ErrorKind::DomainError,
          "eps must lie in (0, u+ - u0)");
  require(k >= 0, ErrorKind::DomainError, "k must be nonnegative");
  std::vector<long double> c;
  for (const auto& v : g.exact.coeffs()) c.push_back(v.convert_to<long double>());
  auto ld = [](const FixedPoint& f) {
    return f.exact ? f.exact->convert_to<long double>() : static_cast<long double>(f.location);
  };
  long double um = fp.u_minus, u0 = fp.u_zero, up = fp.u_plus;
  for (const auto& f : fp.all) {
    if (f.location == fp.u_minus) um = ld(f);
    if (f.location == fp.u_zero) u0 = ld(f);
    if (f.location == fp.u_plus) up = ld(f);
  }
  const long double tail = std::pow(static_cast<long double>(eps), static_cast<long double>(k));
  constexpr std::uint64_t cap = 1'000'000;
  ConvergenceSteps out;
  long double x = u0 + eps;
  while (x < up - tail) {
    if (++out.up > cap) raise(ErrorKind::CapExceeded, "upward iteration exceeded 10^6 steps");
    x = eval_ld(c, x);
  }
  x = u0 - eps;
  while (x > um + tail) {
    if (++out.down > cap) raise(ErrorKind::CapExceeded, "downward iteration exceeded 10^6 steps");
    x = eval_ld(c, x);
  }
  return out;
}

Rational second_difference(const GFunction& g, double p, double eta) {
  const Rational x = exact_rational(p), h = exact_rational(eta);
  return g.exact(x + h) - 2 * g.exact(x) + g.exact(x - h);
}

int second_difference_sign(const GFunction& g, double p, double eta) {
  const FixedPointSet fp = fixed_points(g);
  require(eta >= 0.0, ErrorKind::DomainError, "stencil width must be nonnegative");
  require(p - eta >= fp.u_zero && p + eta <= fp.u_plus && p > fp.u_zero, ErrorKind::DomainError,
          "second-difference stencil leaves (u0, u+]");
  return sign(second_difference(g, p, eta));
}

ForwardPhi forward_phi(const ModelSpec& spec) {
  validate(spec);
  ForwardPhi out;
  if (spec.family == Family::SexualReproduction) {
    const Rational beta = snap_rational(spec.beta);
    if (beta < 4) raise(ErrorKind::NoPositiveRoots, "beta < 4: no positive solution of phi(u) = 0");
    out.phi = rp({0, -1, beta, -beta});
  } else {
    const GFunction g = make_g(spec);
    Rational r = 1;
    if (spec.family == Family::LotkaVolterraBoundary) r = snap_rational(spec.theta) * snap_rational(spec.p3);
    out.phi = r * (g.exact - ident());
  }
  out.roots = roots_in(out.phi, 0, 1);
  return out;
}

}  // namespace dualvote
