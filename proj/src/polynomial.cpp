#include "dualvote/polynomial.hpp"

#include <cmath>
#include <limits>

#include "dualvote/errors.hpp"

namespace dualvote {

namespace {

int variations(const std::vector<RPoly>& seq, const Rational& x) {
  int count = 0;
  int last = 0;
  for (const auto& p : seq) {
    const int s = sign(p(x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

struct Isolator {
  const RPoly& f;
  const std::vector<RPoly>& seq;
  double tol;
  std::vector<RealRoot>& out;

  void isolate(const Rational& lo, const Rational& hi, int count) {
    if (count <= 0) return;
    if (count == 1) {
      refine(lo, hi);
      return;
    }
    const Rational mid = (lo + hi) / 2;
    const int left = sturm_count(seq, lo, mid);
    isolate(lo, mid, left);
    isolate(mid, hi, count - left);
  }

  // exactly one root in (lo, hi]
  void refine(Rational lo, Rational hi) {
    if (f(hi) == 0) {
      out.push_back({to_double(hi), hi});
      return;
    }
    const double target = std::min(tol, 1e-15);
    while (to_double(hi - lo) > target) {
      const Rational mid = (lo + hi) / 2;
      if (f(mid) == 0) {
        out.push_back({to_double(mid), mid});
        return;
      }
      if (sturm_count(seq, lo, mid) == 1)
        hi = mid;
      else
        lo = mid;
    }
    const Rational q = simplest_between(lo, hi);
    if (f(q) == 0) {
      out.push_back({to_double(q), q});
      return;
    }
    out.push_back({to_double((lo + hi) / 2), std::nullopt});
  }
};

}  // namespace

int sign(const Rational& r) { return r > 0 ? 1 : (r < 0 ? -1 : 0); }

Rational exact_rational(double x) {
  require(std::isfinite(x), ErrorKind::DomainError, "non-finite value has no rational form");
  if (x == 0.0) return Rational(0);
  int e = 0;
  const double m = std::frexp(x, &e);
  const auto mant = static_cast<long long>(std::ldexp(m, 53));
  Rational r(mant);
  const int shift = e - 53;
  BigInt pow2 = 1;
  pow2 <<= std::abs(shift);
  if (shift >= 0) return r * Rational(pow2);
  return r / Rational(pow2);
}

Rational floor_rational(const Rational& r) {
  const BigInt n = boost::multiprecision::numerator(r);
  const BigInt d = boost::multiprecision::denominator(r);
  BigInt q = n / d;
  if (n < 0 && q * d != n) q -= 1;
  return Rational(q);
}

Rational simplest_between(Rational lo, Rational hi) {
  if (lo > hi) std::swap(lo, hi);
  if (hi < 0) return -simplest_between(-hi, -lo);
  if (lo <= 0) return Rational(0);
  const Rational fl = floor_rational(lo);
  if (fl == lo) return lo;
  if (fl + 1 <= hi) return fl + 1;
  return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl));
}

Rational snap_rational(double x) {
  if (x == 0.0) return Rational(0);
  const Rational r = exact_rational(x);
  const Rational below = exact_rational(std::nextafter(x, -std::numeric_limits<double>::infinity()));
  const Rational above = exact_rational(std::nextafter(x, std::numeric_limits<double>::infinity()));
  // open half-ulp neighbourhood, shrunk slightly so the result rounds back to x
  const Rational lo = r - (r - below) * Rational(49, 100);
  const Rational hi = r + (above - r) * Rational(49, 100);
  return simplest_between(lo, hi);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

DPoly to_double(const RPoly& p) {
  std::vector<double> c;
  c.reserve(p.coeffs().size());
  for (const auto& v : p.coeffs()) c.push_back(to_double(v));
  return DPoly(std::move(c));
}

std::pair<RPoly, RPoly> divmod(const RPoly& a, const RPoly& b) {
  require(!b.is_zero(), ErrorKind::DomainError, "polynomial division by zero");
  std::vector<Rational> rem = a.coeffs();
  const int db = b.degree();
  if (a.degree() < db) return {RPoly(), a};
  std::vector<Rational> quot(static_cast<std::size_t>(a.degree() - db + 1), Rational(0));
  const Rational lead = b.leading();
  for (int k = a.degree(); k >= db; --k) {
    const Rational q = rem[static_cast<std::size_t>(k)] / lead;
    quot[static_cast<std::size_t>(k - db)] = q;
    if (q == 0) continue;
    for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k - db + j)] -= q * b.coeff(static_cast<std::size_t>(j));
  }
  return {RPoly(std::move(quot)), RPoly(std::move(rem))};
}

RPoly gcd(RPoly a, RPoly b) {
  while (!b.is_zero()) {
    RPoly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return a * (Rational(1) / a.leading());
}

RPoly squarefree_part(const RPoly& p) {
  if (p.degree() <= 0) return p;
  const RPoly g = gcd(p, p.derivative());
  return divmod(p, g).first;
}

std::vector<RPoly> sturm_sequence(const RPoly& p) {
  std::vector<RPoly> seq;
  if (p.is_zero()) return seq;
  seq.push_back(p);
  RPoly next = p.derivative();
  while (!next.is_zero()) {
    seq.push_back(next);
    next = -divmod(seq[seq.size() - 2], seq.back()).second;
  }
  return seq;
}

int sturm_count(const std::vector<RPoly>& seq, const Rational& a, const Rational& b) {
  return variations(seq, a) - variations(seq, b);
}

std::vector<RealRoot> roots_in(const RPoly& p, const Rational& a, const Rational& b, double tol) {
  require(!p.is_zero(), ErrorKind::DomainError, "roots of the zero polynomial");
  require(a <= b, ErrorKind::DomainError, "empty root interval");
  std::vector<RealRoot> out;
  if (p.degree() == 0) return out;
  const RPoly sf = squarefree_part(p);
  const auto seq = sturm_sequence(sf);
  if (sf(a) == 0) out.push_back({to_double(a), a});
  if (a == b) return out;
  Isolator iso{sf, seq, tol, out};
  iso.isolate(a, b, sturm_count(seq, a, b));
  std::sort(out.begin(), out.end(), [](const RealRoot& x, const RealRoot& y) { return x.value < y.value; });
  return out;
}

bool has_multiple_root(const RPoly& p, const Rational& a, const Rational& b) {
  if (p.degree() < 2) return false;
  const RPoly g = gcd(p, p.derivative());
  if (g.degree() < 1) return false;
  const auto seq = sturm_sequence(squarefree_part(g));
  int inside = sturm_count(seq, a, b);
  if (g(b) == 0) --inside;
  return inside > 0;
}

}  // namespace dualvote
