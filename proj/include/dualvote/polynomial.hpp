#pragma once

// Dense univariate polynomials (ascending coefficients) over double or exact
// rationals, with Sturm-sequence root isolation for the rational case.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace dualvote {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

template <class T>
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<T> c) : c_(std::move(c)) { trim(); }

  static Poly constant(const T& a) { return Poly(std::vector<T>{a}); }
  static Poly monomial(const T& a, std::size_t k) {
    std::vector<T> c(k + 1, T(0));
    c[k] = a;
    return Poly(std::move(c));
  }
  // a + b*x
  static Poly linear(const T& a, const T& b) { return Poly(std::vector<T>{a, b}); }

  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  const std::vector<T>& coeffs() const noexcept { return c_; }
  T coeff(std::size_t k) const { return k < c_.size() ? c_[k] : T(0); }
  T leading() const { return c_.empty() ? T(0) : c_.back(); }

  T operator()(const T& x) const {
    T acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<T> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * T(static_cast<long>(k));
    return Poly(std::move(d));
  }

  // Antiderivative vanishing at 0.
  Poly antiderivative() const {
    std::vector<T> a(c_.size() + 1, T(0));
    for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / T(static_cast<long>(k + 1));
    return Poly(std::move(a));
  }

  // p(a + b*y) as a polynomial in y.
  Poly compose_affine(const T& a, const T& b) const {
    Poly out;
    const Poly inner = linear(a, b);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) out = out * inner + constant(*it);
    return out;
  }

  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    trim();
    return *this;
  }
  Poly& operator*=(const T& s) {
    for (auto& v : c_) v *= s;
    trim();
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(Poly a) { return a *= T(-1); }
  friend Poly operator*(Poly a, const T& s) { return a *= s; }
  friend Poly operator*(const T& s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    std::vector<T> c(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(c));
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
  }
  std::vector<T> c_;
};

using RPoly = Poly<Rational>;
using DPoly = Poly<double>;

// Exact binary value of a finite double.
Rational exact_rational(double x);
// Simplest rational (smallest denominator) that rounds to x; 0.3 -> 3/10.
Rational snap_rational(double x);
// Simplest rational in the closed interval [lo, hi].
Rational simplest_between(Rational lo, Rational hi);
double to_double(const Rational& r);
Rational floor_rational(const Rational& r);

DPoly to_double(const RPoly& p);

std::pair<RPoly, RPoly> divmod(const RPoly& a, const RPoly& b);
// Monic greatest common divisor; zero only if both inputs are zero.
RPoly gcd(RPoly a, RPoly b);
// p / gcd(p, p').
RPoly squarefree_part(const RPoly& p);

std::vector<RPoly> sturm_sequence(const RPoly& p);
// Number of distinct real roots in (a, b] for a squarefree sequence head.
int sturm_count(const std::vector<RPoly>& seq, const Rational& a, const Rational& b);

struct RealRoot {
  double value = 0.0;
  std::optional<Rational> exact;  // set when the root is a rational found exactly
};

// Distinct real roots in [a, b], ascending, each located to within tol.
std::vector<RealRoot> roots_in(const RPoly& p, const Rational& a, const Rational& b,
                               double tol = 1e-12);

// True iff p has a root of multiplicity >= 2 in the open interval (a, b).
bool has_multiple_root(const RPoly& p, const Rational& a, const Rational& b);

int sign(const Rational& r);

}  // namespace dualvote
