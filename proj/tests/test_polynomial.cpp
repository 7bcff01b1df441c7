#include <gtest/gtest.h>

#include "dualvote/polynomial.hpp"

using namespace dualvote;

namespace {
RPoly rp(std::initializer_list<Rational> c) { return RPoly(std::vector<Rational>(c)); }
}  // namespace

TEST(Polynomial, EvaluateAndDifferentiate) {
  const auto p = rp({1, -3, 0, 2});  // 1 - 3x + 2x^3
  EXPECT_EQ(p(Rational(2)), Rational(11));
  EXPECT_EQ(p.derivative(), rp({-3, 0, 6}));
  EXPECT_EQ(p.antiderivative().derivative(), p);
}

TEST(Polynomial, SnapRational) {
  EXPECT_EQ(snap_rational(0.3), Rational(3, 10));
  EXPECT_EQ(snap_rational(1.0 / 3.0), Rational(1, 3));
  EXPECT_EQ(exact_rational(0.5), Rational(1, 2));
}

TEST(Polynomial, DivmodAndGcd) {
  const auto a = rp({-1, 0, 1});  // (x-1)(x+1)
  const auto b = rp({-1, 1});
  const auto [q, r] = divmod(a, b);
  EXPECT_EQ(q, rp({1, 1}));
  EXPECT_TRUE(r.is_zero());
  EXPECT_EQ(gcd(a, rp({1, 2, 1})), rp({1, 1}));
}

TEST(Polynomial, RootsOfCubic) {
  // x (3x - 1)(3x - 2): roots 0, 1/3, 2/3
  const auto p = rp({0, 2, -9, 9});
  const auto roots = roots_in(p, Rational(0), Rational(1));
  ASSERT_EQ(roots.size(), 3u);
  EXPECT_NEAR(roots[1].value, 1.0 / 3.0, 1e-12);
  ASSERT_TRUE(roots[2].exact.has_value());
  EXPECT_EQ(*roots[2].exact, Rational(2, 3));
}

TEST(Polynomial, IrrationalRootToTolerance) {
  const auto p = rp({-2, 0, 1});
  const auto roots = roots_in(p, Rational(0), Rational(2));
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0].value, std::sqrt(2.0), 1e-12);
}

TEST(Polynomial, MultipleRootDetection) {
  const auto p = rp({Rational(1, 4), -1, 1});  // (x - 1/2)^2
  EXPECT_TRUE(has_multiple_root(p, Rational(0), Rational(1)));
  EXPECT_FALSE(has_multiple_root(rp({0, 2, -9, 9}), Rational(0), Rational(1)));
}

TEST(Polynomial, SturmCount) {
  const auto seq = sturm_sequence(rp({0, 2, -9, 9}));
  EXPECT_EQ(sturm_count(seq, Rational(-1), Rational(1)), 3);
  EXPECT_EQ(sturm_count(seq, Rational(1, 2), Rational(1)), 1);
}
