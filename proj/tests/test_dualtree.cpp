#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "dualvote/bbm.hpp"
#include "dualvote/dualtree.hpp"
#include "dualvote/errors.hpp"
#include "dualvote/parallel.hpp"
#include "dualvote/stats.hpp"

using namespace dualvote;

namespace {

std::vector<VoteRule> all_rules() {
  return {VoteRule::majority(), VoteRule::sexual(4.5), VoteRule::nonlinear_voter(0.25, 0.3)};
}

double mc_vote(const TimeLabelledTree& tree, const std::vector<double>& probs, const VoteRule& rule,
               std::uint64_t n, std::uint64_t seed, double* se) {
  const auto votes = parallel_map<std::uint8_t>(n, [&](std::size_t i) {
    const Stream s = derive_stream(seed, {"mc", static_cast<std::uint64_t>(i)});
    Stream lr = s.split("leaf");
    std::vector<std::uint8_t> leaves(probs.size());
    for (std::size_t k = 0; k < leaves.size(); ++k) leaves[k] = lr.bernoulli(probs[k]) ? 1 : 0;
    return vote(tree, leaves, rule, s.split("vote"));
  });
  const auto est = bernoulli_estimate(std::accumulate(votes.begin(), votes.end(), std::uint64_t{0}), n, seed);
  *se = est.std_error;
  return est.value;
}

}  // namespace

TEST(SampleTree, ZeroHorizonIsLeaf) {
  Stream s(1);
  const auto t = sample_tree(5.0, 0.0, 3, s);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.leaf_count(), 1u);
}

TEST(SampleTree, MeanLeafCountIsExponential) {
  // each branch turns one lineage into arity: growth rate rate * (arity - 1)
  for (int arity : {3, 5}) {
    const double rate = 1.0, horizon = 0.5;
    const std::uint64_t n = 100000;
    std::vector<double> leaves(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      Stream s = derive_stream(4, {static_cast<std::uint64_t>(arity), i});
      leaves[i] = static_cast<double>(sample_tree(rate, horizon, arity, s).leaf_count());
    }
    const auto est = mean_estimate(leaves, 4);
    EXPECT_NEAR(est.value, std::exp(rate * (arity - 1) * horizon), 4.0 * est.std_error);
  }
}

TEST(SampleTree, ExplosionGuard) {
  Stream s(2);
  try {
    sample_tree(1e6, 1.0, 3, s, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ExplosionGuard);
  }
}

TEST(SampleTree, TimesDecreaseAlongPaths) {
  Stream s(3);
  const auto t = sample_tree(4.0, 1.0, 3, s);
  for (std::size_t v = 1; v < t.size(); ++v) {
    const auto p = static_cast<std::size_t>(t.vertices[v].parent);
    EXPECT_LT(p, v);
    EXPECT_LE(t.vertices[v].time, t.vertices[p].time);
  }
}

TEST(RegularSubtree, Examples) {
  Stream s(5);
  const auto t = sample_tree(3.0, 1.0, 3, s);
  EXPECT_TRUE(contains_regular_subtree(t, 0));
  Stream s0(6);
  EXPECT_FALSE(contains_regular_subtree(sample_tree(1.0, 0.0, 3, s0), 1));
  const auto reg = regular_tree(4, 3);
  EXPECT_TRUE(contains_regular_subtree(reg, 4));
  EXPECT_FALSE(contains_regular_subtree(reg, 5));
  EXPECT_EQ(regular_depth(reg), 4);
}

TEST(RegularSubtree, EmbedProbabilityAtShortHorizon) {
  // horizon a eps^2 |log eps| with rate eps^-2: depth ceil|log eps| embeds with prob >= 1 - eps.
  // a from a sweep; at eps = 0.1 the passing horizon needs trees past the vertex cap.
  const double eps = 0.3, a = 3.5;
  const int depth = static_cast<int>(std::ceil(std::abs(std::log(eps))));
  const std::uint64_t n = 2000;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    Stream s = derive_stream(7, {i});
    hits += contains_regular_subtree(sample_tree(1.0 / (eps * eps), a * eps * eps * std::abs(std::log(eps)), 3, s),
                                     depth);
  }
  EXPECT_GE(static_cast<double>(hits) / n, 1.0 - eps);
}

TEST(Vote, AbsorbingLeaves) {
  Stream s(8);
  const auto t = sample_tree(3.0, 1.0, 3, s);
  const std::vector<std::uint8_t> ones(t.leaf_count(), 1), zeros(t.leaf_count(), 0);
  EXPECT_EQ(vote(t, ones, VoteRule::majority(), Stream(1)), 1);
  EXPECT_EQ(vote(t, zeros, VoteRule::sexual(4.5), Stream(1)), 0);
}

TEST(Vote, ArityMismatch) {
  const auto t = regular_tree(1, 3);
  const std::vector<std::uint8_t> leaves(3, 1);
  try {
    vote(t, leaves, VoteRule::nonlinear_voter(0.25, 0.3), Stream(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ArityMismatch);
  }
}

TEST(Vote, DepthOneMajorityMonteCarlo) {
  const auto t = regular_tree(1, 3);
  const double p = 0.3;
  double se = 0.0;
  const double est = mc_vote(t, std::vector<double>(3, p), VoteRule::majority(), 100000, 9, &se);
  EXPECT_NEAR(est, 3 * p * p - 2 * p * p * p, 3.0 * se);
}

TEST(ExactVote, DepthTwoMajorityEnumeration) {
  const auto t = regular_tree(2, 3);
  const std::vector<double> probs(9, 0.6);
  const double dp = exact_vote_probability(t, probs, VoteRule::majority());
  // enumerate all 2^9 leaf assignments; majority is deterministic
  double total = 0.0;
  for (unsigned m = 0; m < 512; ++m) {
    std::vector<std::uint8_t> leaves(9);
    double w = 1.0;
    for (int k = 0; k < 9; ++k) {
      leaves[k] = (m >> k) & 1U;
      w *= leaves[k] ? 0.6 : 0.4;
    }
    total += w * vote(t, leaves, VoteRule::majority(), Stream(0));
  }
  EXPECT_NEAR(dp, total, 1e-14);
  const double g1 = 3 * 0.36 - 2 * 0.216;
  EXPECT_NEAR(dp, 3 * g1 * g1 - 2 * g1 * g1 * g1, 1e-14);
}

TEST(ExactVote, DepthOneEndpoints) {
  for (const auto& rule : all_rules()) {
    const auto t = regular_tree(1, rule.arity());
    for (double p : {0.0, 1.0}) {
      const std::vector<double> probs(t.leaf_count(), p);
      const double want = rule.kind == VoteRule::Kind::SexualBirthDeath && p == 1.0 ? 9.0 / 11.0 : p;
      EXPECT_NEAR(exact_vote_probability(t, probs, rule), want, 1e-15);
    }
  }
}

TEST(ExactVote, NonlinearVoterHalf) {
  const auto rule = VoteRule::nonlinear_voter(0.25, 0.3);
  const auto t = regular_tree(1, 5);
  // enumerate 2^5 assignments with the a_k weights
  double want = 0.0;
  for (unsigned m = 0; m < 32; ++m) want += rule.a[static_cast<std::size_t>(__builtin_popcount(m))] / 32.0;
  EXPECT_NEAR(want, 0.5, 1e-15);
  EXPECT_NEAR(exact_vote_probability(t, std::vector<double>(5, 0.5), rule), want, 1e-15);
}

TEST(ExactVote, RegularTreeIdentity) {
  for (const auto& rule : all_rules()) {
    const auto g = make_g(rule.kind == VoteRule::Kind::Majority           ? ModelSpec::majority()
                          : rule.kind == VoteRule::Kind::SexualBirthDeath ? ModelSpec::sexual(4.5)
                                                                          : ModelSpec::nonlinear_voter(0.25, 0.3));
    for (int n = 0; n <= 6; ++n) {
      const auto t = regular_tree(n, rule.arity());
      for (double p : {0.05, 0.4, 0.5, 0.61, 0.97})
        EXPECT_NEAR(exact_vote_probability(t, std::vector<double>(t.leaf_count(), p), rule),
                    iterate_g(g, p, static_cast<std::uint64_t>(n)), 1e-12);
    }
  }
}

TEST(ExactVote, MonteCarloOnRandomTrees) {
  for (const auto& rule : all_rules()) {
    int tested = 0;
    for (std::uint64_t i = 0; tested < 20; ++i) {
      Stream s = derive_stream(10, {static_cast<std::uint64_t>(rule.arity()), i});
      const auto t = sample_tree(1.0, 1.0, rule.arity(), s);
      if (t.leaf_count() > 200) continue;
      ++tested;
      Stream ps = s.split("probs");
      std::vector<double> probs(t.leaf_count());
      for (auto& p : probs) p = ps.uniform();
      double se = 0.0;
      const double mc = mc_vote(t, probs, rule, 100000, 11 + i, &se);
      EXPECT_NEAR(mc, exact_vote_probability(t, probs, rule), 4.0 * se) << to_string(rule.kind) << " tree " << i;
    }
  }
}

TEST(ExactVote, LeafFlipAntisymmetry) {
  for (const auto& rule : {VoteRule::majority(), VoteRule::nonlinear_voter(0.25, 0.3)}) {
    Stream s(12);
    const auto t = sample_tree(1.5, 1.0, rule.arity(), s);
    std::vector<double> probs(t.leaf_count()), flipped(t.leaf_count());
    for (std::size_t k = 0; k < probs.size(); ++k) {
      probs[k] = s.uniform();
      flipped[k] = 1.0 - probs[k];
    }
    EXPECT_NEAR(exact_vote_probability(t, flipped, rule), 1.0 - exact_vote_probability(t, probs, rule), 1e-12);
  }
}

TEST(ExactVote, FixedPointsPropagate) {
  for (const auto& rule : all_rules()) {
    Stream s(13);
    const auto t = sample_tree(1.0, 1.0, rule.arity(), s);
    const auto fp = fixed_points(g_of_rule(rule));
    for (double u : {fp.u_minus, fp.u_zero, fp.u_plus})
      EXPECT_NEAR(exact_vote_probability(t, std::vector<double>(t.leaf_count(), u), rule), u, 1e-12);
  }
}

TEST(PartitionLaw, LargeNeighbourhoodIsMostlySingletons) {
  Stream s(14);
  const auto law = estimate_partition_law(1e-2, 50, 3, 2000, s);
  EXPECT_GT(law.singleton_probability(), 0.95);
  EXPECT_NEAR(law.total_mass(), 1.0, 1e-12);
}

TEST(PartitionLaw, EmptyEstimate) {
  Stream s(15);
  try {
    estimate_partition_law(1e-2, 1, 3, 0, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyEstimate);
  }
}

TEST(PartitionLaw, NondegenerateAtRangeOne) {
  Stream s(16);
  const auto law = estimate_partition_law(1e-4, 1, 3, 60, s);
  EXPECT_NEAR(law.total_mass(), 1.0, 1e-12);
  EXPECT_LT(law.singleton_probability(), 1.0);
  EXPECT_GT(law.singleton_probability(), 0.0);
}

TEST(PartitionLaw, SingletonsIncreaseWithRange) {
  Stream s1(17), s10(18);
  const std::uint64_t n = 4000;
  const double p1 = estimate_partition_law(1e-2, 1, 3, n, s1).singleton_probability();
  const double p10 = estimate_partition_law(1e-2, 10, 3, n, s10).singleton_probability();
  const double se = std::sqrt(p1 * (1 - p1) / n + p10 * (1 - p10) / n);
  EXPECT_GT(p10 - p1, 3.0 * se);
}

TEST(Serialize, RoundTrip) {
  Stream s(19);
  const auto t = sample_tree(2.0, 1.0, 3, s);
  const auto back = parse_tree(serialize(t));
  ASSERT_EQ(back.size(), t.size());
  EXPECT_EQ(back.arity, t.arity);
  for (std::size_t v = 0; v < t.size(); ++v) {
    EXPECT_EQ(back.vertices[v].parent, t.vertices[v].parent);
    EXPECT_DOUBLE_EQ(back.vertices[v].time, t.vertices[v].time);
    EXPECT_EQ(back.vertices[v].kind, t.vertices[v].kind);
  }
}
