#pragma once

// Time-labelled dual trees, the voting recursions evaluated on them, and the
// random family partitions used by the nonlinear voter vote.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualvote/gfun.hpp"
#include "dualvote/rng.hpp"

namespace dualvote {

enum class VertexKind : std::uint8_t { Branch, Leaf };

// A vertex is the end of a lineage segment. Times are time-remaining: the
// root segment starts at the horizon and leaves sit at 0.
struct Vertex {
  std::int64_t parent = -1;
  double time = 0.0;
  VertexKind kind = VertexKind::Leaf;
  std::uint32_t first_child = 0;  // children are first_child .. first_child + arity - 1
};

struct TimeLabelledTree {
  int arity = 3;
  double horizon = 0.0;
  int dimension = 0;
  std::vector<Vertex> vertices;   // 0 is the root; children always follow parents
  std::vector<double> positions;  // dimension values per vertex, empty when unset
  std::vector<double> origin;     // position at the horizon

  std::size_t size() const noexcept { return vertices.size(); }
  std::size_t leaf_count() const noexcept;
  std::vector<std::uint32_t> leaf_indices() const;
  // Start (time-remaining) of the segment ending at v.
  double segment_start(std::size_t v) const noexcept {
    return vertices[v].parent < 0 ? horizon : vertices[static_cast<std::size_t>(vertices[v].parent)].time;
  }
  std::span<double> position(std::size_t v) {
    return {positions.data() + v * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
  }
  std::span<const double> position(std::size_t v) const {
    return {positions.data() + v * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
  }
};

inline constexpr std::size_t kDefaultVertexCap = 10'000'000;

// Throws ExplosionGuard past cap vertices.
TimeLabelledTree sample_tree(double rate, double horizon, int arity, Stream& rng,
                             std::size_t cap = kDefaultVertexCap);

// Complete tree of the given depth with branch levels equally spaced in time.
TimeLabelledTree regular_tree(int depth, int arity, double horizon = 1.0);

bool contains_regular_subtree(const TimeLabelledTree& tree, int depth);
// Largest depth of a complete regular tree embedded at the root.
int regular_depth(const TimeLabelledTree& tree);

std::string serialize(const TimeLabelledTree& tree);
TimeLabelledTree parse_tree(std::string_view text);

// Set partitions of {0,...,4} as restricted growth strings.
using Partition5 = std::array<std::uint8_t, 5>;

struct PartitionLaw {
  std::vector<double> prob;  // indexed like all_partitions()
  std::uint64_t sample_size = 0;
  double eta = 0.0;
  int range = 0;
  int dimension = 0;

  static const std::vector<Partition5>& all_partitions();
  static std::size_t index_of(const Partition5& p);
  static PartitionLaw singletons();

  double singleton_probability() const;
  double total_mass() const;
  std::size_t sample(Stream& rng) const;
};

// Parent plus 4 children on distinct sites of x + [-L,L]^d (excluding x), coalescing
// nearest-neighbour walks at rate eta^-2 run for time sqrt(eta).
PartitionLaw estimate_partition_law(double eta, int L, int d, std::uint64_t trials, Stream& rng);

struct VoteRule {
  enum class Kind { SexualBirthDeath, Majority, NonlinearVoterAk };
  Kind kind = Kind::Majority;
  double beta = 4.5;
  std::array<double, 6> a{0.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  std::optional<PartitionLaw> partition;  // Singletons when empty

  static VoteRule sexual(double beta);
  static VoteRule majority();
  static VoteRule nonlinear_voter(double a1, double a2, std::optional<PartitionLaw> law = std::nullopt);
  // Throws InvalidSpec for families without a vote representation.
  static VoteRule for_model(const ModelSpec& spec);

  int arity() const noexcept { return kind == Kind::NonlinearVoterAk ? 5 : 3; }
  double birth_probability() const noexcept { return beta / (1.0 + beta); }
};

std::string_view to_string(VoteRule::Kind kind) noexcept;

// Root output given leaf states in leaf_indices() order. Vertex v draws from rng.split(v).
std::uint8_t vote(const TimeLabelledTree& tree, std::span<const std::uint8_t> leaf_states,
                  const VoteRule& rule, const Stream& rng);

// Same recursion on per-vertex inputs; entries for non-leaf vertices are ignored.
std::uint8_t vote_vertices(const TimeLabelledTree& tree, std::vector<std::uint8_t>& state,
                           const VoteRule& rule, const Stream& rng);

// Output probability of one branch vertex given independent input probabilities.
double vertex_probability(const VoteRule& rule, std::span<const double> inputs);

double exact_vote_probability(const TimeLabelledTree& tree, std::span<const double> leaf_probs,
                              const VoteRule& rule);

}  // namespace dualvote
