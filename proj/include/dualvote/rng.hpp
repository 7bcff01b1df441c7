#pragma once

// Counter-based random streams with hash-derived substreams.
//
// A Stream is a pair (key, counter); the n-th draw is a keyed bijective mix
// of n, so any stream can be re-created from its key alone and two streams
// never share state. Substreams are derived by hashing labels into the key,
// which makes (seed, trial, vertex) addressing stable across worker counts.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string_view>
#include <variant>

namespace dualvote {

using StreamLabel = std::variant<std::uint64_t, std::string_view>;

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_label(const StreamLabel& label) noexcept;

class Stream {
 public:
  using result_type = std::uint64_t;

  // Root stream keyed by a user seed.
  explicit Stream(std::uint64_t seed = 0) noexcept;

  static Stream from_key(std::uint64_t key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double exponential(double rate) noexcept;
  double normal() noexcept;
  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Independent child stream addressed by a label; does not advance *this.
  Stream split(std::uint64_t label) const noexcept;
  Stream split(std::string_view label) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  struct KeyTag {};
  Stream(KeyTag, std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

Stream derive_stream(std::uint64_t seed, std::span<const StreamLabel> labels) noexcept;
Stream derive_stream(std::uint64_t seed, std::initializer_list<StreamLabel> labels) noexcept;

}  // namespace dualvote
