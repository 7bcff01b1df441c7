#include "dualvote/rng.hpp"

#include <cmath>
#include <numbers>

namespace dualvote {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kLabelSalt = 0xD1B54A32D192ED03ULL;

// Second finalizer with different constants (Stafford variant 13) so that the
// per-draw output is not a plain SplitMix sequence offset by the key.
std::uint64_t mix64_alt(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t combine(std::uint64_t key, std::uint64_t label_hash) noexcept {
  return mix64(key ^ mix64_alt(label_hash + kLabelSalt));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  // murmur3 fmix64
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

std::uint64_t hash_label(const StreamLabel& label) noexcept {
  if (const auto* n = std::get_if<std::uint64_t>(&label)) return mix64_alt(*n ^ 0x5555555555555555ULL);
  // FNV-1a over the bytes, then mixed
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : std::get<std::string_view>(label)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

Stream::Stream(std::uint64_t seed) noexcept : key_(mix64(seed + kGolden)) {}

Stream Stream::from_key(std::uint64_t key) noexcept { return Stream(KeyTag{}, key); }

Stream::result_type Stream::operator()() noexcept {
  const std::uint64_t n = counter_++;
  return mix64(key_ ^ mix64_alt(n * kGolden + 1));
}

double Stream::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

double Stream::normal() noexcept {
  // Box-Muller; the second variate is discarded to keep draws position-addressable.
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Stream Stream::split(std::uint64_t label) const noexcept {
  return from_key(combine(key_, hash_label(StreamLabel{label})));
}

Stream Stream::split(std::string_view label) const noexcept {
  return from_key(combine(key_, hash_label(StreamLabel{label})));
}

Stream derive_stream(std::uint64_t seed, std::span<const StreamLabel> labels) noexcept {
  Stream s(seed);
  std::uint64_t key = s.key();
  for (const auto& label : labels) key = combine(key, hash_label(label));
  return Stream::from_key(key);
}

Stream derive_stream(std::uint64_t seed, std::initializer_list<StreamLabel> labels) noexcept {
  return derive_stream(seed, std::span<const StreamLabel>(labels.begin(), labels.size()));
}

}  // namespace dualvote
