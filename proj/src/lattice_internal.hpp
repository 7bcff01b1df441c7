#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dualvote/lattice.hpp"

namespace dualvote::detail {

inline std::int32_t wrap_coord(std::int64_t c, int side) {
  const std::int64_t h = side / 2;
  std::int64_t m = (c + h) % side;
  if (m < 0) m += side;
  return static_cast<std::int32_t>(m - h);
}

inline std::size_t site_index(const Coord& c, int side, int dim) {
  std::size_t idx = 0, stride = 1;
  for (int i = 0; i < dim; ++i) {
    const auto w = static_cast<std::size_t>(wrap_coord(c[static_cast<std::size_t>(i)], side) + side / 2);
    idx += w * stride;
    stride *= static_cast<std::size_t>(side);
  }
  return idx;
}

inline Coord site_coords(std::size_t idx, int side, int dim) {
  Coord c{};
  for (int i = 0; i < dim; ++i) {
    c[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(idx % static_cast<std::size_t>(side)) - side / 2;
    idx /= static_cast<std::size_t>(side);
  }
  return c;
}

// Direction k in [0, 2d): axis k/2, sign + for even k.
inline Coord step(Coord c, int dir) {
  c[static_cast<std::size_t>(dir / 2)] += (dir % 2 == 0) ? 1 : -1;
  return c;
}

// The four diagonal pairs {s1 e1, s2 e2} as direction indices.
inline std::array<int, 2> diagonal_pair(int k) {
  static constexpr std::array<std::array<int, 2>, 4> pairs{{{0, 2}, {1, 2}, {1, 3}, {0, 3}}};
  return pairs[static_cast<std::size_t>(k)];
}

// Four distinct nonzero offsets in [-L,L]^d.
inline std::array<Coord, 4> range_offsets(Stream& rng, int L, int dim) {
  std::array<Coord, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    for (;;) {
      Coord c{};
      bool zero = true;
      for (int i = 0; i < dim; ++i) {
        c[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(2 * L + 1))) - L;
        zero = zero && c[static_cast<std::size_t>(i)] == 0;
      }
      bool clash = zero;
      for (std::size_t j = 0; j < k && !clash; ++j) clash = out[j] == c;
      if (!clash) {
        out[k] = c;
        break;
      }
    }
  }
  return out;
}

inline Coord add(Coord a, const Coord& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

// Site -> particle map, flat for small tori.
class Occupancy {
 public:
  static constexpr std::uint32_t kEmpty = 0xFFFFFFFFu;

  explicit Occupancy(std::size_t sites) {
    if (sites <= (std::size_t{1} << 16)) flat_.assign(sites, kEmpty);
  }
  std::uint32_t get(std::size_t site) const {
    if (!flat_.empty()) return flat_[site];
    const auto it = map_.find(site);
    return it == map_.end() ? kEmpty : it->second;
  }
  void set(std::size_t site, std::uint32_t id) {
    if (!flat_.empty())
      flat_[site] = id;
    else
      map_[site] = id;
  }
  void erase(std::size_t site) {
    if (!flat_.empty())
      flat_[site] = kEmpty;
    else
      map_.erase(site);
  }

 private:
  std::vector<std::uint32_t> flat_;
  std::unordered_map<std::size_t, std::uint32_t> map_;
};

}  // namespace dualvote::detail
