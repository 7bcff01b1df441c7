#include <algorithm>
#include <cmath>

#include "dualvote/dualtree.hpp"
#include "dualvote/errors.hpp"

namespace dualvote {

const std::vector<Partition5>& PartitionLaw::all_partitions() {
  static const std::vector<Partition5> parts = [] {
    std::vector<Partition5> out;
    Partition5 p{};
    // restricted growth strings: p[i] <= 1 + max(p[0..i-1])
    auto rec = [&](auto&& self, int i, int mx) -> void {
      if (i == 5) {
        out.push_back(p);
        return;
      }
      for (int v = 0; v <= mx + 1; ++v) {
        p[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
        self(self, i + 1, std::max(mx, v));
      }
    };
    p[0] = 0;
    rec(rec, 1, 0);
    return out;
  }();
  return parts;
}

std::size_t PartitionLaw::index_of(const Partition5& p) {
  const auto& parts = all_partitions();
  const auto it = std::find(parts.begin(), parts.end(), p);
  require(it != parts.end(), ErrorKind::DomainError, "not a restricted growth string");
  return static_cast<std::size_t>(it - parts.begin());
}

PartitionLaw PartitionLaw::singletons() {
  PartitionLaw law;
  law.prob.assign(all_partitions().size(), 0.0);
  law.prob[index_of({0, 1, 2, 3, 4})] = 1.0;
  return law;
}

double PartitionLaw::singleton_probability() const { return prob.at(index_of({0, 1, 2, 3, 4})); }

double PartitionLaw::total_mass() const {
  double s = 0.0;
  for (double p : prob) s += p;
  return s;
}

std::size_t PartitionLaw::sample(Stream& rng) const {
  double u = rng.uniform();
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (u < prob[i]) return i;
    u -= prob[i];
  }
  // rounding leftovers go to the last atom with positive mass
  for (std::size_t i = prob.size(); i-- > 0;)
    if (prob[i] > 0.0) return i;
  return 0;
}

PartitionLaw estimate_partition_law(double eta, int L, int d, std::uint64_t trials, Stream& rng) {
  require(trials > 0, ErrorKind::EmptyEstimate, "partition law needs at least one trial");
  require(eta > 0.0 && L >= 1 && d >= 1, ErrorKind::DomainError, "partition law needs eta > 0, L >= 1, d >= 1");
  require(std::pow(2.0 * L + 1.0, d) - 1.0 >= 4.0, ErrorKind::DomainError, "neighbourhood has fewer than 4 sites");
  const auto& parts = PartitionLaw::all_partitions();
  std::vector<std::uint64_t> counts(parts.size(), 0);
  const double jump_rate = 1.0 / (eta * eta);
  const double window = std::sqrt(eta);
  const auto ud = static_cast<std::size_t>(d);
  std::vector<long> pos(5 * ud);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Stream s = rng.split(trial);
    std::fill(pos.begin(), pos.end(), 0L);
    for (std::size_t k = 1; k < 5; ++k) {
      for (;;) {
        bool origin = true;
        for (std::size_t i = 0; i < ud; ++i) {
          pos[k * ud + i] = static_cast<long>(s.below(static_cast<std::uint64_t>(2 * L + 1))) - L;
          origin = origin && pos[k * ud + i] == 0;
        }
        bool clash = origin;
        for (std::size_t j = 1; j < k && !clash; ++j)
          clash = std::equal(pos.begin() + static_cast<long>(j * ud), pos.begin() + static_cast<long>((j + 1) * ud),
                             pos.begin() + static_cast<long>(k * ud));
        if (!clash) break;
      }
    }
    std::array<int, 5> label{0, 1, 2, 3, 4};
    std::array<int, 5> alive{0, 1, 2, 3, 4};
    int n_alive = 5;
    double t = 0.0;
    while (n_alive > 1) {
      t += s.exponential(jump_rate * n_alive);
      if (t > window) break;
      const int idx = static_cast<int>(s.below(static_cast<std::uint64_t>(n_alive)));
      const auto w = static_cast<std::size_t>(alive[static_cast<std::size_t>(idx)]);
      const auto dir = s.below(2 * ud);
      pos[w * ud + dir / 2] += (dir % 2 == 0) ? 1 : -1;
      for (int j = 0; j < n_alive; ++j) {
        const auto o = static_cast<std::size_t>(alive[static_cast<std::size_t>(j)]);
        if (o == w) continue;
        if (!std::equal(pos.begin() + static_cast<long>(w * ud), pos.begin() + static_cast<long>((w + 1) * ud),
                        pos.begin() + static_cast<long>(o * ud)))
          continue;
        const int from = label[w], to = label[o];
        for (int& l : label)
          if (l == from) l = to;
        alive[static_cast<std::size_t>(idx)] = alive[static_cast<std::size_t>(n_alive - 1)];
        --n_alive;
        break;
      }
    }
    // canonical restricted growth string
    Partition5 rgs{};
    std::array<int, 5> remap{-1, -1, -1, -1, -1};
    int next = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto l = static_cast<std::size_t>(label[k]);
      if (remap[l] < 0) remap[l] = next++;
      rgs[k] = static_cast<std::uint8_t>(remap[l]);
    }
    ++counts[PartitionLaw::index_of(rgs)];
  }
  PartitionLaw law;
  law.prob.resize(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    law.prob[i] = static_cast<double>(counts[i]) / static_cast<double>(trials);
  law.sample_size = trials;
  law.eta = eta;
  law.range = L;
  law.dimension = d;
  return law;
}

}  // namespace dualvote
