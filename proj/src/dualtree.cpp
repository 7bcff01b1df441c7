#include "dualvote/dualtree.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dualvote/errors.hpp"

namespace dualvote {

std::size_t TimeLabelledTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(vertices.begin(), vertices.end(), [](const Vertex& v) { return v.kind == VertexKind::Leaf; }));
}

std::vector<std::uint32_t> TimeLabelledTree::leaf_indices() const {
  std::vector<std::uint32_t> out;
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (vertices[v].kind == VertexKind::Leaf) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

TimeLabelledTree sample_tree(double rate, double horizon, int arity, Stream& rng, std::size_t cap) {
  require(rate >= 0.0 && std::isfinite(rate), ErrorKind::DomainError, "branch rate must be finite and >= 0");
  require(horizon >= 0.0, ErrorKind::DomainError, "horizon must be >= 0");
  require(arity >= 2, ErrorKind::DomainError, "arity must be at least 2");
  TimeLabelledTree tree;
  tree.arity = arity;
  tree.horizon = horizon;
  auto make = [&](std::int64_t parent, double start) {
    Vertex v;
    v.parent = parent;
    const double t = rate > 0.0 ? start - rng.exponential(rate) : -1.0;
    if (t > 0.0) {
      v.kind = VertexKind::Branch;
      v.time = t;
    }
    return v;
  };
  tree.vertices.push_back(make(-1, horizon));
  for (std::size_t i = 0; i < tree.vertices.size(); ++i) {
    if (tree.vertices[i].kind != VertexKind::Branch) continue;
    if (tree.vertices.size() + static_cast<std::size_t>(arity) > cap)
      raise(ErrorKind::ExplosionGuard, "dual tree exceeded " + std::to_string(cap) + " vertices");
    tree.vertices[i].first_child = static_cast<std::uint32_t>(tree.vertices.size());
    const double start = tree.vertices[i].time;
    for (int c = 0; c < arity; ++c) tree.vertices.push_back(make(static_cast<std::int64_t>(i), start));
  }
  return tree;
}

TimeLabelledTree regular_tree(int depth, int arity, double horizon) {
  require(depth >= 0 && arity >= 2, ErrorKind::DomainError, "regular tree needs depth >= 0, arity >= 2");
  TimeLabelledTree tree;
  tree.arity = arity;
  tree.horizon = horizon;
  std::vector<int> level{0};
  tree.vertices.push_back({});
  for (std::size_t i = 0; i < tree.vertices.size(); ++i) {
    const int lv = level[i];
    if (lv == depth) continue;
    tree.vertices[i].kind = VertexKind::Branch;
    tree.vertices[i].time = horizon * static_cast<double>(depth - lv) / static_cast<double>(depth + 1);
    tree.vertices[i].first_child = static_cast<std::uint32_t>(tree.vertices.size());
    for (int c = 0; c < arity; ++c) {
      Vertex v;
      v.parent = static_cast<std::int64_t>(i);
      tree.vertices.push_back(v);
      level.push_back(lv + 1);
    }
  }
  return tree;
}

int regular_depth(const TimeLabelledTree& tree) {
  std::vector<int> h(tree.size(), 0);
  for (std::size_t v = tree.size(); v-- > 0;) {
    const Vertex& x = tree.vertices[v];
    if (x.kind == VertexKind::Leaf) continue;
    int m = std::numeric_limits<int>::max();
    for (int c = 0; c < tree.arity; ++c) m = std::min(m, h[x.first_child + static_cast<std::uint32_t>(c)]);
    h[v] = m + 1;
  }
  return tree.size() == 0 ? 0 : h[0];
}

bool contains_regular_subtree(const TimeLabelledTree& tree, int depth) {
  return depth <= 0 || regular_depth(tree) >= depth;
}

std::string serialize(const TimeLabelledTree& tree) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "tree " << tree.arity << ' ' << tree.horizon << ' ' << tree.dimension << ' ' << tree.size() << '\n';
  os << "origin";
  for (double x : tree.origin) os << ' ' << x;
  os << '\n';
  const bool with_pos = tree.dimension > 0 && tree.positions.size() == tree.size() * static_cast<std::size_t>(tree.dimension);
  for (std::size_t v = 0; v < tree.size(); ++v) {
    const Vertex& x = tree.vertices[v];
    os << v << ' ' << x.parent << ' ' << x.time << ' ' << (x.kind == VertexKind::Branch ? 'B' : 'L');
    if (with_pos)
      for (double c : tree.position(v)) os << ' ' << c;
    os << '\n';
  }
  return os.str();
}

TimeLabelledTree parse_tree(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string tag;
  TimeLabelledTree tree;
  std::size_t n = 0;
  if (!(is >> tag >> tree.arity >> tree.horizon >> tree.dimension >> n) || tag != "tree")
    raise(ErrorKind::DomainError, "tree text: bad header");
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  {
    std::istringstream ls(line);
    if (!(ls >> tag) || tag != "origin") raise(ErrorKind::DomainError, "tree text: missing origin line");
    double x;
    while (ls >> x) tree.origin.push_back(x);
  }
  tree.vertices.resize(n);
  std::vector<double> pos;
  std::vector<std::uint8_t> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t id;
    char kind;
    Vertex v;
    if (!(is >> id >> v.parent >> v.time >> kind) || id != i)
      raise(ErrorKind::DomainError, "tree text: bad vertex line " + std::to_string(i));
    v.kind = kind == 'B' ? VertexKind::Branch : VertexKind::Leaf;
    tree.vertices[i] = v;
    std::getline(is, line);
    std::istringstream ls(line);
    double x;
    while (ls >> x) pos.push_back(x);
    if (v.parent >= 0) {
      const auto p = static_cast<std::size_t>(v.parent);
      if (!seen[p]) {
        tree.vertices[p].first_child = static_cast<std::uint32_t>(i);
        seen[p] = 1;
      }
    }
  }
  if (!pos.empty()) {
    require(pos.size() == n * static_cast<std::size_t>(tree.dimension), ErrorKind::DomainError,
            "tree text: position count mismatch");
    tree.positions = std::move(pos);
  }
  return tree;
}

VoteRule VoteRule::sexual(double beta) {
  VoteRule r;
  r.kind = Kind::SexualBirthDeath;
  r.beta = beta;
  return r;
}

VoteRule VoteRule::majority() { return VoteRule{}; }

VoteRule VoteRule::nonlinear_voter(double a1, double a2, std::optional<PartitionLaw> law) {
  VoteRule r;
  r.kind = Kind::NonlinearVoterAk;
  r.a = {0.0, a1, a2, 1.0 - a2, 1.0 - a1, 1.0};
  r.partition = std::move(law);
  return r;
}

VoteRule VoteRule::for_model(const ModelSpec& spec) {
  switch (spec.family) {
    case Family::SexualReproduction: return sexual(spec.beta);
    case Family::Majority:
    case Family::LotkaVolterraBoundary: return majority();
    case Family::NonlinearVoter: return nonlinear_voter(spec.a1, spec.a2);
    case Family::CustomCubic: break;
  }
  raise(ErrorKind::InvalidSpec, "custom cubic g has no voting representation");
}

std::string_view to_string(VoteRule::Kind kind) noexcept {
  switch (kind) {
    case VoteRule::Kind::SexualBirthDeath: return "SexualBirthDeath";
    case VoteRule::Kind::Majority: return "Majority";
    case VoteRule::Kind::NonlinearVoterAk: return "NonlinearVoterAk";
  }
  return "Unknown";
}

namespace {

void check_arity(const TimeLabelledTree& tree, const VoteRule& rule) {
  if (tree.arity != rule.arity())
    raise(ErrorKind::ArityMismatch, "tree arity " + std::to_string(tree.arity) + " but " +
                                        std::string(to_string(rule.kind)) + " needs " +
                                        std::to_string(rule.arity()));
}

std::size_t singleton_index() {
  static const std::size_t idx = PartitionLaw::index_of({0, 1, 2, 3, 4});
  return idx;
}

}  // namespace

std::uint8_t vote_vertices(const TimeLabelledTree& tree, std::vector<std::uint8_t>& state, const VoteRule& rule,
                           const Stream& rng) {
  check_arity(tree, rule);
  require(state.size() == tree.size(), ErrorKind::DomainError, "state vector does not match tree size");
  const auto& parts = PartitionLaw::all_partitions();
  for (std::size_t v = tree.size(); v-- > 0;) {
    const Vertex& x = tree.vertices[v];
    if (x.kind == VertexKind::Leaf) continue;
    const std::uint8_t* in = state.data() + x.first_child;
    Stream s = rng.split(static_cast<std::uint64_t>(v));
    switch (rule.kind) {
      case VoteRule::Kind::SexualBirthDeath:
        state[v] = s.uniform() < rule.birth_probability() ? static_cast<std::uint8_t>(in[0] | (in[1] & in[2])) : 0;
        break;
      case VoteRule::Kind::Majority:
        state[v] = static_cast<std::uint8_t>(in[0] + in[1] + in[2] >= 2);
        break;
      case VoteRule::Kind::NonlinearVoterAk: {
        const std::size_t pi = rule.partition ? rule.partition->sample(s) : singleton_index();
        const Partition5& cells = parts[pi];
        const int ncells = *std::max_element(cells.begin(), cells.end()) + 1;
        int ones = 0;
        for (int c = 0; c < ncells; ++c) {
          int members[5], m = 0;
          for (int k = 0; k < 5; ++k)
            if (cells[static_cast<std::size_t>(k)] == c) members[m++] = k;
          const int rep = m == 1 ? members[0] : members[s.below(static_cast<std::uint64_t>(m))];
          ones += in[rep] * m;
        }
        state[v] = static_cast<std::uint8_t>(s.uniform() < rule.a[static_cast<std::size_t>(ones)]);
        break;
      }
    }
  }
  return state[0];
}

std::uint8_t vote(const TimeLabelledTree& tree, std::span<const std::uint8_t> leaf_states, const VoteRule& rule,
                  const Stream& rng) {
  check_arity(tree, rule);
  const auto leaves = tree.leaf_indices();
  require(leaf_states.size() == leaves.size(), ErrorKind::DomainError, "leaf state count does not match tree");
  std::vector<std::uint8_t> state(tree.size(), 0);
  for (std::size_t i = 0; i < leaves.size(); ++i) state[leaves[i]] = leaf_states[i];
  return vote_vertices(tree, state, rule, rng);
}

double vertex_probability(const VoteRule& rule, std::span<const double> p) {
  switch (rule.kind) {
    case VoteRule::Kind::SexualBirthDeath:
      return rule.birth_probability() * (p[0] + (1.0 - p[0]) * p[1] * p[2]);
    case VoteRule::Kind::Majority:
      return p[0] * p[1] + p[0] * p[2] + p[1] * p[2] - 2.0 * p[0] * p[1] * p[2];
    case VoteRule::Kind::NonlinearVoterAk: {
      const auto& parts = PartitionLaw::all_partitions();
      double total = 0.0;
      for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const double w = rule.partition ? rule.partition->prob[pi] : (pi == singleton_index() ? 1.0 : 0.0);
        if (w == 0.0) continue;
        const Partition5& cells = parts[pi];
        const int ncells = *std::max_element(cells.begin(), cells.end()) + 1;
        // distribution of the number of ones after collapsing each cell
        std::array<double, 6> dist{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
        for (int c = 0; c < ncells; ++c) {
          double q = 0.0;
          int m = 0;
          for (int k = 0; k < 5; ++k)
            if (cells[static_cast<std::size_t>(k)] == c) {
              q += p[static_cast<std::size_t>(k)];
              ++m;
            }
          q /= m;
          std::array<double, 6> next{};
          for (int j = 0; j < 6; ++j) {
            if (dist[static_cast<std::size_t>(j)] == 0.0) continue;
            next[static_cast<std::size_t>(j)] += dist[static_cast<std::size_t>(j)] * (1.0 - q);
            next[static_cast<std::size_t>(j + m)] += dist[static_cast<std::size_t>(j)] * q;
          }
          dist = next;
        }
        double out = 0.0;
        for (std::size_t j = 0; j < 6; ++j) out += dist[j] * rule.a[j];
        total += w * out;
      }
      return total;
    }
  }
  return 0.0;
}

double exact_vote_probability(const TimeLabelledTree& tree, std::span<const double> leaf_probs, const VoteRule& rule) {
  check_arity(tree, rule);
  const auto leaves = tree.leaf_indices();
  require(leaf_probs.size() == leaves.size(), ErrorKind::DomainError, "leaf probability count does not match tree");
  std::vector<double> prob(tree.size(), 0.0);
  for (std::size_t i = 0; i < leaves.size(); ++i) prob[leaves[i]] = leaf_probs[i];
  for (std::size_t v = tree.size(); v-- > 0;) {
    const Vertex& x = tree.vertices[v];
    if (x.kind == VertexKind::Leaf) continue;
    prob[v] = vertex_probability(rule, {prob.data() + x.first_child, static_cast<std::size_t>(tree.arity)});
  }
  return prob[0];
}

}  // namespace dualvote
