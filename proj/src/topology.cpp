#include "steinerflow/topology.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace steinerflow {
namespace {

// A partially built tree with its own local interior numbering.  Local
// interior vertex i is encoded as -1-i so fragments can be glued and
// renumbered without collisions; `root` is where the parent attaches.
struct Frag {
  int root = 0;
  int ninter = 0;
  std::vector<std::pair<int, int>> edges;
};

int shift_id(int id, int by) { return id < 0 ? id - by : id; }

// All rooted noncrossing trees over the consecutive leaf run [lo, hi).
std::vector<Frag> rooted_trees(const std::vector<int>& leaves, int lo, int hi) {
  std::vector<Frag> out;
  if (hi - lo == 1) {
    out.push_back({leaves[lo], 0, {}});
    return out;
  }
  // Root vertex with two child arcs covering the run.
  for (int mid = lo + 1; mid < hi; ++mid) {
    auto lefts = rooted_trees(leaves, lo, mid);
    auto rights = rooted_trees(leaves, mid, hi);
    for (const auto& L : lefts) {
      for (const auto& R : rights) {
        Frag f;
        f.ninter = L.ninter + R.ninter + 1;
        int v = -f.ninter;  // the new local interior vertex
        f.root = v;
        f.edges = L.edges;
        for (auto [a, b] : R.edges) {
          f.edges.emplace_back(shift_id(a, L.ninter), shift_id(b, L.ninter));
        }
        f.edges.emplace_back(v, L.root);
        f.edges.emplace_back(v, shift_id(R.root, L.ninter));
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

// All noncrossing trees on a block of >= 2 leaves (listed in cyclic order).
std::vector<Frag> block_trees(const std::vector<int>& block) {
  const int m = static_cast<int>(block.size());
  std::vector<Frag> out;
  if (m == 2) {
    out.push_back({block[0], 0, {{block[0], block[1]}}});
    return out;
  }
  // The unique neighbor of block[0] is an interior vertex whose other two
  // subtrees cover consecutive arcs of the remaining leaves.
  for (int mid = 2; mid < m; ++mid) {
    auto lefts = rooted_trees(block, 1, mid);
    auto rights = rooted_trees(block, mid, m);
    for (const auto& L : lefts) {
      for (const auto& R : rights) {
        Frag f;
        f.ninter = L.ninter + R.ninter + 1;
        int v = -f.ninter;
        f.root = v;
        f.edges = L.edges;
        for (auto [a, b] : R.edges) {
          f.edges.emplace_back(shift_id(a, L.ninter), shift_id(b, L.ninter));
        }
        f.edges.emplace_back(v, L.root);
        f.edges.emplace_back(v, shift_id(R.root, L.ninter));
        f.edges.emplace_back(block[0], v);
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

// All noncrossing partitions of the consecutive run [lo, hi) of 0..k-1 into
// blocks of size >= 2.  Linear noncrossing equals cyclic noncrossing for
// partitions, so working on the cut-open line is enough.
void partitions_rec(int lo, int hi, std::vector<std::vector<int>>& acc,
                    std::vector<std::vector<std::vector<int>>>& out) {
  if (lo == hi) {
    out.push_back(acc);
    return;
  }
  // Build the block containing `lo` by extend-or-close choices over its
  // next member; every gap between chosen members partitions independently.
  std::vector<int> block{lo};
  auto rec = [&](auto&& self, std::vector<int> blk, int from) -> void {
    for (int c = from; c < hi; ++c) {
      std::vector<int> blk2 = blk;
      blk2.push_back(c);
      // The gap (blk.back(), c) must itself partition into full blocks;
      // enumerate those partitions, then either close blk2 or extend it.
      std::vector<std::vector<std::vector<int>>> gap_parts;
      {
        std::vector<std::vector<int>> tmp;
        partitions_rec(blk.back() + 1, c, tmp, gap_parts);
      }
      for (const auto& gp : gap_parts) {
        std::size_t base = acc.size();
        for (const auto& b : gp) acc.push_back(b);
        if (blk2.size() >= 2) {
          // close the block here; the tail [c+1, hi) partitions freely
          acc.push_back(blk2);
          std::vector<std::vector<std::vector<int>>> tails;
          {
            std::vector<std::vector<int>> tmp;
            partitions_rec(c + 1, hi, tmp, tails);
          }
          for (const auto& tp : tails) {
            std::size_t base2 = acc.size();
            for (const auto& b : tp) acc.push_back(b);
            out.push_back(acc);
            acc.resize(base2);
          }
          acc.pop_back();
        }
        // or extend the block past c
        self(self, blk2, c + 1);
        acc.resize(base);
      }
    }
  };
  rec(rec, block, lo + 1);
}

std::vector<std::vector<std::vector<int>>> noncrossing_partitions(int k) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> acc;
  partitions_rec(0, k, acc, out);
  return out;
}

// Glue one tree choice per block into a Topology.
void assemble(int k, const std::vector<std::vector<int>>& blocks,
              const std::vector<std::vector<Frag>>& choices, std::size_t bi,
              std::vector<const Frag*>& picked, std::vector<Topology>& out) {
  if (bi == blocks.size()) {
    Topology t;
    t.k = k;
    t.components = blocks;
    int base = 0;
    for (const Frag* f : picked) {
      for (auto [a, b] : f->edges) {
        auto mat = [&](int id) { return id < 0 ? k + base + (-1 - id) : id; };
        t.edges.emplace_back(mat(a), mat(b));
      }
      base += f->ninter;
    }
    t.interior_count = base;
    out.push_back(std::move(t));
    return;
  }
  for (const Frag& f : choices[bi]) {
    picked.push_back(&f);
    assemble(k, blocks, choices, bi + 1, picked, out);
    picked.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> Topology::adjacency() const {
  std::vector<std::vector<int>> adj(vertex_count());
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

std::vector<int> Topology::leaf_split(std::size_t e) const {
  if (e >= edges.size()) throw std::out_of_range("Topology::leaf_split");
  auto adj = adjacency();
  std::vector<char> seen(vertex_count(), 0);
  std::vector<int> stack{edges[e].first};
  seen[edges[e].first] = 1;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (int y : adj[x]) {
      if (seen[y]) continue;
      if (x == edges[e].first && y == edges[e].second) continue;
      seen[y] = 1;
      stack.push_back(y);
    }
  }
  std::vector<int> out;
  for (int l = 0; l < k; ++l) {
    if (seen[l]) out.push_back(l);
  }
  return out;
}

std::string Topology::signature() const {
  std::vector<std::string> parts;
  auto fmt = [](const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
  };
  for (const auto& b : components) parts.push_back("C[" + fmt(b) + "]");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::vector<int> s = leaf_split(e);
    // complement within the edge's component
    std::vector<int> comp;
    for (const auto& b : components) {
      std::vector<int> inter;
      std::set_intersection(b.begin(), b.end(), s.begin(), s.end(),
                            std::back_inserter(inter));
      if (!inter.empty()) {
        comp = b;
        break;
      }
    }
    std::vector<int> other;
    std::set_difference(comp.begin(), comp.end(), s.begin(), s.end(),
                        std::back_inserter(other));
    const std::vector<int>& pick =
        other.size() < s.size() || (other.size() == s.size() && other < s) ? other
                                                                           : s;
    parts.push_back("E[" + fmt(pick) + "]");
  }
  std::sort(parts.begin(), parts.end());
  std::string sig;
  for (const auto& p : parts) sig += p + ";";
  return sig;
}

void Topology::validate() const {
  if (k < 2) throw std::logic_error("topology: k < 2");
  auto adj = adjacency();
  for (int l = 0; l < k; ++l) {
    if (adj[l].size() != 1) throw std::logic_error("topology: leaf valence != 1");
  }
  for (int v = k; v < vertex_count(); ++v) {
    if (adj[v].size() != 3) {
      throw std::logic_error("topology: interior valence != 3");
    }
  }
  // Per-component counts and Euler relations.
  std::vector<char> leaf_used(k, 0);
  for (const auto& b : components) {
    if (b.size() < 2) throw std::logic_error("topology: block smaller than 2");
    for (int l : b) {
      if (l < 0 || l >= k || leaf_used[l]) {
        throw std::logic_error("topology: bad block leaf");
      }
      leaf_used[l] = 1;
    }
    // walk the component from its first leaf
    std::set<int> verts;
    std::vector<int> stack{b[0]};
    verts.insert(b[0]);
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : adj[x]) {
        if (verts.insert(y).second) stack.push_back(y);
      }
    }
    int m = 0, inner = 0;
    for (int v : verts) (v < k ? m : inner) += 1;
    if (m != static_cast<int>(b.size())) {
      throw std::logic_error("topology: component does not match its block");
    }
    if (inner != m - 2 && !(m == 2 && inner == 0)) {
      throw std::logic_error("topology: interior count != leaves - 2");
    }
    int e = 0;
    for (auto [a, bb] : edges) {
      if (verts.count(a)) ++e;
    }
    if (3 * inner + m != 2 * e || inner + m != e + 1) {
      throw std::logic_error("topology: Euler relations violated");
    }
  }
  for (int l = 0; l < k; ++l) {
    if (!leaf_used[l]) throw std::logic_error("topology: leaf not covered");
  }
  // Noncrossing: every edge split must be consecutive within its component's
  // block, and blocks must not interleave.
  auto arc_ok = [&](const std::vector<int>& side, const std::vector<int>& block) {
    if (side.empty() || side.size() == block.size()) return true;
    int m = static_cast<int>(block.size());
    std::set<int> in(side.begin(), side.end());
    int gaps = 0;
    for (int i = 0; i < m; ++i) {
      if (in.count(block[i]) && !in.count(block[(i + 1) % m])) ++gaps;
    }
    return gaps == 1;
  };
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::vector<int> s = leaf_split(e);
    for (const auto& b : components) {
      std::vector<int> inter;
      std::set_intersection(b.begin(), b.end(), s.begin(), s.end(),
                            std::back_inserter(inter));
      if (!inter.empty() && !arc_ok(inter, b)) {
        throw std::logic_error("topology: crossing edge split");
      }
    }
  }
  for (std::size_t i = 0; i < components.size(); ++i) {
    for (std::size_t j = i + 1; j < components.size(); ++j) {
      for (int a : components[i]) {
        for (int b : components[i]) {
          if (a >= b) continue;
          int cnt = 0;
          for (int c : components[j]) {
            if (a < c && c < b) ++cnt;
          }
          if (cnt != 0 && cnt != static_cast<int>(components[j].size())) {
            throw std::logic_error("topology: interleaving blocks");
          }
        }
      }
    }
  }
}

std::vector<Topology> enumerate_topologies(int k, TopologyMode mode) {
  if (k < 2) throw std::invalid_argument("enumerate_topologies: k < 2");
  if (mode == TopologyMode::connected && k < 3) {
    throw std::invalid_argument("enumerate_topologies: connected needs k >= 3");
  }
  if (mode == TopologyMode::matchings && k % 2 != 0) {
    throw std::invalid_argument("enumerate_topologies: matchings need even k");
  }

  std::vector<std::vector<std::vector<int>>> parts;
  if (mode == TopologyMode::connected) {
    std::vector<int> all(k);
    for (int i = 0; i < k; ++i) all[i] = i;
    parts.push_back({all});
  } else {
    for (auto& p : noncrossing_partitions(k)) {
      if (mode == TopologyMode::matchings) {
        bool ok = true;
        for (const auto& b : p) ok = ok && b.size() == 2;
        if (!ok) continue;
      }
      parts.push_back(std::move(p));
    }
  }

  std::vector<Topology> out;
  for (auto& blocks : parts) {
    std::sort(blocks.begin(), blocks.end());
    std::vector<std::vector<Frag>> choices;
    choices.reserve(blocks.size());
    for (const auto& b : blocks) choices.push_back(block_trees(b));
    std::vector<const Frag*> picked;
    assemble(k, blocks, choices, 0, picked, out);
  }
  for (auto& t : out) t.validate();
  std::sort(out.begin(), out.end(), [](const Topology& a, const Topology& b) {
    return a.signature() < b.signature();
  });
  return out;
}

}  // namespace steinerflow
