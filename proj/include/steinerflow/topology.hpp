#ifndef STEINERFLOW_TOPOLOGY_HPP_
#define STEINERFLOW_TOPOLOGY_HPP_

// Combinatorial types of noncrossing trivalent networks on k cyclically
// ordered boundary slots.
//
// A Topology is an abstract forest: every boundary slot (leaf) has valence 1,
// every interior vertex valence 3, and each connected component spans a block
// of the leaf set.  Components and edges never cross when drawn in the disc
// with the leaves on the circle in their cyclic order.  Vertices are numbered
// with leaves first (0..k-1) and interior vertices after (k..k+interior-1).

#include <string>
#include <utility>
#include <vector>

namespace steinerflow {

enum class TopologyMode { connected, matchings, forests };

struct Topology {
  int k = 0;               // number of boundary leaves
  int interior_count = 0;  // interior vertices use ids k .. k+interior_count-1
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> components;  // partition of {0..k-1}, blocks sorted

  int vertex_count() const { return k + interior_count; }

  // Neighbor lists indexed by vertex id.
  std::vector<std::vector<int>> adjacency() const;

  // Leaves on the side of edges[e] containing edges[e].first.
  std::vector<int> leaf_split(std::size_t e) const;

  // Canonical text form: the component blocks plus every edge's leaf split,
  // sorted.  Two topologies are abstractly isomorphic (fixing the leaf
  // labels) iff their signatures match.
  std::string signature() const;

  // Throws std::logic_error if any structural invariant fails: valences,
  // per-component vertex/edge counts, or the noncrossing embedding.
  void validate() const;
};

// All noncrossing topologies of the requested mode, deduplicated and sorted
// by signature.  connected: a single tree spanning all k leaves (k >= 3).
// matchings: k/2 disjoint boundary-to-boundary edges (k even).  forests:
// every noncrossing partition into blocks of >= 2 leaves, a tree per block
// (this includes the other two modes' results).
std::vector<Topology> enumerate_topologies(int k, TopologyMode mode);

}  // namespace steinerflow

#endif  // STEINERFLOW_TOPOLOGY_HPP_
