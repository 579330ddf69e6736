#ifndef STEINERFLOW_STEINER_HPP_
#define STEINERFLOW_STEINER_HPP_

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "steinerflow/geodesics.hpp"
#include "steinerflow/geometry.hpp"
#include "steinerflow/topology.hpp"
#include "steinerflow/vec2.hpp"

namespace steinerflow {

enum class NetworkStatus { candidate, regular, failed };

struct NetworkDiagnostics {
  double max_balance_defect = std::numeric_limits<double>::infinity();
  // Largest pairwise dot product of inward unit tangents at a junction
  // (-1/2 exactly for balanced trivalent vertices).
  double max_tangent_dot = -1.0;
  double min_vertex_gap = std::numeric_limits<double>::infinity();
  bool embedded = false;
  bool hull_ok = false;
  int descent_iterations = 0;
  int newton_iterations = 0;
  // Interior vertex positions after the balance polish at each truncation
  // radius of the schedule; the final ideal-anchor solve is recorded with
  // R = infinity.
  std::vector<std::pair<double, std::vector<Vec2>>> stage_vertices;
  std::string message;  // failure reason when status == failed
};

struct Network {
  Topology topology;
  std::vector<IdealPoint> boundary;
  std::vector<Vec2> vertex_positions;  // per interior vertex, topology order
  std::vector<GeodesicArc> edge_arcs;  // per topology edge, arg order = edge order
  NetworkStatus status = NetworkStatus::candidate;
  NetworkDiagnostics diagnostics;
  double total_truncated_length = 0.0;

  // Edge polylines truncated to |p| <= r_max, for rendering and the
  // embeddedness / Hausdorff checks.
  std::vector<std::vector<Vec2>> sampled_edges(double r_max, double max_ds) const;
};

struct RelaxOptions {
  std::vector<double> r_schedule{4.0, 6.0, 8.0, 12.0};
  // Polyline descent runs at schedule radii up to this; beyond it the
  // objective's conformal weight (about e^{R^2/2}) makes first-order steps
  // useless and the Newton balance polish takes over alone.
  double descent_max_r = 6.0;
  double descent_ds = 0.25;  // node spacing of the discrete network
  int descent_max_iters = 2000;
  double descent_step_tol = 1e-10;  // sup norm of the preconditioned step
  double newton_tol = 1e-10;        // balance defect target (sup norm)
  int newton_max_iters = 60;
  double regular_defect_tol = 1e-8;  // defect gate for status = regular
  double collision_tol = 1e-3;       // min allowed interior vertex gap
  double truncation_radius = 12.0;
  double dedup_hausdorff = 1e-4;
  GeodesicOptions geo{};
};

// Discrete network used by the R-continuation descent: leaf nodes pinned at
// the anchors R*unit(beta_i), every other node free.  Exposed so the exact
// first-variation gradient can be validated against finite differences of
// objective().
class PolylineNet {
 public:
  // vertex_hint warm-starts the interior vertices (otherwise a graph
  // Laplacian solve places them); edge chains start as straight runs.
  PolylineNet(const Topology& topo, const std::vector<IdealPoint>& boundary,
              double R, double ds, std::span<const Vec2> vertex_hint = {});

  double objective() const;  // total discrete g-length
  // d objective / d node, exact; zero at pinned nodes.
  std::vector<Vec2> gradient() const;

  std::vector<Vec2>& nodes() { return nodes_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  bool pinned(int node) const { return node < k_; }
  int vertex_node(int vertex) const { return k_ + vertex; }
  Vec2 vertex(int v) const { return nodes_[static_cast<size_t>(k_) + v]; }
  int interior_count() const { return interior_; }
  double anchor_radius() const { return R_; }
  const std::vector<std::vector<int>>& chains() const { return chains_; }

  // Diagonally preconditioned gradient descent with a backtracking line
  // search (monotone in the objective).  Returns iterations used.
  int descend(int max_iters, double step_tol);

 private:
  int k_ = 0;
  int interior_ = 0;
  double R_ = 0.0;
  std::vector<Vec2> nodes_;               // [0,k) anchors, [k,k+l) vertices, rest chain nodes
  std::vector<std::vector<int>> chains_;  // per edge: node ids from edge.first to edge.second
};

// R-continuation relaxation of one topology: descent on the discrete
// network at small R, Newton balance polish through the schedule, final
// solve with true ideal anchors, then exact geodesic arcs via connect.
// Throws std::invalid_argument for malformed input (wrong boundary size,
// repeated angles, labels out of cyclic order); solver failures are
// reported through status = failed, never thrown.
Network relax(const Topology& topo, const std::vector<IdealPoint>& boundary,
              const RelaxOptions& opts = {});

// ||sum of inward unit tangents|| at each interior vertex, topology order.
std::vector<double> balance_defect(const Network& net);
double balance_defect(std::span<const Vec2> unit_tangents);

// True iff every interior vertex and every edge sample lies on the inner
// side of each of the k hull geodesics joining adjacent ideal points
// (boundary contact counts as inside).
bool hull_check(const Network& net, const GeodesicOptions& geo = {});

// Relaxes every topology of the mode, keeps the regular embedded ones,
// deduplicates geometric coincidences, and returns them in canonical
// topology order.  Per-topology failures are skipped, not fatal.
std::vector<Network> solve_expander(const std::vector<IdealPoint>& boundary,
                                    TopologyMode mode, const RelaxOptions& opts = {});

}  // namespace steinerflow

#endif  // STEINERFLOW_STEINER_HPP_
