#include "steinerflow/steiner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "steinerflow/polyline.hpp"

namespace steinerflow {

namespace {

void check_boundary_angles(const std::vector<IdealPoint>& boundary) {
  int k = static_cast<int>(boundary.size());
  if (k < 2) throw std::invalid_argument("boundary needs at least two ideal points");
  double prev = 0.0;
  for (int i = 1; i < k; ++i) {
    double w = wrap_angle(boundary[i].angle - boundary[0].angle);
    if (w <= prev) {
      throw std::invalid_argument(
          "ideal points must have distinct angles labeled in cyclic order");
    }
    prev = w;
  }
}

}  // namespace

PolylineNet::PolylineNet(const Topology& topo, const std::vector<IdealPoint>& boundary,
                         double R, double ds, std::span<const Vec2> vertex_hint) {
  if (static_cast<int>(boundary.size()) != topo.k) {
    throw std::invalid_argument("PolylineNet: boundary size does not match topology");
  }
  if (!(R > 0.0) || !(ds > 0.0)) {
    throw std::invalid_argument("PolylineNet: R and ds must be positive");
  }
  k_ = topo.k;
  interior_ = topo.interior_count;
  R_ = R;
  nodes_.resize(static_cast<size_t>(k_) + interior_);
  for (int i = 0; i < k_; ++i) nodes_[i] = R * unit_vector(boundary[i].angle);

  if (!vertex_hint.empty()) {
    if (static_cast<int>(vertex_hint.size()) != interior_) {
      throw std::invalid_argument("PolylineNet: vertex hint size mismatch");
    }
    std::copy(vertex_hint.begin(), vertex_hint.end(), nodes_.begin() + k_);
  } else if (interior_ > 0) {
    // Graph Laplacian placement: every interior vertex at the mean of its
    // neighbors, leaves pinned (Gauss-Seidel; trees contract fast).
    auto adj = topo.adjacency();
    Vec2 c{};
    for (int i = 0; i < k_; ++i) c += nodes_[i];
    for (int v = 0; v < interior_; ++v) nodes_[static_cast<size_t>(k_) + v] = c / k_;
    for (int sweep = 0; sweep < 400; ++sweep) {
      for (int v = 0; v < interior_; ++v) {
        Vec2 s{};
        const auto& nb = adj[static_cast<size_t>(k_) + v];
        for (int u : nb) s += nodes_[u];
        nodes_[static_cast<size_t>(k_) + v] = s / static_cast<double>(nb.size());
      }
    }
  }

  chains_.resize(topo.edges.size());
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    auto [u, v] = topo.edges[e];
    Vec2 a = nodes_[u], b = nodes_[v];
    int inner = static_cast<int>(std::floor(distance(a, b) / ds));
    auto& chain = chains_[e];
    chain.push_back(u);
    for (int j = 1; j <= inner; ++j) {
      chain.push_back(static_cast<int>(nodes_.size()));
      nodes_.push_back(a + (b - a) * (static_cast<double>(j) / (inner + 1)));
    }
    chain.push_back(v);
  }
}

double PolylineNet::objective() const {
  double total = 0.0;
  for (const auto& chain : chains_) {
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
      Vec2 p = nodes_[chain[i]], q = nodes_[chain[i + 1]];
      total += length_weight(0.5 * (p + q)) * distance(p, q);
    }
  }
  return total;
}

std::vector<Vec2> PolylineNet::gradient() const {
  std::vector<Vec2> g(nodes_.size(), Vec2{});
  for (const auto& chain : chains_) {
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
      Vec2 p = nodes_[chain[i]], q = nodes_[chain[i + 1]];
      double len = distance(p, q);
      if (len == 0.0) continue;
      Vec2 mid = 0.5 * (p + q);
      double phi = length_weight(mid);
      // d/dP [phi(M) L] with M = (P+Q)/2: phi (L M / 2 + (P-Q)/L).
      Vec2 common = (0.5 * len) * mid;
      g[chain[i]] += phi * (common + (p - q) / len);
      g[chain[i + 1]] += phi * (common + (q - p) / len);
    }
  }
  for (int i = 0; i < k_; ++i) g[i] = Vec2{};
  return g;
}

int PolylineNet::descend(int max_iters, double step_tol) {
  double f = objective();
  int it = 0;
  std::vector<double> w(nodes_.size());
  std::vector<Vec2> d(nodes_.size());
  for (; it < max_iters; ++it) {
    auto g = gradient();
    // Diagonal stiffness estimate per node, so the step is well scaled
    // despite the e^{r^2/2} spread of the conformal weight.
    std::fill(w.begin(), w.end(), 0.0);
    for (const auto& chain : chains_) {
      for (size_t i = 0; i + 1 < chain.size(); ++i) {
        Vec2 p = nodes_[chain[i]], q = nodes_[chain[i + 1]];
        double len = distance(p, q);
        if (len == 0.0) continue;
        Vec2 mid = 0.5 * (p + q);
        double s = length_weight(mid) * (1.0 / len + 0.25 * len * (1.0 + mid.norm2()));
        w[chain[i]] += s;
        w[chain[i + 1]] += s;
      }
    }
    double sup = 0.0, slope = 0.0;
    for (size_t i = 0; i < nodes_.size(); ++i) {
      d[i] = pinned(static_cast<int>(i)) || w[i] == 0.0 ? Vec2{} : g[i] / w[i];
      sup = std::max(sup, d[i].norm());
      slope += dot(g[i], d[i]);
    }
    if (sup <= step_tol) break;
    auto saved = nodes_;
    double alpha = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 50; ++bt, alpha *= 0.5) {
      for (size_t i = 0; i < nodes_.size(); ++i) nodes_[i] = saved[i] - alpha * d[i];
      double fn = objective();
      if (fn <= f - 1e-4 * alpha * slope) {
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved) {
      nodes_ = saved;  // line search hit the roundoff floor
      break;
    }
  }
  return it;
}

namespace {

// Edge of the balance problem: endpoints are interior vertex indices, or
// fixed boundary points (finite anchors during R stages, ideal at the end).
struct EdgeSpec {
  int u = -1, v = -1;
  BoundaryPoint a{Vec2{}}, b{Vec2{}};
  ConnectScratch scratch;
  Vec2 tan_u{}, tan_v{};
  bool active() const { return u >= 0 || v >= 0; }
};

std::vector<EdgeSpec> make_specs(const Topology& topo,
                                 const std::vector<IdealPoint>& boundary,
                                 std::optional<double> R) {
  std::vector<EdgeSpec> specs(topo.edges.size());
  auto fixed = [&](int leaf) -> BoundaryPoint {
    if (R) return Vec2(*R * unit_vector(boundary[leaf].angle));
    return boundary[leaf];
  };
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    auto [p, q] = topo.edges[e];
    if (p < topo.k) specs[e].a = fixed(p); else specs[e].u = p - topo.k;
    if (q < topo.k) specs[e].b = fixed(q); else specs[e].v = q - topo.k;
  }
  return specs;
}

void eval_edge(EdgeSpec& e, const std::vector<Vec2>& verts, const GeodesicOptions& geo) {
  BoundaryPoint a = e.u >= 0 ? BoundaryPoint(verts[e.u]) : e.a;
  BoundaryPoint b = e.v >= 0 ? BoundaryPoint(verts[e.v]) : e.b;
  GeodesicArc arc = connect(a, b, geo, &e.scratch);
  if (e.u >= 0) e.tan_u = arc.inward_tangent(1);
  if (e.v >= 0) e.tan_v = arc.inward_tangent(2);
}

std::vector<Vec2> assemble_residual(const std::vector<EdgeSpec>& specs, int n) {
  std::vector<Vec2> f(n, Vec2{});
  for (const auto& e : specs) {
    if (e.u >= 0) f[e.u] += e.tan_u;
    if (e.v >= 0) f[e.v] += e.tan_v;
  }
  return f;
}

double sup_norm(const std::vector<Vec2>& f) {
  double m = 0.0;
  for (Vec2 v : f) m = std::max(m, v.norm());
  return m;
}

// In-place Gaussian elimination with partial pivoting (the balance systems
// have at most 2(k-2) unknowns).
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    }
    if (std::abs(a[piv * n + c]) <= 1e-13 * (1.0 + scale)) {
      throw std::runtime_error("balance Jacobian is singular");
    }
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(a[piv * n + j], a[c * n + j]);
      std::swap(b[piv], b[c]);
    }
    for (int r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / a[c * n + c];
      if (f == 0.0) continue;
      for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
      b[r] -= f * b[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < n; ++j) s -= a[r * n + j] * b[j];
    b[r] = s / a[r * n + r];
  }
  return b;
}

// Damped Newton on the per-vertex sum of inward unit tangents, with a
// finite-difference Jacobian that only re-evaluates the edges incident to
// the perturbed vertex.  Stops without throwing when the line search stalls
// or the budget runs out; callers gate on the achieved defect.
int newton_balance(std::vector<EdgeSpec>& specs, std::vector<Vec2>& verts,
                   const GeodesicOptions& geo, double tol, int max_iters) {
  int n = static_cast<int>(verts.size());
  if (n == 0) return 0;
  std::vector<std::vector<int>> incident(n);
  for (size_t e = 0; e < specs.size(); ++e) {
    if (specs[e].u >= 0) incident[specs[e].u].push_back(static_cast<int>(e));
    if (specs[e].v >= 0) incident[specs[e].v].push_back(static_cast<int>(e));
  }
  auto eval_all = [&]() {
    for (auto& e : specs)
      if (e.active()) eval_edge(e, verts, geo);
  };
  eval_all();
  double defect = sup_norm(assemble_residual(specs, n));

  int iters = 0;
  const int m = 2 * n;
  const double h = 1e-7;
  while (defect > tol) {
    if (++iters > max_iters) return iters;
    std::vector<double> jac(static_cast<size_t>(m) * m, 0.0);
    for (int vc = 0; vc < n; ++vc) {
      for (int cc = 0; cc < 2; ++cc) {
        std::vector<std::pair<Vec2, Vec2>> saved;
        for (int e : incident[vc]) saved.emplace_back(specs[e].tan_u, specs[e].tan_v);
        double* coord = cc == 0 ? &verts[vc].x : &verts[vc].y;
        double orig = *coord;
        *coord = orig + h;
        for (int e : incident[vc]) eval_edge(specs[e], verts, geo);
        auto fp = assemble_residual(specs, n);
        *coord = orig - h;
        for (int e : incident[vc]) eval_edge(specs[e], verts, geo);
        auto fm = assemble_residual(specs, n);
        *coord = orig;
        for (size_t i = 0; i < incident[vc].size(); ++i) {
          specs[incident[vc][i]].tan_u = saved[i].first;
          specs[incident[vc][i]].tan_v = saved[i].second;
        }
        int col = 2 * vc + cc;
        for (int r = 0; r < n; ++r) {
          jac[(2 * r) * m + col] = (fp[r].x - fm[r].x) / (2.0 * h);
          jac[(2 * r + 1) * m + col] = (fp[r].y - fm[r].y) / (2.0 * h);
        }
      }
    }
    auto res = assemble_residual(specs, n);
    std::vector<double> rhs(m);
    for (int r = 0; r < n; ++r) {
      rhs[2 * r] = -res[r].x;
      rhs[2 * r + 1] = -res[r].y;
    }
    std::vector<double> delta;
    try {
      delta = solve_dense(std::move(jac), std::move(rhs), m);
    } catch (const std::exception&) {
      return iters;  // singular system: leave the best vertices in place
    }

    auto base = verts;
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 14; ++bt, lambda *= 0.5) {
      for (int v = 0; v < n; ++v) {
        verts[v] = base[v] + lambda * Vec2{delta[2 * v], delta[2 * v + 1]};
      }
      bool fine = true;
      try {
        eval_all();
      } catch (const std::exception&) {
        fine = false;  // trial stepped into a collision or out of range
      }
      if (!fine) continue;
      double trial = sup_norm(assemble_residual(specs, n));
      if (trial < defect * (1.0 - 1e-4 * lambda)) {
        defect = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      verts = base;
      eval_all();
      return iters;
    }
  }
  return iters;
}

}  // namespace

std::vector<std::vector<Vec2>> Network::sampled_edges(double r_max, double max_ds) const {
  std::vector<std::vector<Vec2>> out;
  out.reserve(edge_arcs.size());
  for (const auto& arc : edge_arcs) out.push_back(arc.polyline(r_max, max_ds));
  return out;
}

Network relax(const Topology& topo, const std::vector<IdealPoint>& boundary,
              const RelaxOptions& opts) {
  topo.validate();
  if (static_cast<int>(boundary.size()) != topo.k) {
    throw std::invalid_argument("relax: boundary size does not match topology");
  }
  check_boundary_angles(boundary);
  if (opts.r_schedule.empty()) {
    throw std::invalid_argument("relax: empty R schedule");
  }

  Network net;
  net.topology = topo;
  net.boundary = boundary;
  net.diagnostics.descent_iterations = 0;
  net.diagnostics.newton_iterations = 0;

  GeodesicOptions fast = opts.geo;
  fast.record_samples = false;
  fast.compute_apex = false;
  GeodesicOptions full = opts.geo;
  full.record_samples = true;

  try {
    std::vector<Vec2> verts(topo.interior_count);
    if (topo.interior_count > 0) {
      bool have_verts = false;
      for (double R : opts.r_schedule) {
        if (R <= opts.descent_max_r || !have_verts) {
          PolylineNet pn(topo, boundary, std::min(R, opts.descent_max_r), opts.descent_ds,
                         have_verts ? std::span<const Vec2>(verts)
                                    : std::span<const Vec2>());
          net.diagnostics.descent_iterations +=
              pn.descend(opts.descent_max_iters, opts.descent_step_tol);
          for (int v = 0; v < topo.interior_count; ++v) verts[v] = pn.vertex(v);
          have_verts = true;
        }
        auto specs = make_specs(topo, boundary, R);
        net.diagnostics.newton_iterations += newton_balance(
            specs, verts, fast, opts.newton_tol, opts.newton_max_iters);
        net.diagnostics.stage_vertices.emplace_back(R, verts);
      }
      auto specs = make_specs(topo, boundary, std::nullopt);
      net.diagnostics.newton_iterations +=
          newton_balance(specs, verts, fast, opts.newton_tol, opts.newton_max_iters);
      net.diagnostics.stage_vertices.emplace_back(
          std::numeric_limits<double>::infinity(), verts);
      for (auto& v : verts) {
        if (v.norm() < 1e-10) v = Vec2{};
      }
    }
    net.vertex_positions = verts;

    net.edge_arcs.clear();
    net.edge_arcs.reserve(topo.edges.size());
    for (auto [p, q] : topo.edges) {
      auto endpoint = [&](int id) -> BoundaryPoint {
        if (id < topo.k) return boundary[id];
        return verts[id - topo.k];
      };
      net.edge_arcs.push_back(connect(endpoint(p), endpoint(q), full));
    }

    auto defects = balance_defect(net);
    net.diagnostics.max_balance_defect =
        defects.empty() ? 0.0 : *std::max_element(defects.begin(), defects.end());

    std::vector<std::vector<Vec2>> tangents(topo.interior_count);
    for (size_t e = 0; e < topo.edges.size(); ++e) {
      auto [p, q] = topo.edges[e];
      if (p >= topo.k) tangents[p - topo.k].push_back(net.edge_arcs[e].inward_tangent(1));
      if (q >= topo.k) tangents[q - topo.k].push_back(net.edge_arcs[e].inward_tangent(2));
    }
    net.diagnostics.max_tangent_dot = -1.0;
    for (const auto& tv : tangents) {
      for (size_t i = 0; i < tv.size(); ++i)
        for (size_t j = i + 1; j < tv.size(); ++j)
          net.diagnostics.max_tangent_dot =
              std::max(net.diagnostics.max_tangent_dot, dot(tv[i], tv[j]));
    }

    net.diagnostics.min_vertex_gap = std::numeric_limits<double>::infinity();
    int collide_a = -1, collide_b = -1;
    for (int i = 0; i < topo.interior_count; ++i) {
      for (int j = i + 1; j < topo.interior_count; ++j) {
        double gap = distance(verts[i], verts[j]);
        if (gap < net.diagnostics.min_vertex_gap) {
          net.diagnostics.min_vertex_gap = gap;
          collide_a = i;
          collide_b = j;
        }
      }
    }

    net.diagnostics.embedded =
        !polylines_cross(net.sampled_edges(opts.truncation_radius, 0.02));
    net.diagnostics.hull_ok = hull_check(net, opts.geo);

    net.total_truncated_length = 0.0;
    for (const auto& arc : net.edge_arcs) {
      net.total_truncated_length += arc.truncated_g_length(opts.truncation_radius);
    }

    std::ostringstream why;
    if (net.diagnostics.max_balance_defect > opts.regular_defect_tol) {
      why << "balance defect " << net.diagnostics.max_balance_defect
          << " exceeds tolerance";
    } else if (net.diagnostics.min_vertex_gap < opts.collision_tol) {
      why << "interior vertices " << collide_a << " and " << collide_b
          << " collide (gap " << net.diagnostics.min_vertex_gap << ")";
    } else if (!net.diagnostics.embedded) {
      why << "edges cross";
    } else if (!net.diagnostics.hull_ok) {
      why << "network leaves the ideal boundary hull";
    }
    if (why.str().empty()) {
      net.status = NetworkStatus::regular;
    } else {
      net.status = NetworkStatus::failed;
      net.diagnostics.message = why.str();
    }
  } catch (const std::exception& err) {
    net.status = NetworkStatus::failed;
    net.diagnostics.message = err.what();
  }
  return net;
}

std::vector<double> balance_defect(const Network& net) {
  if (net.edge_arcs.size() != net.topology.edges.size()) {
    throw std::logic_error("balance_defect: edge arcs not computed");
  }
  std::vector<Vec2> sums(net.topology.interior_count, Vec2{});
  for (size_t e = 0; e < net.topology.edges.size(); ++e) {
    auto [p, q] = net.topology.edges[e];
    if (p >= net.topology.k) sums[p - net.topology.k] += net.edge_arcs[e].inward_tangent(1);
    if (q >= net.topology.k) sums[q - net.topology.k] += net.edge_arcs[e].inward_tangent(2);
  }
  std::vector<double> out(sums.size());
  for (size_t i = 0; i < sums.size(); ++i) out[i] = sums[i].norm();
  return out;
}

double balance_defect(std::span<const Vec2> unit_tangents) {
  Vec2 s{};
  for (Vec2 t : unit_tangents) s += t;
  return s.norm();
}

bool hull_check(const Network& net, const GeodesicOptions& geo) {
  if (net.status == NetworkStatus::failed) {
    throw std::invalid_argument("hull_check: network marked failed");
  }
  int k = static_cast<int>(net.boundary.size());
  if (k < 3) return true;  // two ideal points: the hull is the geodesic itself

  GeodesicOptions full = geo;
  full.record_samples = true;

  struct HullSide {
    GeodesicArc arc;
    bool inner_far = false;  // graph arcs: inner side is {r > r_arc(theta)}
    double line_sign = 0.0;  // origin lines: sign of cross(dir, inner point)
  };
  std::vector<HullSide> sides;
  sides.reserve(k);
  for (int i = 0; i < k; ++i) {
    HullSide side;
    side.arc = connect(net.boundary[i], net.boundary[(i + 1) % k], full);
    int ref = 0;
    while (ref == i || ref == (i + 1) % k) ++ref;
    double beta = net.boundary[ref].angle;
    if (side.arc.kind == ArcKind::origin_line) {
      side.line_sign = cross(side.arc.line_dir, unit_vector(beta)) > 0.0 ? 1.0 : -1.0;
    } else {
      double half_width = 0.5 * (side.arc.asym_high - side.arc.asym_low);
      side.inner_far = std::abs(angle_diff(beta, side.arc.apex_theta)) < half_width;
    }
    sides.push_back(std::move(side));
  }

  const double slack = 1e-6;  // boundary contact counts as inside
  // Arcs approach their asymptotes at the e^{-r^2/2} rate, so an edge tail
  // sharing an ideal point with a hull side sits within round-off of the
  // side's sector edge in angle, where the radial comparison amplifies that
  // jitter into an O(1) difference.  Angular offsets inside this band are
  // contact along the shared ideal point, not a violation.
  const double ang_slack = 1e-8;
  auto inside = [&](Vec2 q) {
    for (const auto& side : sides) {
      if (side.arc.kind == ArcKind::origin_line) {
        double s = cross(side.arc.line_dir, q);
        if (s * side.line_sign < -slack * (1.0 + q.norm())) return false;
        continue;
      }
      double half_width = 0.5 * (side.arc.asym_high - side.arc.asym_low);
      double rel = angle_diff(q.angle(), side.arc.apex_theta);
      bool far = false;
      if (std::abs(rel) < half_width - ang_slack) {
        double r_arc = side.arc.eval_r_lb(side.arc.apex_theta + rel);
        if (std::abs(q.norm() - r_arc) <= slack * (1.0 + r_arc)) continue;
        far = q.norm() > r_arc;
      }
      if (far != side.inner_far) return false;
    }
    return true;
  };

  for (Vec2 v : net.vertex_positions) {
    if (!inside(v)) return false;
  }
  // Edge samples, truncated below the sampled span of the hull arcs so the
  // near-ideal tails (which hug the hull asymptotes) stay classifiable.
  for (const auto& poly : net.sampled_edges(8.0, 0.02)) {
    for (Vec2 q : poly) {
      if (!inside(q)) return false;
    }
  }
  return true;
}

std::vector<Network> solve_expander(const std::vector<IdealPoint>& boundary,
                                    TopologyMode mode, const RelaxOptions& opts) {
  check_boundary_angles(boundary);
  auto topologies = enumerate_topologies(static_cast<int>(boundary.size()), mode);
  std::vector<Network> regular;
  for (const auto& topo : topologies) {
    Network net = relax(topo, boundary, opts);
    if (net.status == NetworkStatus::regular) regular.push_back(std::move(net));
  }
  // Geometric deduplication, keeping the first in canonical topology order.
  std::vector<std::vector<std::vector<Vec2>>> samples;
  samples.reserve(regular.size());
  for (const auto& net : regular) {
    samples.push_back(net.sampled_edges(opts.truncation_radius, 5e-3));
  }
  std::vector<Network> out;
  std::vector<size_t> kept;
  for (size_t i = 0; i < regular.size(); ++i) {
    bool duplicate = false;
    for (size_t j : kept) {
      if (hausdorff_distance(samples[i], samples[j]) <= opts.dedup_hausdorff) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      kept.push_back(i);
      out.push_back(std::move(regular[i]));
    }
  }
  return out;
}

}  // namespace steinerflow
