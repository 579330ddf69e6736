#include "steinerflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>

#include "steinerflow/polyline.hpp"

namespace steinerflow {

namespace {

double scale_at(double t) { return std::sqrt(2.0 * t); }

void require_regular(const Network& net, const char* who) {
  if (net.status != NetworkStatus::regular) {
    throw std::invalid_argument(std::string(who) + ": network must be regular");
  }
}

}  // namespace

FlowFrame evolve(const Network& base, double t, const FlowSampling& sampling) {
  if (!(t > 0.0)) throw std::invalid_argument("evolve: time must be positive");
  require_regular(base, "evolve");
  FlowFrame frame;
  frame.t = t;
  frame.lambda = scale_at(t);
  frame.vertex_positions = base.vertex_positions;
  for (Vec2& v : frame.vertex_positions) v *= frame.lambda;
  frame.edges = base.sampled_edges(sampling.r_max, sampling.max_ds);
  for (auto& edge : frame.edges) {
    for (Vec2& p : edge) p *= frame.lambda;
  }
  return frame;
}

std::vector<VertexTrajectory> vertex_trajectories(const Network& base) {
  require_regular(base, "vertex_trajectories");
  std::vector<VertexTrajectory> out;
  out.reserve(base.vertex_positions.size());
  for (Vec2 q : base.vertex_positions) out.push_back({q});
  return out;
}

std::vector<double> tangent_cone_at_infinity(const Network& net) {
  require_regular(net, "tangent_cone_at_infinity");
  std::vector<double> angles;
  for (const GeodesicArc& arc : net.edge_arcs) {
    if (arc.kind == ArcKind::origin_line) {
      // Traversal runs in increasing line parameter from end 1 to end 2.
      if (arc.end2.ideal) angles.push_back(wrap_angle(arc.line_dir.angle()));
      if (arc.end1.ideal) angles.push_back(wrap_angle((-arc.line_dir).angle()));
      continue;
    }
    if (!arc.end1.ideal && !arc.end2.ideal) continue;
    if (!(arc.asym_bound > 0.0) || arc.asym_bound > 1e-8) {
      throw std::runtime_error(
          "tangent_cone_at_infinity: unbounded edge without converged asymptote");
    }
    if (arc.end1.ideal) angles.push_back(wrap_angle(arc.end1_low ? arc.asym_low : arc.asym_high));
    if (arc.end2.ideal) angles.push_back(wrap_angle(arc.end1_low ? arc.asym_high : arc.asym_low));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

WorldSheet make_world_sheet(Network base, std::vector<double> times) {
  require_regular(base, "make_world_sheet");
  if (times.empty()) throw std::invalid_argument("make_world_sheet: empty time grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("make_world_sheet: times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("make_world_sheet: times must be ascending");
    }
  }
  return {std::move(base), std::move(times)};
}

BlowupChart blowup_lift(const WorldSheet& sheet, const FlowSampling& sampling) {
  require_regular(sheet.base, "blowup_lift");
  BlowupChart chart;
  chart.face_f = sheet.base.sampled_edges(sampling.r_max, sampling.max_ds);
  for (double t : sheet.times) {
    FlowFrame frame = evolve(sheet.base, t, sampling);
    double inv = 1.0 / frame.lambda;
    for (std::size_t e = 0; e < frame.edges.size(); ++e) {
      const auto& ref = chart.face_f[e];
      const auto& cur = frame.edges[e];
      for (std::size_t i = 0; i < cur.size() && i < ref.size(); ++i) {
        chart.f_drift = std::max(chart.f_drift, distance(cur[i] * inv, ref[i]));
      }
    }
  }
  for (const IdealPoint& b : sheet.base.boundary) {
    Vec2 u = unit_vector(b.angle);
    std::vector<Vec2> ray;
    long n = std::max(1L, std::lround(std::ceil(sampling.r_max / 0.05)));
    for (long j = 0; j <= n; ++j) {
      ray.push_back((sampling.r_max * static_cast<double>(j) / static_cast<double>(n)) * u);
    }
    chart.face_t.push_back(std::move(ray));
    chart.corner_angles.push_back(wrap_angle(b.angle));
  }
  return chart;
}

namespace detail {

Vec2 discrete_curvature(Vec2 a, Vec2 b, Vec2 c) {
  Vec2 back = b - a;
  Vec2 fwd = c - b;
  double db = back.norm();
  double df = fwd.norm();
  return 2.0 / (db + df) * (fwd / df - back / db);
}

}  // namespace detail

namespace {

// Node mesh of a network: a flat node array partitioned into chains (one
// per edge), sharing junction nodes, with the far ends of unbounded edges
// marked for pinning.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::vector<int>> chains;    // node ids, traversal order
  std::vector<int> junction_nodes;         // node id per interior vertex
  std::vector<std::pair<int, Vec2>> pins;  // node id, position at t = 1/2
  // Per junction: the chain-interior neighbor nodes used for the
  // zero-tangent-sum relocation.
  std::vector<std::vector<int>> junction_neighbors;
};

Mesh build_mesh(const Network& base, double h, double r_max) {
  Mesh mesh;
  const auto& verts = base.vertex_positions;
  for (std::size_t v = 0; v < verts.size(); ++v) {
    mesh.junction_nodes.push_back(static_cast<int>(mesh.nodes.size()));
    mesh.nodes.push_back(verts[v]);
  }
  mesh.junction_neighbors.assign(verts.size(), {});

  auto junction_of = [&](Vec2 p) -> int {
    for (std::size_t v = 0; v < verts.size(); ++v) {
      if (distance(p, verts[v]) <= 1e-9 * (1.0 + verts[v].norm())) {
        return static_cast<int>(v);
      }
    }
    return -1;
  };

  for (const GeodesicArc& arc : base.edge_arcs) {
    std::vector<Vec2> poly = resample(arc.polyline(r_max, h), h);
    if (poly.size() < 2) continue;
    std::vector<int> chain;
    chain.reserve(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
      bool is_end = (i == 0 || i + 1 == poly.size());
      int junction = is_end ? junction_of(poly[i]) : -1;
      if (junction >= 0) {
        chain.push_back(mesh.junction_nodes[junction]);
      } else {
        chain.push_back(static_cast<int>(mesh.nodes.size()));
        mesh.nodes.push_back(poly[i]);
        if (is_end) mesh.pins.emplace_back(chain.back(), poly[i]);
      }
    }
    for (std::size_t v = 0; v < verts.size(); ++v) {
      if (chain.front() == mesh.junction_nodes[v] && chain.size() > 1) {
        mesh.junction_neighbors[v].push_back(chain[1]);
      }
      if (chain.back() == mesh.junction_nodes[v] && chain.size() > 1) {
        mesh.junction_neighbors[v].push_back(chain[chain.size() - 2]);
      }
    }
    mesh.chains.push_back(std::move(chain));
  }
  return mesh;
}

double min_spacing(const std::vector<Vec2>& nodes,
                   const std::vector<std::vector<int>>& chains, bool closed) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& chain : chains) {
    std::size_t n = chain.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      d = std::min(d, distance(nodes[chain[i]], nodes[chain[i + 1]]));
    }
    if (closed && n > 2) d = std::min(d, distance(nodes[chain[n - 1]], nodes[chain[0]]));
  }
  return d;
}

[[noreturn]] void throw_unstable() {
  throw std::runtime_error(
      "front tracking: explicit step exceeded the local spacing (CFL violation)");
}

// One explicit Euler step of node velocities = discrete curvature vector.
// Interior chain nodes only; endpoints (junctions, pins, or for closed
// chains nobody) are handled by the caller.  Throws when a step is larger
// than the local spacing or produces a non-finite position.
void curvature_step(const std::vector<Vec2>& nodes,
                    const std::vector<std::vector<int>>& chains, bool closed,
                    double dt, std::vector<Vec2>& next) {
  next = nodes;
  for (const auto& chain : chains) {
    std::size_t n = chain.size();
    if (n < 3 && !closed) continue;
    std::size_t begin = closed ? 0 : 1;
    std::size_t end = closed ? n : n - 1;
    for (std::size_t i = begin; i < end; ++i) {
      Vec2 a = nodes[chain[(i + n - 1) % n]];
      Vec2 b = nodes[chain[i]];
      Vec2 c = nodes[chain[(i + 1) % n]];
      Vec2 step = dt * detail::discrete_curvature(a, b, c);
      double local = std::min(distance(a, b), distance(b, c));
      if (!std::isfinite(step.x) || !std::isfinite(step.y) || step.norm() > local) {
        throw_unstable();
      }
      next[chain[i]] = b + step;
    }
  }
}

// Tangential Jacobi pass: each interior node moves along the chain tangent
// toward the arclength midpoint of its neighbors.  Pure tangential motion
// leaves the curve unchanged to first order, so the pass equidistributes
// the nodes without disturbing the normal dynamics.
void redistribute(std::vector<Vec2>& nodes,
                  const std::vector<std::vector<int>>& chains, bool closed,
                  double theta) {
  std::vector<Vec2> shifted = nodes;
  for (const auto& chain : chains) {
    std::size_t n = chain.size();
    if (n < 3 && !closed) continue;
    std::size_t begin = closed ? 0 : 1;
    std::size_t end = closed ? n : n - 1;
    for (std::size_t i = begin; i < end; ++i) {
      Vec2 a = nodes[chain[(i + n - 1) % n]];
      Vec2 b = nodes[chain[i]];
      Vec2 c = nodes[chain[(i + 1) % n]];
      Vec2 t = c - a;
      double tn = t.norm();
      if (!(tn > 0.0)) continue;
      t = t / tn;
      shifted[chain[i]] = b + theta * dot(0.5 * (a + c) - b, t) * t;
    }
  }
  nodes = std::move(shifted);
}

// One Newton step of the zero-tangent-sum condition for each junction,
// with chain tangents taken toward the first interior node of every
// incident chain.
void project_junctions(const Mesh& mesh, std::vector<Vec2>& nodes) {
  for (std::size_t v = 0; v < mesh.junction_nodes.size(); ++v) {
    const auto& nbrs = mesh.junction_neighbors[v];
    if (nbrs.size() < 2) continue;
    int node = mesh.junction_nodes[v];
    Vec2 q = nodes[node];
    Vec2 f{};
    double jxx = 0.0, jxy = 0.0, jyy = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (int nb : nbrs) {
      Vec2 d = nodes[nb] - q;
      double dn = d.norm();
      if (!(dn > 0.0)) continue;
      Vec2 u = d / dn;
      f += u;
      // d/dq of (p - q)/|p - q| is (u u^T - I)/|p - q|.
      jxx += (u.x * u.x - 1.0) / dn;
      jxy += (u.x * u.y) / dn;
      jyy += (u.y * u.y - 1.0) / dn;
      dmin = std::min(dmin, dn);
    }
    double det = jxx * jyy - jxy * jxy;
    if (!(std::abs(det) > 1e-300)) continue;
    Vec2 delta{(jyy * f.x - jxy * f.y) / det, (-jxy * f.x + jxx * f.y) / det};
    double dn = delta.norm();
    if (dn > 0.5 * dmin) delta *= 0.5 * dmin / dn;  // keep the relocation local
    nodes[node] = q - delta;
  }
}

}  // namespace

FlowDeviationReport direct_flow_check(const Network& base, double t_end,
                                      const FlowCheckOptions& opts) {
  require_regular(base, "direct_flow_check");
  if (!(t_end > 0.5)) throw std::invalid_argument("direct_flow_check: need t_end > 1/2");
  if (!(opts.h > 0.0) || !(opts.cfl > 0.0) || !(opts.r_max > 0.0) ||
      opts.report_times < 2 || !(opts.theta >= 0.0 && opts.theta <= 1.0)) {
    throw std::invalid_argument("direct_flow_check: bad options");
  }

  Mesh mesh = build_mesh(base, opts.h, opts.r_max);
  if (mesh.chains.empty()) throw std::invalid_argument("direct_flow_check: empty network");

  FlowSampling ref_sampling{opts.r_max, std::min(5e-3, opts.h / 4.0)};
  FlowDeviationReport report;
  auto chain_polylines = [&](const std::vector<Vec2>& nodes) {
    std::vector<std::vector<Vec2>> polys;
    polys.reserve(mesh.chains.size());
    for (const auto& chain : mesh.chains) {
      std::vector<Vec2> p;
      p.reserve(chain.size());
      for (int id : chain) p.push_back(nodes[id]);
      polys.push_back(std::move(p));
    }
    return polys;
  };
  auto record = [&](double t, const std::vector<Vec2>& nodes) {
    FlowFrame frame = evolve(base, t, ref_sampling);
    auto polys = chain_polylines(nodes);
    double dev = hausdorff_distance(polys, frame.edges) / frame.lambda;
    report.times.push_back(t);
    report.deviation.push_back(dev);
    std::vector<Vec2> vp;
    for (int id : mesh.junction_nodes) vp.push_back(nodes[id]);
    report.vertex_positions.push_back(std::move(vp));
    report.max_deviation = std::max(report.max_deviation, dev);
  };

  double t = 0.5;
  int next_report = 0;
  auto report_time = [&](int i) {
    return 0.5 + (t_end - 0.5) * static_cast<double>(i) /
                     static_cast<double>(opts.report_times - 1);
  };
  record(t, mesh.nodes);
  ++next_report;

  std::vector<Vec2> next;
  while (t < t_end) {
    double dmin = min_spacing(mesh.nodes, mesh.chains, false);
    if (!(dmin > 0.0) || !std::isfinite(dmin)) throw_unstable();
    double dt = opts.cfl * dmin * dmin;
    double t_stop = report_time(next_report);
    dt = std::min(dt, t_stop - t);
    curvature_step(mesh.nodes, mesh.chains, false, dt, next);
    double tn = t + dt;
    for (const auto& [node, base_pos] : mesh.pins) next[node] = scale_at(tn) * base_pos;
    project_junctions(mesh, next);
    redistribute(next, mesh.chains, false, opts.theta);
    mesh.nodes.swap(next);
    t = tn;
    if (t >= t_stop - 1e-15) {
      record(t_stop, mesh.nodes);
      ++next_report;
      if (next_report >= opts.report_times) break;
    }
  }
  report.final_mesh = chain_polylines(mesh.nodes);
  return report;
}

std::vector<Vec2> flow_closed_curve(std::vector<Vec2> nodes, double duration,
                                    const FlowCheckOptions& opts) {
  if (nodes.size() < 4) throw std::invalid_argument("flow_closed_curve: too few nodes");
  if (!(duration > 0.0)) throw std::invalid_argument("flow_closed_curve: bad duration");
  std::vector<std::vector<int>> chains(1);
  for (std::size_t i = 0; i < nodes.size(); ++i) chains[0].push_back(static_cast<int>(i));
  double t = 0.0;
  std::vector<Vec2> next;
  while (t < duration) {
    double dmin = min_spacing(nodes, chains, true);
    if (!(dmin > 0.0) || !std::isfinite(dmin)) throw_unstable();
    double dt = std::min(opts.cfl * dmin * dmin, duration - t);
    curvature_step(nodes, chains, true, dt, next);
    redistribute(next, chains, true, opts.theta);
    nodes.swap(next);
    t += dt;
  }
  return nodes;
}

}  // namespace steinerflow
