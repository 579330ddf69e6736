#include "steinerflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "steinerflow/polyline.hpp"

namespace steinerflow {

namespace {

using Json = nlohmann::ordered_json;

const char* mode_name(TopologyMode mode) {
  switch (mode) {
    case TopologyMode::connected: return "connected";
    case TopologyMode::matchings: return "matchings";
    case TopologyMode::forests: return "forests";
  }
  return "connected";
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Fixed-decimal SVG coordinate (deterministic, locale-independent).
std::string px(double v) {
  char buf[32];
  if (v == 0.0) v = 0.0;  // collapse negative zero
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Truncation/sampling used by the verification block; fixed so that save
// and load recompute identical values regardless of solver options.
constexpr double kVerifyRadius = 8.0;
constexpr double kVerifyDs = 0.02;

struct Verification {
  int vertex_count = 0;
  double max_soliton_residual = 0.0;
  double max_balance_defect = 0.0;
  bool embedded = false;
  bool hull_ok = false;
};

Verification compute_verification(const Network& net) {
  Verification v;
  v.vertex_count = static_cast<int>(net.vertex_positions.size());
  for (const GeodesicArc& arc : net.edge_arcs) {
    v.max_soliton_residual = std::max(v.max_soliton_residual, arc.max_soliton_residual());
  }
  for (double d : balance_defect(net)) v.max_balance_defect = std::max(v.max_balance_defect, d);
  v.embedded = !polylines_cross(net.sampled_edges(kVerifyRadius, kVerifyDs));
  v.hull_ok = hull_check(net);
  return v;
}

Json endpoint_json(const ArcEndpoint& e) {
  Json j;
  j["ideal"] = e.ideal;
  if (e.ideal) {
    j["angle"] = e.angle;
  } else {
    j["point"] = {e.point.x, e.point.y};
  }
  return j;
}

ArcEndpoint endpoint_from_json(const Json& j) {
  ArcEndpoint e;
  e.ideal = j.at("ideal").get<bool>();
  if (e.ideal) {
    e.angle = j.at("angle").get<double>();
  } else {
    e.point = {j.at("point").at(0).get<double>(), j.at("point").at(1).get<double>()};
  }
  return e;
}

Json arc_json(const GeodesicArc& arc) {
  Json j;
  j["kind"] = arc.kind == ArcKind::origin_line ? "origin_line" : "graph";
  j["end1"] = endpoint_json(arc.end1);
  j["end2"] = endpoint_json(arc.end2);
  if (arc.kind == ArcKind::origin_line) {
    j["anchor"] = {arc.line_anchor.x, arc.line_anchor.y};
    j["dir"] = {arc.line_dir.x, arc.line_dir.y};
    j["s"] = {arc.line_s1, arc.line_s2};
    return j;
  }
  j["end1_low"] = arc.end1_low;
  j["apex"] = {arc.apex_theta, arc.apex_r};
  j["asym"] = {arc.asym_low, arc.asym_high, arc.asym_bound, arc.endpoint_miss};
  Json samples = Json::array();
  for (const PolarGraphState& s : arc.samples) {
    samples.push_back({s.theta, s.r, s.dr});
  }
  j["samples"] = std::move(samples);
  return j;
}

GeodesicArc arc_from_json(const Json& j) {
  GeodesicArc arc;
  std::string kind = j.at("kind").get<std::string>();
  arc.kind = kind == "origin_line" ? ArcKind::origin_line : ArcKind::graph;
  arc.end1 = endpoint_from_json(j.at("end1"));
  arc.end2 = endpoint_from_json(j.at("end2"));
  if (arc.kind == ArcKind::origin_line) {
    arc.line_anchor = {j.at("anchor").at(0).get<double>(), j.at("anchor").at(1).get<double>()};
    arc.line_dir = {j.at("dir").at(0).get<double>(), j.at("dir").at(1).get<double>()};
    arc.line_s1 = j.at("s").at(0).get<double>();
    arc.line_s2 = j.at("s").at(1).get<double>();
    return arc;
  }
  arc.end1_low = j.at("end1_low").get<bool>();
  arc.apex_theta = j.at("apex").at(0).get<double>();
  arc.apex_r = j.at("apex").at(1).get<double>();
  arc.asym_low = j.at("asym").at(0).get<double>();
  arc.asym_high = j.at("asym").at(1).get<double>();
  arc.asym_bound = j.at("asym").at(2).get<double>();
  arc.endpoint_miss = j.at("asym").at(3).get<double>();
  for (const Json& s : j.at("samples")) {
    arc.samples.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()});
  }
  return arc;
}

void check_close(const char* field, double stored, double recomputed) {
  if (!(std::abs(stored - recomputed) <= 1e-12 * (1.0 + std::abs(recomputed)))) {
    throw std::runtime_error(std::string("network document failed verification: ") + field);
  }
}

}  // namespace

std::uint64_t fnv1a_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string canonical_config(const RunConfig& config) {
  std::ostringstream out;
  out << "rays=";
  for (std::size_t i = 0; i < config.rays.size(); ++i) {
    out << (i ? "," : "") << full(config.rays[i]);
  }
  out << ";mode=" << mode_name(config.mode);
  const RelaxOptions& r = config.relax;
  out << ";r_schedule=";
  for (std::size_t i = 0; i < r.r_schedule.size(); ++i) {
    out << (i ? "," : "") << full(r.r_schedule[i]);
  }
  out << ";descent_max_r=" << full(r.descent_max_r) << ";descent_ds=" << full(r.descent_ds)
      << ";descent_max_iters=" << r.descent_max_iters
      << ";descent_step_tol=" << full(r.descent_step_tol)
      << ";newton_tol=" << full(r.newton_tol) << ";newton_max_iters=" << r.newton_max_iters
      << ";regular_defect_tol=" << full(r.regular_defect_tol)
      << ";collision_tol=" << full(r.collision_tol)
      << ";truncation_radius=" << full(r.truncation_radius)
      << ";dedup_hausdorff=" << full(r.dedup_hausdorff) << ";geo_rel_tol=" << full(r.geo.rel_tol)
      << ";geo_abs_tol=" << full(r.geo.abs_tol) << ";geo_tail_tol=" << full(r.geo.tail_tol);
  return out.str();
}

std::string network_document_string(const Network& net) {
  if (net.status != NetworkStatus::regular) {
    throw std::invalid_argument("network documents are written for regular networks only");
  }
  Json doc;
  doc["schema"] = kDocumentSchema;
  doc["generator"] = {{"tool", kToolName}, {"version", kToolVersion}};
  Json rays = Json::array();
  for (const IdealPoint& b : net.boundary) rays.push_back(b.angle);
  doc["boundary_angles"] = std::move(rays);
  Json topo;
  topo["k"] = net.topology.k;
  topo["interior_count"] = net.topology.interior_count;
  Json edges = Json::array();
  for (auto [a, b] : net.topology.edges) edges.push_back({a, b});
  topo["edges"] = std::move(edges);
  topo["components"] = net.topology.components;
  doc["topology"] = std::move(topo);
  Json verts = Json::array();
  for (Vec2 v : net.vertex_positions) verts.push_back({v.x, v.y});
  doc["vertices"] = std::move(verts);
  Json arcs = Json::array();
  for (const GeodesicArc& arc : net.edge_arcs) arcs.push_back(arc_json(arc));
  doc["edges"] = std::move(arcs);
  doc["status"] = "regular";
  doc["total_truncated_length"] = net.total_truncated_length;
  Verification v = compute_verification(net);
  doc["verification"] = {{"vertex_count", v.vertex_count},
                         {"max_soliton_residual", v.max_soliton_residual},
                         {"max_balance_defect", v.max_balance_defect},
                         {"embedded", v.embedded},
                         {"hull_ok", v.hull_ok}};
  return doc.dump(2) + "\n";
}

Network network_from_document_string(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("network document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema").get<int>() != kDocumentSchema) {
      throw std::runtime_error("network document has an unsupported schema version");
    }
    if (doc.at("status").get<std::string>() != "regular") {
      throw std::runtime_error("network document does not describe a regular network");
    }
    Network net;
    for (const Json& a : doc.at("boundary_angles")) net.boundary.push_back({a.get<double>()});
    const Json& topo = doc.at("topology");
    net.topology.k = topo.at("k").get<int>();
    net.topology.interior_count = topo.at("interior_count").get<int>();
    for (const Json& e : topo.at("edges")) {
      net.topology.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    net.topology.components = topo.at("components").get<std::vector<std::vector<int>>>();
    for (const Json& v : doc.at("vertices")) {
      net.vertex_positions.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    for (const Json& a : doc.at("edges")) net.edge_arcs.push_back(arc_from_json(a));
    net.status = NetworkStatus::regular;
    net.total_truncated_length = doc.at("total_truncated_length").get<double>();

    // Structural consistency: the vertex and boundary arrays must be the
    // ones the arcs were built from, or the verification block would not
    // vouch for the stated geometry.
    const int k = net.topology.k;
    if (k < 2 || static_cast<int>(net.boundary.size()) != k ||
        static_cast<int>(net.vertex_positions.size()) != net.topology.interior_count ||
        net.edge_arcs.size() != net.topology.edges.size()) {
      throw std::runtime_error("network document failed verification: inconsistent sizes");
    }
    for (std::size_t e = 0; e < net.edge_arcs.size(); ++e) {
      const GeodesicArc& arc = net.edge_arcs[e];
      auto [p, q] = net.topology.edges[e];
      for (auto [id, end] : {std::pair{p, &arc.end1}, std::pair{q, &arc.end2}}) {
        if (id < 0 || id >= k + net.topology.interior_count) {
          throw std::runtime_error("network document failed verification: edge id out of range");
        }
        bool ok;
        if (id < k) {
          ok = end->ideal && std::abs(angle_diff(end->angle, net.boundary[id].angle)) <= 1e-12;
        } else {
          Vec2 v = net.vertex_positions[id - k];
          ok = !end->ideal && distance(end->point, v) <= 1e-12 * (1.0 + v.norm());
        }
        if (!ok) {
          throw std::runtime_error(
              "network document failed verification: arc endpoints disagree with vertices");
        }
      }
      // The Clairaut quantity r^2 e^{r^2/2} / sqrt(r^2 + r'^2) is a first
      // integral of the geodesic equation, so it must be constant along the
      // stored samples.  Integrator drift sits near 1e-11 relative; any edit
      // to a sample moves it by orders of magnitude more.
      if (arc.kind == ArcKind::graph) {
        double c0 = -1.0;
        for (const PolarGraphState& s : arc.samples) {
          if (!std::isfinite(s.dr)) continue;
          double c = clairaut_constant(s);
          if (c0 < 0.0) c0 = c;
          if (std::abs(c - c0) > 1e-7 * c0) {
            throw std::runtime_error(
                "network document failed verification: samples do not lie on a geodesic");
          }
        }
      }
    }

    const Json& ver = doc.at("verification");
    Verification v = compute_verification(net);
    if (ver.at("vertex_count").get<int>() != v.vertex_count) {
      throw std::runtime_error("network document failed verification: vertex_count");
    }
    check_close("max_soliton_residual", ver.at("max_soliton_residual").get<double>(),
                v.max_soliton_residual);
    check_close("max_balance_defect", ver.at("max_balance_defect").get<double>(),
                v.max_balance_defect);
    if (ver.at("embedded").get<bool>() != v.embedded || !v.embedded) {
      throw std::runtime_error("network document failed verification: embedded");
    }
    if (ver.at("hull_ok").get<bool>() != v.hull_ok || !v.hull_ok) {
      throw std::runtime_error("network document failed verification: hull_ok");
    }
    // The geometry must also earn the claimed regularity.
    if (v.max_balance_defect > 1e-8) {
      throw std::runtime_error("network document failed verification: balance defect too large");
    }
    return net;
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("network document is malformed: ") + e.what());
  }
}

void save_network_document(const std::filesystem::path& file, const Network& net) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
  out << network_document_string(net);
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

Network load_network_document(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open network document: " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return network_from_document_string(buf.str());
}

// --- rendering ----------------------------------------------------------

double ball_chart_radius(double r) { return r / (1.0 + std::sqrt(1.0 + r * r)); }

Vec2 ball_chart_point(Vec2 p) {
  double r = p.norm();
  if (r == 0.0) return {0.0, 0.0};
  return ball_chart_radius(r) / r * p;
}

namespace {

// Pixel mapper: world square [-extent, extent]^2 onto a box of the given
// pixel size anchored at (x0, y0), with the y axis flipped.
struct Frame {
  double x0 = 0.0, y0 = 0.0, size = 640.0, extent = 1.0;
  std::string map(Vec2 p) const {
    double sx = x0 + (p.x + extent) / (2.0 * extent) * size;
    double sy = y0 + (extent - p.y) / (2.0 * extent) * size;
    return px(sx) + "," + px(sy);
  }
};

void path_from_points(std::string& svg, const Frame& f, const std::vector<Vec2>& pts,
                      const char* style) {
  if (pts.size() < 2) return;
  svg += "  <path d=\"M ";
  svg += f.map(pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    svg += " L ";
    svg += f.map(pts[i]);
  }
  svg += "\" ";
  svg += style;
  svg += "/>\n";
}

void dot(std::string& svg, const Frame& f, Vec2 p, double radius, const char* fill) {
  auto c = f.map(p);
  auto comma = c.find(',');
  svg += "  <circle cx=\"" + c.substr(0, comma) + "\" cy=\"" + c.substr(comma + 1) + "\" r=\"" +
         px(radius) + "\" fill=\"" + fill + "\"/>\n";
}

void circle_outline(std::string& svg, const Frame& f, double world_radius) {
  auto c = f.map({0.0, 0.0});
  auto comma = c.find(',');
  double rp = world_radius / (2.0 * f.extent) * f.size;
  svg += "  <circle cx=\"" + c.substr(0, comma) + "\" cy=\"" + c.substr(comma + 1) + "\" r=\"" +
         px(rp) + "\" fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
}

constexpr const char* kEdgeStyle = "fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.6\"";
constexpr const char* kRayStyle = "fill=\"none\" stroke=\"#777777\" stroke-width=\"1.0\"";

// Edge curves of the network in ball-chart coordinates: the sampled
// truncation mapped pointwise, continued to the exact rim point of each
// ideal end (the chart freezes angles super-exponentially, so the undrawn
// tail is radial to below pixel resolution).
std::vector<std::vector<Vec2>> ball_edges(const Network& net) {
  std::vector<std::vector<Vec2>> out;
  auto cone = tangent_cone_at_infinity(net);  // validates asymptote records
  (void)cone;
  for (const GeodesicArc& arc : net.edge_arcs) {
    std::vector<Vec2> pts;
    for (Vec2 p : arc.polyline(12.0, 0.02)) pts.push_back(ball_chart_point(p));
    if (pts.empty()) continue;
    if (arc.kind == ArcKind::origin_line) {
      if (arc.end1.ideal) pts.insert(pts.begin(), unit_vector((-arc.line_dir).angle()));
      if (arc.end2.ideal) pts.push_back(unit_vector(arc.line_dir.angle()));
    } else {
      double low_angle = arc.asym_low, high_angle = arc.asym_high;
      bool lo1 = arc.end1_low;
      if (arc.end1.ideal) pts.insert(pts.begin(), unit_vector(lo1 ? low_angle : high_angle));
      if (arc.end2.ideal) pts.push_back(unit_vector(lo1 ? high_angle : low_angle));
    }
    out.push_back(std::move(pts));
  }
  return out;
}

void draw_ball_disk(std::string& svg, const Frame& f, const Network& net, bool corner_dots) {
  circle_outline(svg, f, 1.0);
  for (const auto& pts : ball_edges(net)) path_from_points(svg, f, pts, kEdgeStyle);
  for (Vec2 v : net.vertex_positions) dot(svg, f, ball_chart_point(v), 3.0, "#c23b22");
  if (corner_dots) {
    for (const IdealPoint& b : net.boundary) dot(svg, f, unit_vector(b.angle), 4.0, "#111111");
  }
}

std::string svg_header(int width, int height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) +
         "\">\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string render_svg(const Network& net, Chart chart) {
  if (net.status != NetworkStatus::regular) {
    throw std::invalid_argument("render_svg: network must be regular");
  }
  std::string svg;
  if (chart == Chart::plane) {
    const double extent = 8.5, r_draw = 8.0;
    Frame f{20.0, 20.0, 640.0, extent};
    svg = svg_header(680, 680);
    circle_outline(svg, f, r_draw);
    for (const IdealPoint& b : net.boundary) {
      std::vector<Vec2> tick{0.94 * r_draw * unit_vector(b.angle), r_draw * unit_vector(b.angle)};
      path_from_points(svg, f, tick, kRayStyle);
    }
    for (const auto& pts : net.sampled_edges(r_draw, 0.02)) {
      path_from_points(svg, f, pts, kEdgeStyle);
    }
    for (Vec2 v : net.vertex_positions) dot(svg, f, v, 3.0, "#c23b22");
    svg += "</svg>\n";
    return svg;
  }
  if (chart == Chart::ball) {
    Frame f{20.0, 20.0, 640.0, 1.05};
    svg = svg_header(680, 680);
    draw_ball_disk(svg, f, net, true);
    svg += "</svg>\n";
    return svg;
  }
  // Blowup: face F (dilation orbits = the network in orbit coordinates)
  // and face T (the t = 0 rays), sharing the corner circle F within T.
  WorldSheet sheet = make_world_sheet(net, {0.5, 1.0, 2.0});
  BlowupChart lift = blowup_lift(sheet, {8.0, 2e-2});
  svg = svg_header(1380, 740);
  Frame fF{20.0, 60.0, 640.0, 1.05};
  Frame fT{720.0, 60.0, 640.0, 1.05};
  svg += "  <text x=\"340\" y=\"40\" font-family=\"sans-serif\" font-size=\"24\" "
         "text-anchor=\"middle\">F</text>\n";
  svg += "  <text x=\"1040\" y=\"40\" font-family=\"sans-serif\" font-size=\"24\" "
         "text-anchor=\"middle\">T</text>\n";
  draw_ball_disk(svg, fF, net, true);
  circle_outline(svg, fT, 1.0);
  for (const auto& ray : lift.face_t) {
    std::vector<Vec2> pts;
    for (Vec2 p : ray) pts.push_back(ball_chart_point(p));
    if (!ray.empty()) pts.push_back(unit_vector(ray.back().angle()));
    path_from_points(svg, fT, pts, kEdgeStyle);
  }
  for (double a : lift.corner_angles) dot(svg, fT, unit_vector(a), 4.0, "#111111");
  svg += "</svg>\n";
  return svg;
}

// --- tables ---------------------------------------------------------------

std::string deviation_csv(const FlowDeviationReport& report) {
  std::ostringstream out;
  std::size_t nv = report.vertex_positions.empty() ? 0 : report.vertex_positions.front().size();
  out << "t,deviation";
  for (std::size_t v = 0; v < nv; ++v) out << ",vertex" << v << "_x,vertex" << v << "_y";
  out << "\n";
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    out << full(report.times[i]) << "," << full(report.deviation[i]);
    for (std::size_t v = 0; v < nv; ++v) {
      out << "," << full(report.vertex_positions[i][v].x) << ","
          << full(report.vertex_positions[i][v].y);
    }
    out << "\n";
  }
  return out.str();
}

std::string frame_document_string(const FlowFrame& frame) {
  Json doc;
  doc["schema"] = kDocumentSchema;
  doc["t"] = frame.t;
  doc["lambda"] = frame.lambda;
  Json verts = Json::array();
  for (Vec2 v : frame.vertex_positions) verts.push_back({v.x, v.y});
  doc["vertices"] = std::move(verts);
  Json edges = Json::array();
  for (const auto& edge : frame.edges) {
    Json pts = Json::array();
    for (Vec2 p : edge) pts.push_back({p.x, p.y});
    edges.push_back(std::move(pts));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

// --- commands ---------------------------------------------------------------

namespace {

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

Json relax_options_json(const RelaxOptions& r) {
  Json j;
  j["r_schedule"] = r.r_schedule;
  j["descent_max_r"] = r.descent_max_r;
  j["descent_ds"] = r.descent_ds;
  j["descent_max_iters"] = r.descent_max_iters;
  j["descent_step_tol"] = r.descent_step_tol;
  j["newton_tol"] = r.newton_tol;
  j["newton_max_iters"] = r.newton_max_iters;
  j["regular_defect_tol"] = r.regular_defect_tol;
  j["collision_tol"] = r.collision_tol;
  j["truncation_radius"] = r.truncation_radius;
  j["dedup_hausdorff"] = r.dedup_hausdorff;
  j["geo"] = {{"rel_tol", r.geo.rel_tol},
              {"abs_tol", r.geo.abs_tol},
              {"tail_tol", r.geo.tail_tol},
              {"r_samples_min", r.geo.r_samples_min},
              {"r_hard_cap", r.geo.r_hard_cap}};
  return j;
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const std::filesystem::path& out_dir, const char* command, Json config,
                    std::uint64_t config_hash, const Json& results,
                    std::vector<std::filesystem::path>& files) {
  Json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config"] = std::move(config);
  m["config_hash"] = hash_hex(config_hash);
  m["results"] = results;
  auto path = out_dir / "manifest.json";
  write_file(path, m.dump(2) + "\n");
  files.push_back(path);
}

}  // namespace

CommandOutcome cmd_solve(const RunConfig& config, const std::filesystem::path& out_dir) {
  std::vector<IdealPoint> boundary;
  for (double a : config.rays) boundary.push_back({a});
  std::filesystem::create_directories(out_dir);

  // solve_expander validates the boundary (throws std::invalid_argument).
  std::vector<Network> solutions = solve_expander(boundary, config.mode, config.relax);

  CommandOutcome outcome;
  Json result_list = Json::array();
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "network_%02zu.json", i);
    auto path = out_dir / name;
    save_network_document(path, solutions[i]);
    outcome.files.push_back(path);
    Json r;
    r["file"] = name;
    r["interior_vertices"] = solutions[i].vertex_positions.size();
    r["edges"] = solutions[i].edge_arcs.size();
    r["total_truncated_length"] = solutions[i].total_truncated_length;
    r["max_balance_defect"] = solutions[i].diagnostics.max_balance_defect;
    result_list.push_back(std::move(r));
  }

  Json config_json;
  {
    Json rays = Json::array();
    for (double a : config.rays) rays.push_back(a);
    config_json["rays"] = std::move(rays);
    config_json["mode"] = mode_name(config.mode);
    config_json["relax"] = relax_options_json(config.relax);
  }
  Json results;
  results["solutions"] = solutions.size();
  results["documents"] = std::move(result_list);
  write_manifest(out_dir, "solve", std::move(config_json),
                 fnv1a_hash(canonical_config(config)), results, outcome.files);

  outcome.exit_code = solutions.empty() ? 1 : 0;
  outcome.summary = "k=" + std::to_string(config.rays.size()) + " " + mode_name(config.mode) +
                    ": " + std::to_string(solutions.size()) + " solution(s)";
  return outcome;
}

CommandOutcome cmd_flow(const std::filesystem::path& network_file,
                        const std::vector<double>& times, bool check, double check_h,
                        const std::filesystem::path& out_dir) {
  if (times.empty()) throw std::invalid_argument("cmd_flow: empty time list");
  Network net = load_network_document(network_file);
  std::filesystem::create_directories(out_dir);

  CommandOutcome outcome;
  Json frame_list = Json::array();
  for (std::size_t i = 0; i < times.size(); ++i) {
    FlowFrame frame = evolve(net, times[i]);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%02zu.json", i);
    auto path = out_dir / name;
    write_file(path, frame_document_string(frame));
    outcome.files.push_back(path);
    frame_list.push_back({{"file", name}, {"t", times[i]}, {"lambda", frame.lambda}});
  }

  Json results;
  results["frames"] = std::move(frame_list);
  double max_dev = 0.0;
  if (check) {
    double t_end = *std::max_element(times.begin(), times.end());
    if (!(t_end > 0.5)) {
      throw std::invalid_argument("cmd_flow: --check needs a time beyond t = 1/2");
    }
    FlowCheckOptions opts;
    opts.h = check_h;
    FlowDeviationReport report = direct_flow_check(net, t_end, opts);
    auto path = out_dir / "deviation.csv";
    write_file(path, deviation_csv(report));
    outcome.files.push_back(path);
    max_dev = report.max_deviation;
    results["check"] = {{"t_end", t_end}, {"h", check_h}, {"max_deviation", max_dev}};
  }

  std::ostringstream cfg;
  cfg << "network=" << network_file.string() << ";times=";
  for (std::size_t i = 0; i < times.size(); ++i) cfg << (i ? "," : "") << full(times[i]);
  cfg << ";check=" << (check ? 1 : 0) << ";h=" << full(check_h);
  Json config_json;
  {
    Json ts = Json::array();
    for (double t : times) ts.push_back(t);
    config_json["network"] = network_file.string();
    config_json["times"] = std::move(ts);
    config_json["check"] = check;
    config_json["h"] = check_h;
  }
  write_manifest(out_dir, "flow", std::move(config_json), fnv1a_hash(cfg.str()), results,
                 outcome.files);

  outcome.summary = std::to_string(times.size()) + " frame(s)" +
                    (check ? ", max normalized deviation " + full(max_dev) : "");
  return outcome;
}

CommandOutcome cmd_render(const std::filesystem::path& network_file, Chart chart,
                          const std::filesystem::path& out_svg) {
  Network net = load_network_document(network_file);
  if (out_svg.has_parent_path()) std::filesystem::create_directories(out_svg.parent_path());
  write_file(out_svg, render_svg(net, chart));
  CommandOutcome outcome;
  outcome.files.push_back(out_svg);
  outcome.summary = "wrote " + out_svg.string();
  return outcome;
}

}  // namespace steinerflow
