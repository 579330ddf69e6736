// Python bindings: the solver, the flow module, and the document /
// rendering layer, with Vec2 and IdealPoint mapped to plain python
// values ((x, y) tuples and angles in radians).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "steinerflow/flow.hpp"
#include "steinerflow/geometry.hpp"
#include "steinerflow/geodesics.hpp"
#include "steinerflow/io.hpp"
#include "steinerflow/steiner.hpp"
#include "steinerflow/topology.hpp"

namespace py = pybind11;
using namespace steinerflow;

namespace pybind11::detail {

// Vec2 <-> (x, y).
template <>
struct type_caster<Vec2> {
  PYBIND11_TYPE_CASTER(Vec2, const_name("tuple[float, float]"));

  bool load(handle src, bool) {
    if (!py::isinstance<py::sequence>(src) || py::isinstance<py::str>(src)) return false;
    auto seq = py::reinterpret_borrow<py::sequence>(src);
    if (seq.size() != 2) return false;
    try {
      value.x = seq[0].cast<double>();
      value.y = seq[1].cast<double>();
    } catch (const py::cast_error&) {
      return false;
    }
    return true;
  }

  static handle cast(Vec2 v, return_value_policy, handle) {
    return py::make_tuple(v.x, v.y).release();
  }
};

// IdealPoint <-> angle in radians.
template <>
struct type_caster<IdealPoint> {
  PYBIND11_TYPE_CASTER(IdealPoint, const_name("float"));

  bool load(handle src, bool) {
    try {
      value.angle = src.cast<double>();
    } catch (const py::cast_error&) {
      return false;
    }
    return true;
  }

  static handle cast(IdealPoint p, return_value_policy, handle) {
    return py::float_(p.angle).release();
  }
};

}  // namespace pybind11::detail

namespace {

using NoGil = py::call_guard<py::gil_scoped_release>;

}  // namespace

PYBIND11_MODULE(_steinerflow, m) {
  m.doc() = "Self-similarly expanding networks of curve shortening flow";
  m.attr("__version__") = kToolVersion;

  py::enum_<TopologyMode>(m, "TopologyMode")
      .value("connected", TopologyMode::connected)
      .value("matchings", TopologyMode::matchings)
      .value("forests", TopologyMode::forests);

  py::enum_<NetworkStatus>(m, "NetworkStatus")
      .value("candidate", NetworkStatus::candidate)
      .value("regular", NetworkStatus::regular)
      .value("failed", NetworkStatus::failed);

  py::enum_<Chart>(m, "Chart")
      .value("plane", Chart::plane)
      .value("ball", Chart::ball)
      .value("blowup", Chart::blowup);

  py::class_<Topology>(m, "Topology")
      .def(py::init<>())
      .def_readwrite("k", &Topology::k)
      .def_readwrite("interior_count", &Topology::interior_count)
      .def_readwrite("edges", &Topology::edges)
      .def_readwrite("components", &Topology::components)
      .def("vertex_count", &Topology::vertex_count)
      .def("adjacency", &Topology::adjacency)
      .def("signature", &Topology::signature)
      .def("validate", &Topology::validate)
      .def("__repr__", [](const Topology& t) {
        return "<Topology k=" + std::to_string(t.k) +
               " interior=" + std::to_string(t.interior_count) +
               " edges=" + std::to_string(t.edges.size()) + ">";
      });

  py::class_<RelaxOptions>(m, "RelaxOptions")
      .def(py::init<>())
      .def_readwrite("r_schedule", &RelaxOptions::r_schedule)
      .def_readwrite("descent_max_r", &RelaxOptions::descent_max_r)
      .def_readwrite("descent_ds", &RelaxOptions::descent_ds)
      .def_readwrite("descent_max_iters", &RelaxOptions::descent_max_iters)
      .def_readwrite("descent_step_tol", &RelaxOptions::descent_step_tol)
      .def_readwrite("newton_tol", &RelaxOptions::newton_tol)
      .def_readwrite("newton_max_iters", &RelaxOptions::newton_max_iters)
      .def_readwrite("regular_defect_tol", &RelaxOptions::regular_defect_tol)
      .def_readwrite("collision_tol", &RelaxOptions::collision_tol)
      .def_readwrite("truncation_radius", &RelaxOptions::truncation_radius)
      .def_readwrite("dedup_hausdorff", &RelaxOptions::dedup_hausdorff);

  py::class_<NetworkDiagnostics>(m, "NetworkDiagnostics")
      .def_readonly("max_balance_defect", &NetworkDiagnostics::max_balance_defect)
      .def_readonly("max_tangent_dot", &NetworkDiagnostics::max_tangent_dot)
      .def_readonly("min_vertex_gap", &NetworkDiagnostics::min_vertex_gap)
      .def_readonly("embedded", &NetworkDiagnostics::embedded)
      .def_readonly("hull_ok", &NetworkDiagnostics::hull_ok)
      .def_readonly("descent_iterations", &NetworkDiagnostics::descent_iterations)
      .def_readonly("newton_iterations", &NetworkDiagnostics::newton_iterations)
      .def_readonly("message", &NetworkDiagnostics::message);

  py::class_<Network>(m, "Network")
      .def_readonly("topology", &Network::topology)
      .def_readonly("boundary", &Network::boundary)
      .def_readonly("vertex_positions", &Network::vertex_positions)
      .def_readonly("status", &Network::status)
      .def_readonly("diagnostics", &Network::diagnostics)
      .def_readonly("total_truncated_length", &Network::total_truncated_length)
      .def("sampled_edges", &Network::sampled_edges, py::arg("r_max"), py::arg("max_ds"))
      .def("max_soliton_residual",
           [](const Network& n) {
             double worst = 0.0;
             for (const GeodesicArc& arc : n.edge_arcs) {
               worst = std::max(worst, arc.max_soliton_residual());
             }
             return worst;
           })
      .def("__repr__", [](const Network& n) {
        const char* s = n.status == NetworkStatus::regular    ? "regular"
                        : n.status == NetworkStatus::candidate ? "candidate"
                                                                : "failed";
        return "<Network k=" + std::to_string(n.topology.k) + " " + s + ">";
      });

  py::class_<FlowFrame>(m, "FlowFrame")
      .def_readonly("t", &FlowFrame::t)
      .def_readonly("lambda_", &FlowFrame::lambda)
      .def_readonly("vertex_positions", &FlowFrame::vertex_positions)
      .def_readonly("edges", &FlowFrame::edges);

  py::class_<VertexTrajectory>(m, "VertexTrajectory")
      .def_readonly("base_position", &VertexTrajectory::base_position)
      .def("at", &VertexTrajectory::at, py::arg("t"));

  py::class_<BlowupChart>(m, "BlowupChart")
      .def_readonly("face_f", &BlowupChart::face_f)
      .def_readonly("f_drift", &BlowupChart::f_drift)
      .def_readonly("face_t", &BlowupChart::face_t)
      .def_readonly("corner_angles", &BlowupChart::corner_angles);

  py::class_<FlowCheckOptions>(m, "FlowCheckOptions")
      .def(py::init<>())
      .def_readwrite("h", &FlowCheckOptions::h)
      .def_readwrite("cfl", &FlowCheckOptions::cfl)
      .def_readwrite("r_max", &FlowCheckOptions::r_max)
      .def_readwrite("theta", &FlowCheckOptions::theta)
      .def_readwrite("report_times", &FlowCheckOptions::report_times);

  py::class_<FlowDeviationReport>(m, "FlowDeviationReport")
      .def_readonly("times", &FlowDeviationReport::times)
      .def_readonly("deviation", &FlowDeviationReport::deviation)
      .def_readonly("vertex_positions", &FlowDeviationReport::vertex_positions)
      .def_readonly("max_deviation", &FlowDeviationReport::max_deviation)
      .def_readonly("final_mesh", &FlowDeviationReport::final_mesh);

  // --- solver ---------------------------------------------------------
  m.def("enumerate_topologies", &enumerate_topologies, py::arg("k"),
        py::arg("mode") = TopologyMode::connected);
  m.def("relax", &relax, py::arg("topology"), py::arg("boundary"),
        py::arg("options") = RelaxOptions{}, NoGil{});
  m.def("solve_expander", &solve_expander, py::arg("boundary"),
        py::arg("mode") = TopologyMode::connected, py::arg("options") = RelaxOptions{},
        NoGil{});
  m.def("balance_defect",
        static_cast<std::vector<double> (*)(const Network&)>(&balance_defect),
        py::arg("network"));
  m.def("hull_check", [](const Network& n) { return hull_check(n); }, py::arg("network"));
  m.def("width", [](double r0) { return width(r0); }, py::arg("r0"),
        "Opening angle between the two asymptotes of the geodesic with apex radius r0");
  m.def("conformal_factor", &conformal_factor, py::arg("p"),
        "Metric weight e^{|p|^2 / 2}");

  // --- flow -----------------------------------------------------------
  m.def(
      "evolve",
      [](const Network& base, double t, double r_max, double max_ds) {
        return evolve(base, t, {r_max, max_ds});
      },
      py::arg("base"), py::arg("t"), py::arg("r_max") = 12.0, py::arg("max_ds") = 5e-3,
      NoGil{});
  m.def("vertex_trajectories", &vertex_trajectories, py::arg("base"));
  m.def("tangent_cone_at_infinity", &tangent_cone_at_infinity, py::arg("network"));
  m.def("direct_flow_check", &direct_flow_check, py::arg("base"), py::arg("t_end"),
        py::arg("options") = FlowCheckOptions{}, NoGil{});
  m.def("flow_closed_curve", &flow_closed_curve, py::arg("nodes"), py::arg("duration"),
        py::arg("options") = FlowCheckOptions{}, NoGil{});
  m.def(
      "blowup_lift",
      [](const Network& base, std::vector<double> times, double r_max, double max_ds) {
        return blowup_lift(make_world_sheet(base, std::move(times)), {r_max, max_ds});
      },
      py::arg("base"), py::arg("times") = std::vector<double>{0.5, 1.0, 2.0},
      py::arg("r_max") = 8.0, py::arg("max_ds") = 2e-2, NoGil{});

  // --- documents and rendering ----------------------------------------
  m.def("network_document_string", &network_document_string, py::arg("network"));
  m.def("network_from_document_string", &network_from_document_string, py::arg("text"));
  m.def("save_network_document", &save_network_document, py::arg("file"),
        py::arg("network"));
  m.def("load_network_document", &load_network_document, py::arg("file"));
  m.def("render_svg", &render_svg, py::arg("network"), py::arg("chart") = Chart::plane);
  m.def("deviation_csv", &deviation_csv, py::arg("report"));
  m.def("ball_chart_radius", &ball_chart_radius, py::arg("r"));
  m.def("ball_chart_point", &ball_chart_point, py::arg("p"));
}
