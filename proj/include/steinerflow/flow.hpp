#ifndef STEINERFLOW_FLOW_HPP_
#define STEINERFLOW_FLOW_HPP_

// Self-similar evolution of a regular expander network.
//
// A regular network gamma is the t = 1/2 cross-section of the curve
// shortening flow t -> sqrt(2t) * gamma, which emanates from the cone of
// its ideal rays at t = 0.  This module scales cross-sections to flow
// frames, reports vertex trajectories and the tangent cone at infinity,
// lifts the space-time track into parabolic blow-up coordinates, and
// re-derives the evolution with an independent front-tracking integrator
// to measure how far the network is from exact self-similarity.

#include <vector>

#include "steinerflow/steiner.hpp"
#include "steinerflow/vec2.hpp"

namespace steinerflow {

// Sampling window, in t = 1/2 coordinates, used when a frame or chart
// needs concrete polylines of the unbounded edges.
struct FlowSampling {
  double r_max = 12.0;
  double max_ds = 5e-3;
};

// The network at one instant of the flow: every coordinate of the base
// cross-section scaled by lambda = sqrt(2t).
struct FlowFrame {
  double t = 0.5;
  double lambda = 1.0;
  std::vector<Vec2> vertex_positions;    // interior vertices, topology order
  std::vector<std::vector<Vec2>> edges;  // sampled edges, topology edge order
};

// Scales the base cross-section to time t (throws std::invalid_argument
// for t <= 0 or a base that is not regular).  t = 1/2 is the identity;
// as t -> 0 the frames converge on compacts to the cone of input rays.
FlowFrame evolve(const Network& base, double t, const FlowSampling& sampling = {});

// Straight-ray trajectory t -> sqrt(2t) * q of one interior vertex; a
// vertex at the origin is stationary.
struct VertexTrajectory {
  Vec2 base_position;  // position at t = 1/2
  Vec2 at(double t) const { return std::sqrt(2.0 * t) * base_position; }
};

std::vector<VertexTrajectory> vertex_trajectories(const Network& base);

// Asymptote directions of all unbounded edges, sorted ascending in
// [0, 2*pi).  A full line through the origin contributes both of its ideal
// directions.  Throws std::runtime_error if an unbounded edge carries no
// converged asymptote record.
std::vector<double> tangent_cone_at_infinity(const Network& net);

// The space-time track of the evolution restricted to a time grid.
struct WorldSheet {
  Network base;               // cross-section at t = 1/2
  std::vector<double> times;  // strictly positive, ascending
};

// Validates the grid (positive, ascending) and the base (regular).
WorldSheet make_world_sheet(Network base, std::vector<double> times);

// Trace of the world sheet on the faces of the parabolic blow-up
//   D_lambda(x, y, t) = (lambda x, lambda y, lambda^2 t),
// where every dilation orbit of the open upper half-space corresponds to a
// point of the spherical face F and the t = 0 plane survives as the face
// T.  On F we use the orbit coordinates (x, y) / sqrt(2t), normalized so
// the trace coincides with the t = 1/2 cross-section; self-similarity
// makes that trace independent of the grid time, and f_drift records the
// largest numerical departure actually observed.
struct BlowupChart {
  std::vector<std::vector<Vec2>> face_f;  // network trace in orbit coordinates
  double f_drift = 0.0;                   // max over grid times of sup |trace_t - trace_{1/2}|
  std::vector<std::vector<Vec2>> face_t;  // the input rays on the t = 0 face
  std::vector<double> corner_angles;      // ideal points on the corner circle F within T
};

BlowupChart blowup_lift(const WorldSheet& sheet, const FlowSampling& sampling = {});

// Front-tracking integrator parameters.  Nodes move with the discrete
// curvature vector under explicit Euler steps dt = cfl * (local spacing)^2;
// triple junctions are relocated by one Newton step toward zero tangent-sum
// after each time step; far ends of unbounded edges are pinned to their
// exact self-similar positions at truncation radius r_max; a tangential
// smoothing pass (rate theta) keeps the nodes quasi-uniformly spaced.
struct FlowCheckOptions {
  double h = 0.02;     // initial node spacing at t = 1/2
  double cfl = 0.25;   // dt = cfl * min spacing^2 (stability needs <= 1/2)
  double r_max = 12.0; // truncation radius of the t = 1/2 mesh
  double theta = 0.5;  // tangential redistribution rate per step
  int report_times = 16;  // uniform grid on [1/2, t_end] incl. both ends
};

// Deviation history of the tracked flow against the self-similar frames.
struct FlowDeviationReport {
  std::vector<double> times;
  // Hausdorff distance between the tracked mesh and evolve(base, t),
  // divided by sqrt(2t); one entry per report time.
  std::vector<double> deviation;
  // Tracked junction positions at each report time (topology order).
  std::vector<std::vector<Vec2>> vertex_positions;
  double max_deviation = 0.0;
  std::vector<std::vector<Vec2>> final_mesh;  // tracked chains at t_end
};

// Evolves the base network from t = 1/2 to t_end (> 1/2) by direct
// curvature flow of a node mesh and reports the normalized deviation from
// the self-similar evolution.  Throws std::invalid_argument for bad
// arguments and std::runtime_error when the explicit stepping goes
// unstable (CFL violation).
FlowDeviationReport direct_flow_check(const Network& base, double t_end,
                                      const FlowCheckOptions& opts = {});

// The same node dynamics on a single closed curve (no junctions, no pins),
// run for the given duration.  Exposed as the integrator's sanity oracle:
// a circle of radius R0 must shrink to radius sqrt(R0^2 - 2 * duration).
std::vector<Vec2> flow_closed_curve(std::vector<Vec2> nodes, double duration,
                                    const FlowCheckOptions& opts = {});

namespace detail {

// Curvature vector estimate 2 (T+ - T-) / (d- + d+) at b from its chain
// neighbors a, c; exact curvature * normal up to O(spacing^2) for nearly
// uniform spacing.
Vec2 discrete_curvature(Vec2 a, Vec2 b, Vec2 c);

}  // namespace detail

}  // namespace steinerflow

#endif  // STEINERFLOW_FLOW_HPP_
