#ifndef STEINERFLOW_GEOMETRY_HPP_
#define STEINERFLOW_GEOMETRY_HPP_

// Pointwise formulas for the conformal metric
//
//     g = e^{x^2 + y^2} (dx^2 + dy^2)
//
// whose geodesics are exactly the self-similarly expanding solitons of
// curve shortening flow (curves satisfying kappa = <position, normal>).
// Everything here is exact arithmetic on closed-form expressions; the
// integrators live in ode.hpp / geodesics.hpp.

#include <span>
#include <vector>

#include "steinerflow/vec2.hpp"

namespace steinerflow {

// A point on the ideal boundary (circle at infinity), identified by the
// direction of the asymptotic ray from the origin.
struct IdealPoint {
  double angle = 0.0;
};

// State of a geodesic written as a polar graph r(theta):
//   r  > 0, dr = dr/dtheta.
struct PolarGraphState {
  double theta = 0.0;
  double r = 1.0;
  double dr = 0.0;
};

// Full geodesic state in polar coordinates with an affine parameter.
struct GeodesicState {
  double r = 1.0;
  double theta = 0.0;
  double rdot = 0.0;
  double thetadot = 0.0;
};

struct GeodesicAccel {
  double rddot = 0.0;
  double thetaddot = 0.0;
};

// Conformal factor e^{|p|^2} multiplying the Euclidean metric tensor.
// The length element scales by its square root, e^{|p|^2/2}.
double conformal_factor(Vec2 p);
double length_weight(Vec2 p);  // e^{|p|^2 / 2}

// Gauss curvature of g: K = -2 e^{-r^2} < 0 everywhere.
double gauss_curvature(Vec2 p);

// Length of a polyline in the metric g, midpoint rule per segment:
//   sum_i e^{|m_i|^2/2} |p_{i+1} - p_i|,  m_i the segment midpoint.
// Exact for degenerate segments; second order in the segment length.
// Throws std::invalid_argument for fewer than two points.
double g_length(std::span<const Vec2> polyline);

// Second-order ODE for polar graphs r(theta) along a geodesic:
//   r'' = r + 2 r'^2 / r + r (r^2 + r'^2)
// Returns r''. Requires r > 0.
double polar_ode_rhs(const PolarGraphState& s);

// Geodesic equations in polar coordinates (affine parameter):
//   r..     = (r^3 + r) theta.^2 - r rdot^2
//   theta.. = -2 (r + 1/r) rdot thetadot
GeodesicAccel geodesic_rhs(const GeodesicState& s);

// Euclidean curvature of the polar graph at s, given r'' there:
//   kappa = (2 r'^2 - r r'' + r^2) / sigma^3,   sigma = sqrt(r^2 + r'^2),
// with the sign convention of the left normal (counterclockwise rotation
// of the direction of increasing theta).
double curvature_of_graph(const PolarGraphState& s, double rpp);

// Unit tangent and left unit normal of the polar graph at s, oriented
// along increasing theta.
Vec2 graph_point(const PolarGraphState& s);
Vec2 graph_tangent(const PolarGraphState& s);
Vec2 graph_left_normal(const PolarGraphState& s);

// Expander residual kappa - <p, nu> for a curve through p with unit
// tangent t (nu is the left normal of t) and curvature kappa.  Vanishes
// identically along geodesics of g; flipping the orientation flips the
// sign of both terms.
double soliton_residual(Vec2 p, Vec2 unit_tangent, double kappa);

// First integral of the geodesic flow coming from rotational symmetry of
// the conformal factor (Clairaut):  r^2 e^{r^2/2} / sigma  is constant
// along every polar-graph geodesic and equals  r0 e^{r0^2/2}  at the apex.
double clairaut_constant(const PolarGraphState& s);

// Invert  r0 e^{r0^2/2} = c  for the apex radius r0 (c > 0).
double apex_radius_from_clairaut(double c);

}  // namespace steinerflow

#endif  // STEINERFLOW_GEOMETRY_HPP_
