#include "steinerflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace steinerflow {

double conformal_factor(Vec2 p) { return std::exp(p.norm2()); }

double length_weight(Vec2 p) { return std::exp(0.5 * p.norm2()); }

double gauss_curvature(Vec2 p) { return -2.0 * std::exp(-p.norm2()); }

double g_length(std::span<const Vec2> polyline) {
  if (polyline.size() < 2) {
    throw std::invalid_argument("g_length: polyline needs at least two points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    Vec2 a = polyline[i], b = polyline[i + 1];
    Vec2 m = (a + b) * 0.5;
    total += length_weight(m) * distance(a, b);
  }
  return total;
}

double polar_ode_rhs(const PolarGraphState& s) {
  if (!(s.r > 0.0)) {
    throw std::invalid_argument("polar_ode_rhs: requires r > 0");
  }
  double r = s.r, dr = s.dr;
  return r + 2.0 * dr * dr / r + r * (r * r + dr * dr);
}

GeodesicAccel geodesic_rhs(const GeodesicState& s) {
  if (!(s.r > 0.0)) {
    throw std::invalid_argument("geodesic_rhs: requires r > 0");
  }
  GeodesicAccel a;
  a.rddot = (s.r * s.r * s.r + s.r) * s.thetadot * s.thetadot - s.r * s.rdot * s.rdot;
  a.thetaddot = -2.0 * (s.r + 1.0 / s.r) * s.rdot * s.thetadot;
  return a;
}

double curvature_of_graph(const PolarGraphState& s, double rpp) {
  double r = s.r, dr = s.dr;
  double sigma = std::sqrt(r * r + dr * dr);
  return (2.0 * dr * dr - r * rpp + r * r) / (sigma * sigma * sigma);
}

Vec2 graph_point(const PolarGraphState& s) { return s.r * unit_vector(s.theta); }

Vec2 graph_tangent(const PolarGraphState& s) {
  Vec2 rad = unit_vector(s.theta);
  Vec2 ang = rad.perp();
  Vec2 t = s.dr * rad + s.r * ang;
  return t.normalized();
}

Vec2 graph_left_normal(const PolarGraphState& s) { return graph_tangent(s).perp(); }

double soliton_residual(Vec2 p, Vec2 unit_tangent, double kappa) {
  return kappa - dot(p, unit_tangent.perp());
}

double clairaut_constant(const PolarGraphState& s) {
  double sigma = std::hypot(s.r, s.dr);
  return s.r * s.r * std::exp(0.5 * s.r * s.r) / sigma;
}

double apex_radius_from_clairaut(double c) {
  if (!(c > 0.0)) {
    throw std::invalid_argument("apex_radius_from_clairaut: requires c > 0");
  }
  // Solve r e^{r^2/2} = c.  f is strictly increasing; Newton from a
  // log-based guess converges in a handful of steps for all c.
  double r = c < 1.0 ? c : std::sqrt(std::max(1e-30, 2.0 * std::log(c)) + 1.0);
  for (int i = 0; i < 80; ++i) {
    double e = std::exp(0.5 * r * r);
    double f = r * e - c;
    double fp = e * (1.0 + r * r);
    double step = f / fp;
    r -= step;
    if (!(r > 0.0)) r = 1e-300;
    if (std::abs(step) <= 1e-15 * (1.0 + r)) break;
  }
  return r;
}

}  // namespace steinerflow
