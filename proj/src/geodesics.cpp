#include "steinerflow/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "steinerflow/ode.hpp"

namespace steinerflow {

namespace detail {

double tail_angle_bound(double r, double v) {
  // Remaining angle to the asymptote from a state beyond the apex:
  // dtheta/dv = 1 / ((1+v^2)(1+r^2)) and r only grows, so the remainder
  // is at most  integral_v^inf dv/((1+v^2)(1+r^2)) = arctan(1/v)/(1+r^2).
  if (v < 0.0) return kPi;
  if (v == 0.0) return 0.5 * kPi / (1.0 + r * r);
  return std::atan(1.0 / v) / (1.0 + r * r);
}

namespace {

using ode::Flow;
using ode::State;
using ode::StepControl;

// Phase A (|dr/dtau| <= r): independent variable tau, y = (r, dr/dtau).
struct PhaseARhs {
  State<2> operator()(double, const State<2>& y) const {
    double r = y[0], p = y[1];
    return {p, r + 2.0 * p * p / r + r * (r * r + p * p)};
  }
};

// Phase B outward (v = (dr/dtau)/r >= ~1): independent variable r,
// y = (tau, u) with u = ln v.
struct PhaseBUpRhs {
  State<2> operator()(double r, const State<2>& y) const {
    double ev = std::exp(-y[1]);  // 1/v
    return {ev / r, (1.0 + ev * ev) * (1.0 + r * r) / r};
  }
};

// Phase B inward (v <= ~-1): independent variable s = -r (so the driver
// marches forward while the radius decreases), y = (tau, u = ln(-v)).
struct PhaseBDownRhs {
  State<2> operator()(double s, const State<2>& y) const {
    double r = -s;
    double ev = std::exp(-y[1]);  // 1/|v|
    return {ev / r, -(1.0 + ev * ev) * (1.0 + r * r) / r};
  }
};

double clamped_exp(double u) { return std::exp(std::min(u, 690.0)); }

}  // namespace

MarchResult march_graph(double tau0, double r0, double p0, const MarchStop& stop,
                        const GeodesicOptions& opts, bool record) {
  if (!(r0 > 0.0) || !std::isfinite(p0)) {
    throw std::invalid_argument("march_graph: requires r0 > 0 and finite slope");
  }
  if (stop.tau && !(*stop.tau > tau0)) {
    throw std::invalid_argument("march_graph: stop.tau must exceed tau0");
  }
  MarchResult out;
  double tau = tau0, r = r0, p = p0;
  const double r_need = std::max(opts.r_samples_min, 1.25 * r0);
  const double r_cap = std::max(opts.r_hard_cap, 1.35 * r0);

  out.samples.push_back({tau, r, p});
  if (record) out.samples.reserve(512);

  StepControl ctrl;
  ctrl.rtol = opts.rel_tol;
  ctrl.atol = opts.abs_tol;
  ctrl.max_steps = opts.max_steps;

  auto classify = [&]() -> bool {
    // True when the march is finished.
    if (stop.tau && std::abs(tau - *stop.tau) <= 1e-9 * (1.0 + std::abs(*stop.tau))) {
      out.reached_target = true;
      return true;
    }
    if (stop.r_up && p > 0.0 && std::abs(r - *stop.r_up) <= 1e-9 * (1.0 + *stop.r_up)) {
      out.reached_radius = true;
      return true;
    }
    return false;
  };

  // Explicit phase machine.  Re-deriving the phase from v would loop when a
  // phase lands exactly on its boundary, so transitions are forced: an
  // inward B march hands over to A, and A hands over to the outward B march.
  enum class Ph { A, BUp, BDown };
  double v0 = p / r;
  Ph ph = v0 >= 1.0 ? Ph::BUp : (v0 <= -1.0 ? Ph::BDown : Ph::A);
  bool terminated = false;
  for (int hops = 0; hops < 8 && !terminated; ++hops) {
    if (ph == Ph::BUp) {
      // ----- Phase B, outward march in r ------------------------------
      PhaseBUpRhs rhs;
      double v_in = p / r;
      if (!(v_in > 0.5)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "march_graph: outward B phase entered with v = " << v_in
            << " (tau = " << tau << ", r = " << r << ", p = " << p
            << ", hop = " << hops;
        if (stop.r_up) msg << ", r_up = " << *stop.r_up << ", r - r_up = " << r - *stop.r_up;
        msg << ")";
        throw std::logic_error(msg.str());
      }
      State<2> y{tau, std::log(v_in)};
      bool first = true;
      auto obs = [&](double rr, const State<2>& yy, const State<2>&) -> Flow {
        tau = yy[0];
        r = rr;
        p = rr * clamped_exp(yy[1]);
        if (!first && record) out.samples.push_back({tau, r, p});
        first = false;
        return Flow::proceed;
      };
      std::function<double(double, const State<2>&)> stop_fn =
          [&](double rr, const State<2>& yy) -> double {
        double bound = std::atan(std::exp(-yy[1])) / (1.0 + rr * rr);
        double g = std::min(rr - r_need, opts.tail_tol - bound);
        g = std::max(g, rr - r_cap);
        if (stop.tau) g = std::max(g, yy[0] - *stop.tau);
        if (stop.r_up) g = std::max(g, (rr - *stop.r_up) / (1.0 + *stop.r_up));
        return g;
      };
      StepControl c = ctrl;
      c.h_init = 1e-3;
      // Recorded marches keep cells small enough for accurate Hermite
      // reconstruction between samples; probing marches go fast.
      c.h_max = record ? 0.01 : 0.25;
      ode::integrate_adaptive<2>(rhs, r, y, c, obs, stop_fn);
      if (record && (out.samples.empty() || out.samples.back().theta != tau)) {
        out.samples.push_back({tau, r, p});
      }
      if (!classify()) {
        // Ideal exit (possibly at the hard cap, with an honest bound).
        out.ideal = true;
        out.asym_tau = tau;
        out.asym_bound = tail_angle_bound(r, p / r);
      }
      terminated = true;
    } else if (ph == Ph::BDown) {
      // ----- Phase B, inward march in s = -r --------------------------
      PhaseBDownRhs rhs;
      double v_in = -p / r;
      if (!(v_in > 0.5)) {
        throw std::logic_error("march_graph: inward B phase entered with v >= -0.5");
      }
      State<2> y{tau, std::log(v_in)};
      bool first = true;
      auto obs = [&](double ss, const State<2>& yy, const State<2>&) -> Flow {
        tau = yy[0];
        r = -ss;
        p = -r * clamped_exp(yy[1]);
        if (!first && record) out.samples.push_back({tau, r, p});
        first = false;
        return Flow::proceed;
      };
      std::function<double(double, const State<2>&)> stop_fn =
          [&](double, const State<2>& yy) -> double {
        double g = -yy[1];  // u reaches 0, i.e. v reaches -1
        if (stop.tau) g = std::max(g, yy[0] - *stop.tau);
        return g;
      };
      StepControl c = ctrl;
      c.h_init = 1e-3;
      c.h_max = record ? 0.01 : 0.25;
      ode::integrate_adaptive<2>(rhs, -r, y, c, obs, stop_fn);
      if (record && (out.samples.empty() || out.samples.back().theta != tau)) {
        out.samples.push_back({tau, r, p});
      }
      if (classify()) terminated = true;
      else ph = Ph::A;  // v is now about -1
    } else {
      // ----- Phase A, march in tau -------------------------------------
      PhaseARhs rhs;
      State<2> y{r, p};
      bool first = true;
      auto obs = [&](double tt, const State<2>& yy, const State<2>&) -> Flow {
        tau = tt;
        r = yy[0];
        p = yy[1];
        if (!first && record) out.samples.push_back({tau, r, p});
        first = false;
        return Flow::proceed;
      };
      std::function<double(double, const State<2>&)> stop_fn =
          [&](double tt, const State<2>& yy) -> double {
        // All terms are kept O(1) so the crossing search is well scaled even
        // for passes very close to the origin.
        double g = yy[1] / yy[0] - 1.0;  // v reaches +1
        if (stop.tau) g = std::max(g, tt - *stop.tau);
        if (stop.r_up && yy[1] > 0.0) {
          g = std::max(g, (yy[0] - *stop.r_up) / (1.0 + *stop.r_up));
        }
        return g;
      };
      StepControl c = ctrl;
      c.h_init = 1e-3;
      c.h_max = 0.025;
      ode::integrate_adaptive<2>(rhs, tau, y, c, obs, stop_fn);
      if (record && (out.samples.empty() || out.samples.back().theta != tau)) {
        out.samples.push_back({tau, r, p});
      }
      if (classify()) terminated = true;
      else ph = Ph::BUp;  // v is now about +1
    }
  }
  if (!terminated) {
    throw std::runtime_error("march_graph: phase transitions did not terminate");
  }
  if (!record) {
    PolarGraphState head = out.samples.front();
    out.samples.clear();
    out.samples.push_back(head);
    out.samples.push_back({tau, r, p});
  }
  return out;
}

}  // namespace detail

namespace {

double cubic_hermite(double t, double y0, double m0h, double y1, double m1h) {
  double d = y1 - y0;
  double c2 = 3.0 * d - 2.0 * m0h - m1h;
  double c3 = m0h + m1h - 2.0 * d;
  return y0 + t * (m0h + t * (c2 + t * c3));
}

// Is the polar-graph cell between two samples better parametrized by r?
bool steep_cell(const PolarGraphState& a, const PolarGraphState& b) {
  double h = std::abs(b.theta - a.theta);
  double rbar = std::max(a.r, b.r);
  return std::abs(b.r - a.r) > 4.0 * rbar * h;
}

// Radius at angle th inside the cell [a, b] (a.theta <= th <= b.theta).
double cell_eval_r(const PolarGraphState& a, const PolarGraphState& b, double th) {
  double h = b.theta - a.theta;
  if (!steep_cell(a, b)) {
    double t = (th - a.theta) / h;
    return cubic_hermite(t, a.r, h * a.dr, b.r, h * b.dr);
  }
  // Steep cell: invert theta(r), which is monotone here.
  if (std::abs(h) < 1e-15) return std::min(a.r, b.r);
  double dr = b.r - a.r;
  auto theta_at = [&](double t) {
    return cubic_hermite(t, a.theta, dr / a.dr, b.theta, dr / b.dr);
  };
  double lo = 0.0, hi = 1.0;
  bool increasing = h > 0.0;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if ((theta_at(mid) < th) == increasing) lo = mid; else hi = mid;
  }
  return a.r + 0.5 * (lo + hi) * dr;
}

// Illinois-type bracketed root find for an increasing function.
template <class F>
double bracketed_root(F&& f, double a, double b, double fa, double fb,
                      double xtol, double ftol, const char* what) {
  if (!(fa < 0.0 && fb > 0.0)) {
    std::ostringstream msg;
    msg << what << ": root not bracketed (f(" << a << ") = " << fa << ", f(" << b
        << ") = " << fb << ")";
    throw std::runtime_error(msg.str());
  }
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (b - a <= xtol) break;
    double c = a - fa * (b - a) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    double fc = f(c);
    if (std::abs(fc) <= ftol) return c;
    if (fc < 0.0) {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = c;
      fb = fc;
      if (side == +1) fa *= 0.5;
      side = +1;
    }
  }
  return 0.5 * (a + b);
}

// Same, but first tries a narrow bracket around a warm-start hint.
template <class F>
double warm_root(F&& f, double lo, double hi, std::optional<double> hint,
                 double xtol, double ftol, const char* what) {
  if (hint && *hint > lo && *hint < hi) {
    double w = 1e-3 * (hi - lo);
    double a = std::max(lo, *hint - w), b = std::min(hi, *hint + w);
    double fa = f(a), fb = f(b);
    for (int grow = 0; grow < 5 && !(fa < 0.0 && fb > 0.0); ++grow) {
      if (fa >= 0.0) {
        a = std::max(lo, a - 8.0 * (b - a));
        fa = f(a);
      } else {
        b = std::min(hi, b + 8.0 * (b - a));
        fb = f(b);
      }
    }
    if (fa < 0.0 && fb > 0.0) return bracketed_root(f, a, b, fa, fb, xtol, ftol, what);
  }
  double fa = f(lo), fb = f(hi);
  return bracketed_root(f, lo, hi, fa, fb, xtol, ftol, what);
}

// Apex of the untruncated geodesic through the arc's samples.
void fill_apex(GeodesicArc& arc, const GeodesicOptions& opts) {
  const auto& S = arc.samples;
  std::size_t best = 0;
  for (std::size_t i = 1; i < S.size(); ++i) {
    if (S[i].r < S[best].r) best = i;
  }
  const PolarGraphState& s = S[best];
  double c = clairaut_constant(s);
  if (!(c > 0.0) || !std::isfinite(c)) {
    arc.apex_r = 0.0;
    arc.apex_theta = s.theta;
    return;
  }
  arc.apex_r = apex_radius_from_clairaut(c);
  double v = s.dr / s.r;
  if (std::abs(v) < 1e-12 || arc.apex_r >= s.r) {
    arc.apex_theta = s.theta;
    return;
  }
  detail::MarchStop st;
  st.r_up = s.r;
  auto m = detail::march_graph(0.0, arc.apex_r, 0.0, st, opts, false);
  double dtau = m.samples.back().theta;
  arc.apex_theta = v > 0.0 ? s.theta - dtau : s.theta + dtau;
}

GeodesicArc make_line(const ArcEndpoint& e1, const ArcEndpoint& e2, Vec2 anchor,
                      Vec2 dir, double s1, double s2) {
  GeodesicArc arc;
  arc.kind = ArcKind::origin_line;
  arc.end1 = e1;
  arc.end2 = e2;
  arc.line_anchor = anchor;
  arc.line_dir = dir;
  arc.line_s1 = s1;
  arc.line_s2 = s2;
  return arc;
}

// Translate a frame march (tau from 0) into a world-coordinate arc.
// World angle = theta_base + flip * tau.
GeodesicArc assemble_graph_arc(const detail::MarchResult& m, double theta_base,
                               int flip, const ArcEndpoint& e1, const ArcEndpoint& e2,
                               double miss, const GeodesicOptions& opts) {
  GeodesicArc arc;
  arc.kind = ArcKind::graph;
  arc.end1 = e1;
  arc.end2 = e2;
  arc.endpoint_miss = miss;
  const auto& S = m.samples;
  arc.samples.reserve(S.size());
  if (flip > 0) {
    for (const auto& s : S) arc.samples.push_back({theta_base + s.theta, s.r, s.dr});
    arc.end1_low = true;
  } else {
    for (auto it = S.rbegin(); it != S.rend(); ++it) {
      arc.samples.push_back({theta_base - it->theta, it->r, -it->dr});
    }
    arc.end1_low = false;
  }
  if (m.ideal) {
    double asym = theta_base + flip * m.asym_tau;
    if (flip > 0) arc.asym_high = asym; else arc.asym_low = asym;
    arc.asym_bound = m.asym_bound;
  }
  if (opts.compute_apex) fill_apex(arc, opts);
  return arc;
}

GeodesicArc reversed(GeodesicArc a) {
  std::swap(a.end1, a.end2);
  if (a.kind == ArcKind::origin_line) {
    a.line_dir = -a.line_dir;
    double s1 = -a.line_s2, s2 = -a.line_s1;
    a.line_s1 = s1;
    a.line_s2 = s2;
  } else {
    a.end1_low = !a.end1_low;
  }
  return a;
}

void append_width_table(std::ostringstream& msg, const GeodesicOptions& opts) {
  msg << "; width samples:";
  for (double r0 : {0.05, 0.2, 1.0, 2.0, 5.0, 10.0}) {
    msg << " w(" << r0 << ")=" << width(r0, opts);
  }
}

double solve_width(double delta, const GeodesicOptions& opts,
                   std::optional<double> hint_lnr0) {
  auto f = [&](double x) { return delta - width(std::exp(x), opts); };
  double g = std::max(std::sqrt(std::max(kPi / delta - 1.0, 1e-12)), 1e-8);
  double xg = hint_lnr0.value_or(std::log(g));
  double lo = xg, hi = xg;
  double flo = f(lo), fhi = flo;
  int guard = 0;
  while (flo >= 0.0) {
    lo -= 1.0;
    flo = f(lo);
    if (++guard > 700) break;
  }
  guard = 0;
  while (fhi <= 0.0) {
    hi += 1.0;
    fhi = f(hi);
    if (++guard > 12) break;
  }
  if (!(flo < 0.0 && fhi > 0.0)) {
    std::ostringstream msg;
    msg << "connect: no apex radius matches opening angle " << delta;
    append_width_table(msg, opts);
    throw std::runtime_error(msg.str());
  }
  return std::exp(bracketed_root(f, lo, hi, flo, fhi, 1e-14, 1e-13, "solve_width"));
}

constexpr double kOriginEps = 1e-13;   // points closer than this are "the origin"
constexpr double kAngularEps = 5e-13;  // angular window treated as exactly (anti)radial
// Endpoints closer to the origin than this connect via the limiting straight
// line: marching from such radii underflows the integrator, while the line's
// tangent error is O(r) and vanishes at the origin itself, so balance solves
// converging to an origin junction stay consistent through the window.
constexpr double kNearOriginEps = 1e-6;
// Within this angular window of radial or antiradial alignment the straight
// chord deviates from the true geodesic by O(r^2 * gap) < 1e-9 in the
// tangents, while the shooting problems degenerate (their roots collide with
// the bracket ends); such pairs are treated as exactly aligned.
constexpr double kChordWindow = 2e-8;
constexpr double kMaxInteriorRadius = 25.0;

void check_interior(Vec2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw std::invalid_argument("connect: non-finite interior point");
  }
  if (p.norm() > kMaxInteriorRadius) {
    throw std::invalid_argument("connect: interior point outside supported radius 25");
  }
}

GeodesicArc connect_ideal_ideal(IdealPoint A, IdealPoint B, const GeodesicOptions& opts,
                                ConnectScratch* scratch) {
  double alpha = A.angle, beta = B.angle;
  double delta = angle_diff(beta, alpha);
  ArcEndpoint e1{true, {}, wrap_angle(alpha)};
  ArcEndpoint e2{true, {}, wrap_angle(beta)};
  if (std::abs(delta) < kAngularEps) {
    throw std::invalid_argument("connect: coincident ideal points");
  }
  if (std::abs(std::abs(delta) - kPi) < kAngularEps) {
    // Antipodal ideal points: the line through the origin.
    return make_line(e1, e2, {0.0, 0.0}, unit_vector(beta), 0.0, 0.0);
  }
  double gap = std::abs(delta);
  double theta0 = alpha + 0.5 * delta;
  std::optional<double> hint;
  if (scratch && scratch->shoot_param) hint = scratch->shoot_param;
  double r0 = solve_width(gap, opts, hint);
  if (scratch) scratch->shoot_param = std::log(r0);
  GeodesicArc arc = shoot_from_apex(theta0, r0, opts);
  arc.endpoint_miss =
      std::abs((arc.asym_high - arc.asym_low) - gap);
  arc.end1 = e1;
  arc.end2 = e2;
  arc.end1_low = delta > 0.0;
  return arc;
}

GeodesicArc connect_interior_ideal(Vec2 p, IdealPoint B, const GeodesicOptions& opts,
                                   ConnectScratch* scratch) {
  check_interior(p);
  double beta = B.angle;
  ArcEndpoint e1{false, p, 0.0};
  ArcEndpoint e2{true, {}, wrap_angle(beta)};
  double rp = p.norm();
  if (rp < kNearOriginEps) {
    return make_line(e1, e2, p, unit_vector(beta), 0.0, 0.0);
  }
  double thp = p.angle();
  double delta = angle_diff(beta, thp);
  if (std::abs(delta) < kChordWindow || std::abs(std::abs(delta) - kPi) < kChordWindow) {
    // Radial ray outward, or through the origin and out the other side.
    return make_line(e1, e2, p, unit_vector(beta), 0.0, 0.0);
  }
  int flip = delta > 0.0 ? 1 : -1;
  double dtau = std::abs(delta);
  auto asym_of = [&](double phi) {
    double p0 = rp * std::cos(phi) / std::sin(phi);
    try {
      auto m = detail::march_graph(0.0, rp, p0, {}, opts, false);
      return m.asym_tau;
    } catch (const std::runtime_error&) {
      // Step underflow: the trial dives through an unresolvably small pass
      // radius, i.e. essentially through the origin, spanning a half turn.
      return kPi;
    }
  };
  auto f = [&](double phi) { return asym_of(phi) - dtau; };
  std::optional<double> hint;
  if (scratch && scratch->shoot_param) hint = scratch->shoot_param;
  double phi;
  try {
    phi = warm_root(f, 1e-9, kPi - 1e-9, hint, 5e-16, 1e-13, "connect(point, ideal)");
  } catch (const std::runtime_error& err) {
    std::ostringstream msg;
    msg << "connect(point, ideal): shooting failed for |p| = " << rp
        << ", target offset " << dtau << " (" << err.what() << "); asymptote samples:";
    for (double q : {0.02, 0.5, 1.5, kPi - 0.02}) msg << " A(" << q << ")=" << asym_of(q);
    throw std::runtime_error(msg.str());
  }
  if (scratch) scratch->shoot_param = phi;
  double p0 = rp * std::cos(phi) / std::sin(phi);
  auto m = detail::march_graph(0.0, rp, p0, {}, opts, opts.record_samples);
  double miss = std::abs(m.asym_tau - dtau);
  GeodesicArc arc = assemble_graph_arc(m, thp, flip, e1, e2, miss, opts);
  return arc;
}

GeodesicArc connect_interior_interior(Vec2 p, Vec2 q, const GeodesicOptions& opts,
                                      ConnectScratch* scratch) {
  check_interior(p);
  check_interior(q);
  if (distance(p, q) < kOriginEps) {
    throw std::invalid_argument("connect: coincident interior points");
  }
  ArcEndpoint e1{false, p, 0.0};
  ArcEndpoint e2{false, q, 0.0};
  double rp = p.norm(), rq = q.norm();
  if (rp < kNearOriginEps || rq < kNearOriginEps ||
      std::abs(cross(p, q)) <= kChordWindow * rp * rq) {
    Vec2 dir = (q - p).normalized();
    return make_line(e1, e2, p, dir, 0.0, distance(p, q));
  }
  if (rp > rq) {
    // Shoot from the endpoint nearer the origin: at the outer endpoint the
    // launch angle is pinned against radial to within ~ c / (r e^{r^2/2}),
    // which underflows the shooting bracket already for r ~ 6.
    return reversed(connect_interior_interior(q, p, opts, scratch));
  }
  double thp = p.angle();
  double delta = angle_diff(q.angle(), thp);
  int flip = delta > 0.0 ? 1 : -1;
  double dtau = std::abs(delta);
  detail::MarchStop st;
  st.tau = dtau;
  auto f = [&](double phi) {
    double p0 = rp * std::cos(phi) / std::sin(phi);
    detail::MarchResult m;
    try {
      m = detail::march_graph(0.0, rp, p0, st, opts, false);
    } catch (const std::runtime_error&) {
      // Step underflow: the trial dives through an unresolvably small pass
      // radius and would land far below the target; steer back outward.
      return 2e3;
    }
    if (!m.reached_target) {
      // Escaped to the ideal boundary (or the radius cap) first.
      return -1e3 - std::max(0.0, dtau - m.asym_tau);
    }
    return std::log(rq / m.samples.back().r);
  };
  std::optional<double> hint;
  if (scratch && scratch->shoot_param) hint = scratch->shoot_param;
  double phi;
  try {
    phi = warm_root(f, 1e-9, kPi - 1e-9, hint, 5e-16, 1e-14, "connect(point, point)");
  } catch (const std::runtime_error& err) {
    std::ostringstream msg;
    msg << "connect(point, point): shooting failed for |p| = " << rp << ", |q| = "
        << rq << ", offset " << dtau << " (" << err.what() << "); miss samples:";
    for (double qq : {0.02, 0.8, 1.6, 2.4, kPi - 0.02}) msg << " f(" << qq << ")=" << f(qq);
    throw std::runtime_error(msg.str());
  }
  if (scratch) scratch->shoot_param = phi;
  double p0 = rp * std::cos(phi) / std::sin(phi);
  auto m = detail::march_graph(0.0, rp, p0, st, opts, opts.record_samples);
  if (!m.reached_target) {
    throw std::runtime_error("connect(point, point): final march missed the target angle");
  }
  double miss = std::abs(m.samples.back().r - rq);
  m.samples.back().r = rq;  // snap; the miss is recorded on the arc
  return assemble_graph_arc(m, thp, flip, e1, e2, miss, opts);
}

}  // namespace

// ---------------------------------------------------------------------------
// GeodesicArc queries
// ---------------------------------------------------------------------------

Vec2 GeodesicArc::endpoint(int which) const {
  const ArcEndpoint& e = which == 1 ? end1 : end2;
  if (e.ideal) throw std::invalid_argument("GeodesicArc::endpoint: ideal end");
  return e.point;
}

Vec2 GeodesicArc::inward_tangent(int which) const {
  if (kind == ArcKind::origin_line) {
    return which == 1 ? line_dir : -line_dir;
  }
  bool at_low = which == 1 ? end1_low : !end1_low;
  const PolarGraphState& s = at_low ? samples.front() : samples.back();
  Vec2 t = graph_tangent(s);
  return at_low ? t : -t;
}

double GeodesicArc::eval_r_lb(double theta) const {
  if (kind != ArcKind::graph || samples.empty()) {
    throw std::invalid_argument("eval_r_lb: not a graph arc");
  }
  if (theta <= samples.front().theta) return samples.front().r;
  if (theta >= samples.back().theta) return samples.back().r;
  auto it = std::upper_bound(
      samples.begin(), samples.end(), theta,
      [](double th, const PolarGraphState& s) { return th < s.theta; });
  const PolarGraphState& b = *it;
  const PolarGraphState& a = *(it - 1);
  return cell_eval_r(a, b, theta);
}

std::vector<Vec2> GeodesicArc::polyline(double r_max, double max_ds) const {
  if (!(r_max > 0.0) || !(max_ds > 0.0)) {
    throw std::invalid_argument("polyline: r_max and max_ds must be positive");
  }
  std::vector<Vec2> raw;
  if (kind == ArcKind::origin_line) {
    // Solve |anchor + s dir| = r_max for the ideal extents.
    double ad = dot(line_anchor, line_dir);
    double disc = ad * ad - (line_anchor.norm2() - r_max * r_max);
    double lo = line_s1, hi = line_s2;
    if (disc > 0.0) {
      double root = std::sqrt(disc);
      if (end1.ideal) lo = -ad - root;
      if (end2.ideal) hi = -ad + root;
    }
    if (hi < lo) std::swap(lo, hi);
    long n = std::max(1L, std::lround(std::ceil((hi - lo) / max_ds)));
    n = std::min(n, 2'000'000L);
    for (long j = 0; j <= n; ++j) {
      double s = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n);
      raw.push_back(line_anchor + s * line_dir);
    }
  } else {
    bool low_ideal = end1_low ? end1.ideal : end2.ideal;
    bool high_ideal = end1_low ? end2.ideal : end1.ideal;
    // Ray tail below the first sample (the curve there matches the
    // asymptote direction to within asym_bound).
    if (low_ideal && samples.front().r < r_max) {
      Vec2 u = unit_vector(asym_low);
      double r0 = samples.front().r;
      long n = std::max(1L, std::lround(std::ceil((r_max - r0) / max_ds)));
      n = std::min(n, 2'000'000L);
      for (long j = 0; j <= n; ++j) {
        double rr = r_max + (r0 - r_max) * static_cast<double>(j) / static_cast<double>(n);
        raw.push_back(rr * u);
      }
      raw.pop_back();  // the first sample point follows
    }
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      const PolarGraphState& a = samples[i];
      const PolarGraphState& b = samples[i + 1];
      if (i == 0) raw.push_back(graph_point(a));
      double rbar = 0.5 * (a.r + b.r);
      double len = std::hypot(b.r - a.r, rbar * (b.theta - a.theta));
      long n = std::max(1L, std::lround(std::ceil(len / max_ds)));
      n = std::min(n, 200'000L);
      bool steep = steep_cell(a, b);
      double h = b.theta - a.theta;
      double dr = b.r - a.r;
      for (long j = 1; j <= n; ++j) {
        double t = static_cast<double>(j) / static_cast<double>(n);
        double th, rr;
        if (!steep) {
          th = a.theta + t * h;
          rr = cubic_hermite(t, a.r, h * a.dr, b.r, h * b.dr);
        } else {
          rr = a.r + t * dr;
          th = std::abs(a.dr) > 0.0 && std::abs(b.dr) > 0.0
                   ? cubic_hermite(t, a.theta, dr / a.dr, b.theta, dr / b.dr)
                   : a.theta + t * h;
        }
        raw.push_back(rr * unit_vector(th));
      }
    }
    if (high_ideal && samples.back().r < r_max) {
      Vec2 u = unit_vector(asym_high);
      double r0 = samples.back().r;
      long n = std::max(1L, std::lround(std::ceil((r_max - r0) / max_ds)));
      n = std::min(n, 2'000'000L);
      for (long j = 1; j <= n; ++j) {
        double rr = r0 + (r_max - r0) * static_cast<double>(j) / static_cast<double>(n);
        raw.push_back(rr * u);
      }
    }
    if (!end1_low) std::reverse(raw.begin(), raw.end());
  }
  // Junction endpoints must be bitwise-exact across arcs (shared endpoints
  // are what lets the crossing test ignore meetings at a common vertex), so
  // replace the polar-roundtripped ends with the stored points.
  if (!raw.empty()) {
    if (!end1.ideal) raw.front() = end1.point;
    if (!end2.ideal) raw.back() = end2.point;
  }
  // Clip to |p| <= r_max, inserting boundary crossings.
  std::vector<Vec2> out;
  out.reserve(raw.size());
  auto crossing = [&](Vec2 in, Vec2 outp) {
    // |in| <= r_max < |outp|: point on the segment at radius r_max.
    Vec2 d = outp - in;
    double aa = d.norm2();
    double bb = 2.0 * dot(in, d);
    double cc = in.norm2() - r_max * r_max;
    double disc = std::max(0.0, bb * bb - 4.0 * aa * cc);
    double t = (-bb + std::sqrt(disc)) / (2.0 * aa);
    return in + std::clamp(t, 0.0, 1.0) * d;
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    bool inside = raw[i].norm() <= r_max * (1.0 + 1e-12);
    if (inside) {
      if (i > 0 && out.empty()) {
        out.push_back(crossing(raw[i], raw[i - 1]));
      }
      out.push_back(raw[i]);
    } else if (!out.empty()) {
      out.push_back(crossing(out.back(), raw[i]));
      break;  // arcs leave the disk at most once per end
    }
  }
  return out;
}

double GeodesicArc::truncated_g_length(double r_max, double max_ds) const {
  auto pts = polyline(r_max, max_ds);
  if (pts.size() < 2) return 0.0;
  return g_length(pts);
}

double GeodesicArc::max_soliton_residual() const {
  if (kind == ArcKind::origin_line) return 0.0;
  double worst = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.dr)) continue;
    double kappa = curvature_of_graph(s, polar_ode_rhs(s));
    double res = soliton_residual(graph_point(s), graph_tangent(s), kappa);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double asymptote_error_bound(const GeodesicArc& arc, int which, double R) {
  if (arc.kind == ArcKind::origin_line) return 0.0;
  const ArcEndpoint& e = which == 1 ? arc.end1 : arc.end2;
  if (!e.ideal) throw std::invalid_argument("asymptote_error_bound: end is not ideal");
  if (!(R >= arc.apex_r)) {
    throw std::invalid_argument("asymptote_error_bound: R below the apex radius");
  }
  bool at_low = which == 1 ? arc.end1_low : !arc.end1_low;
  // Walk outward along the requested tail; take the outermost sample with
  // radius <= R (monotone tail, conservative v).
  const auto& S = arc.samples;
  const PolarGraphState* pick = nullptr;
  if (at_low) {
    for (auto it = S.begin(); it != S.end(); ++it) {
      if (it->r <= R) { pick = &*it; break; }
    }
    if (!pick) pick = &S.front();
  } else {
    for (auto it = S.rbegin(); it != S.rend(); ++it) {
      if (it->r <= R) { pick = &*it; break; }
    }
    if (!pick) pick = &S.back();
  }
  double v = std::abs(pick->dr) / pick->r;
  double bound = v > 0.0 ? std::atan(1.0 / v) / (1.0 + R * R)
                         : 0.5 * kPi / (1.0 + R * R);
  return bound + arc.asym_bound;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

GeodesicArc shoot_from_apex(double theta0, double r0, const GeodesicOptions& opts) {
  if (r0 < 0.0 || !std::isfinite(r0) || !std::isfinite(theta0)) {
    throw std::invalid_argument("shoot_from_apex: requires finite theta0 and r0 >= 0");
  }
  if (r0 < 1e-300) {
    // Degenerate apex at the origin: the perpendicular line through it.
    ArcEndpoint e1{true, {}, wrap_angle(theta0 - 0.5 * kPi)};
    ArcEndpoint e2{true, {}, wrap_angle(theta0 + 0.5 * kPi)};
    GeodesicArc arc = make_line(e1, e2, {0.0, 0.0}, unit_vector(theta0 + 0.5 * kPi), 0.0, 0.0);
    arc.apex_r = 0.0;
    arc.apex_theta = theta0;
    return arc;
  }
  auto m = detail::march_graph(0.0, r0, 0.0, {}, opts, true);
  if (!m.ideal) {
    throw std::runtime_error("shoot_from_apex: march did not reach the ideal boundary");
  }
  GeodesicArc arc;
  arc.kind = ArcKind::graph;
  const auto& S = m.samples;
  arc.samples.reserve(2 * S.size() - 1);
  // The two branches are mirror images of one another; the numerical
  // trajectory is identical, so reflect it instead of re-integrating.
  for (auto it = S.rbegin(); it != S.rend() - 1; ++it) {
    arc.samples.push_back({theta0 - it->theta, it->r, -it->dr});
  }
  for (const auto& s : S) arc.samples.push_back({theta0 + s.theta, s.r, s.dr});
  arc.apex_r = r0;
  arc.apex_theta = theta0;
  arc.asym_low = theta0 - m.asym_tau;
  arc.asym_high = theta0 + m.asym_tau;
  arc.asym_bound = m.asym_bound;
  arc.end1 = {true, {}, wrap_angle(arc.asym_low)};
  arc.end2 = {true, {}, wrap_angle(arc.asym_high)};
  arc.end1_low = true;
  return arc;
}

double width(double r0, const GeodesicOptions& opts) {
  if (!(r0 > 0.0)) throw std::invalid_argument("width: requires r0 > 0");
  auto m = detail::march_graph(0.0, r0, 0.0, {}, opts, false);
  if (!m.ideal) throw std::runtime_error("width: march did not reach the ideal boundary");
  return 2.0 * m.asym_tau;
}

GeodesicArc connect(const BoundaryPoint& a, const BoundaryPoint& b,
                    const GeodesicOptions& opts, ConnectScratch* scratch) {
  const bool a_ideal = std::holds_alternative<IdealPoint>(a);
  const bool b_ideal = std::holds_alternative<IdealPoint>(b);
  if (a_ideal && b_ideal) {
    return connect_ideal_ideal(std::get<IdealPoint>(a), std::get<IdealPoint>(b), opts,
                               scratch);
  }
  if (!a_ideal && b_ideal) {
    return connect_interior_ideal(std::get<Vec2>(a), std::get<IdealPoint>(b), opts,
                                  scratch);
  }
  if (a_ideal && !b_ideal) {
    return reversed(
        connect_interior_ideal(std::get<Vec2>(b), std::get<IdealPoint>(a), opts, scratch));
  }
  return connect_interior_interior(std::get<Vec2>(a), std::get<Vec2>(b), opts, scratch);
}

}  // namespace steinerflow
