#ifndef STEINERFLOW_GEODESICS_HPP_
#define STEINERFLOW_GEODESICS_HPP_

// Geodesics of g = e^{x^2+y^2}(dx^2+dy^2), i.e. expander soliton curves.
//
// Every complete geodesic is either a straight line through the origin or
// a polar graph r(theta) over an open interval of width < pi, symmetric
// about a unique apex (the point closest to the origin), with r -> infty
// at both ends and well-defined asymptote directions.  Arcs of geodesics
// are represented by GeodesicArc; the two-point boundary problem between
// any combination of interior and ideal points is solved by connect().

#include <optional>
#include <variant>
#include <vector>

#include "steinerflow/geometry.hpp"
#include "steinerflow/vec2.hpp"

namespace steinerflow {

struct GeodesicOptions {
  double rel_tol = 1e-10;       // adaptive step relative tolerance
  double abs_tol = 1e-14;
  double tail_tol = 1e-12;      // drop the tail once its angular error bound is below this
  double r_samples_min = 12.5;  // minimum radius reached by stored samples on ideal ends
  double r_hard_cap = 30.0;     // absolute outward cap (e^{r^2/2} overflows near r = 38)
  bool compute_apex = true;     // locate the apex of connect() arcs (skippable for speed)
  // When false, connect() keeps only the two endpoint samples of graph arcs:
  // endpoints and tangents stay exact but eval_r_lb/polyline are unusable.
  // Balance solvers flip this off (with compute_apex) for speed.
  bool record_samples = true;
  long max_steps = 2'000'000;
};

enum class ArcKind { origin_line, graph };

// One end of an arc: either a finite point or an ideal boundary point.
struct ArcEndpoint {
  bool ideal = false;
  Vec2 point{};        // finite end (ideal == false)
  double angle = 0.0;  // ideal direction (ideal == true)
};

struct GeodesicArc {
  ArcKind kind = ArcKind::graph;
  ArcEndpoint end1, end2;

  // --- origin_line arcs ------------------------------------------------
  // Points are anchor + s * dir.  Traversal from end 1 to end 2 is in
  // increasing s; an ideal end extends the parameter to +-infinity.
  Vec2 line_anchor{};
  Vec2 line_dir{1.0, 0.0};
  double line_s1 = 0.0, line_s2 = 0.0;

  // --- graph arcs --------------------------------------------------------
  // Samples of the polar graph, theta strictly increasing.  end1 is the
  // low-theta end iff end1_low.
  std::vector<PolarGraphState> samples;
  bool end1_low = true;
  // Apex of the untruncated geodesic carrying this arc (its closest
  // approach to the origin), whether or not the arc contains it.
  double apex_r = 0.0;
  double apex_theta = 0.0;
  // Asymptote directions at the low/high-theta ends (meaningful when the
  // corresponding end is ideal), with a rigorous bound on the recording
  // error, and the boundary-value miss left by the shooting solve.
  double asym_low = 0.0;
  double asym_high = 0.0;
  double asym_bound = 0.0;
  double endpoint_miss = 0.0;

  // Unit tangent at the given finite end (1 or 2), pointing into the arc.
  Vec2 inward_tangent(int which) const;
  Vec2 endpoint(int which) const;  // finite ends only

  // Graph arcs: interpolated radius at a polar angle inside the sampled
  // range (cubic Hermite).  For angles beyond an ideal end's samples
  // returns the last sample radius, which is a lower bound there.
  double eval_r_lb(double theta) const;

  // Cartesian polyline in traversal order from end 1 to end 2, truncated
  // to |p| <= r_max, with spacing about max_ds.  Ideal tails beyond the
  // stored samples continue along the asymptote ray.
  std::vector<Vec2> polyline(double r_max, double max_ds) const;

  double truncated_g_length(double r_max, double max_ds = 1e-3) const;

  // Largest |kappa - <p, nu>| over the stored samples (0 for lines).
  double max_soliton_residual() const;
};

// Rigorous bound on |theta - asymptote| valid at every point of the arc
// beyond radius R on the given ideal end (which = 1 or 2).
double asymptote_error_bound(const GeodesicArc& arc, int which, double R);

// The complete geodesic with apex (r0, theta0), r0 > 0.  Both ends ideal.
// r0 == 0 degenerates to the line through the origin perpendicular to the
// theta0 ray.
GeodesicArc shoot_from_apex(double theta0, double r0,
                            const GeodesicOptions& opts = {});

// Opening angle b - a between the two asymptotes of the geodesic with
// apex radius r0.  Strictly decreasing in r0, with width < pi/(1+r0^2).
double width(double r0, const GeodesicOptions& opts = {});

using BoundaryPoint = std::variant<Vec2, IdealPoint>;

// Warm-start scratch for repeated nearby connect() calls (optional).
struct ConnectScratch {
  std::optional<double> shoot_param;
};

// Unique geodesic arc joining two boundary points (interior or ideal).
// Throws std::invalid_argument for coincident endpoints and
// std::runtime_error if the shooting solve fails.
GeodesicArc connect(const BoundaryPoint& a, const BoundaryPoint& b,
                    const GeodesicOptions& opts = {},
                    ConnectScratch* scratch = nullptr);

namespace detail {

// March the polar graph ODE in an internal frame where the graph angle
// tau increases from tau0.  State: r(tau) with p = dr/dtau.
struct MarchResult {
  std::vector<PolarGraphState> samples;  // (tau, r, dr/dtau), tau increasing
  bool reached_target = false;  // stopped at tau == stop_tau
  bool reached_radius = false;  // stopped at r == stop_r_up while moving out
  bool ideal = false;           // escaped; asymptote recorded
  double asym_tau = 0.0;
  double asym_bound = 0.0;
};

struct MarchStop {
  std::optional<double> tau;   // stop exactly at this frame angle
  std::optional<double> r_up;  // stop exactly at this radius while outgoing
};

// When record is false only the initial and terminal states are kept.
MarchResult march_graph(double tau0, double r0, double p0, const MarchStop& stop,
                        const GeodesicOptions& opts, bool record = true);

// arctan(1/v) / (1 + r^2): bound on the remaining angle to the asymptote
// from a state with radius r and v = (dr/dtau)/r >= some positive value.
double tail_angle_bound(double r, double v);

}  // namespace detail

}  // namespace steinerflow

#endif  // STEINERFLOW_GEODESICS_HPP_
