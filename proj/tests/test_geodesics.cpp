#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "steinerflow/geodesics.hpp"
#include "steinerflow/geometry.hpp"

using namespace steinerflow;

namespace {
// Interpolated radius at a given angle; thin wrapper for readability.
double eval_r(const GeodesicArc& arc, double theta) { return arc.eval_r_lb(theta); }
}  // namespace

TEST_CASE("width: frozen reference values") {
  // Quadrature of the Clairaut closed form and an independent adaptive
  // integration agree on these to ~3e-11.
  CHECK(width(0.05) == doctest::Approx(3.016375751300).epsilon(5e-10));
  CHECK(width(0.1) == doctest::Approx(2.891841753243).epsilon(5e-10));
  CHECK(width(0.5) == doctest::Approx(1.988090759178).epsilon(5e-10));
  CHECK(width(1.0) == doctest::Approx(1.220771643187).epsilon(5e-10));
  CHECK(width(2.0) == doctest::Approx(0.532853431878).epsilon(5e-10));
  CHECK(width(5.0) == doctest::Approx(0.115339259838).epsilon(5e-10));
  CHECK(width(10.0) == doctest::Approx(0.030696842543).epsilon(5e-10));
  CHECK(width(20.0) == doctest::Approx(0.007807627662).epsilon(5e-10));
  CHECK_THROWS_AS(width(0.0), std::invalid_argument);
  CHECK_THROWS_AS(width(-1.0), std::invalid_argument);
}

TEST_CASE("width: bounded by pi/(1+r0^2), decreasing, asymptotics") {
  double prev = kPi;
  for (double r0 = 0.01; r0 < 24.0; r0 *= 1.45) {
    double w = width(r0);
    CHECK(w < kPi / (1.0 + r0 * r0));
    CHECK(w > 0.0);
    CHECK(w < prev);
    prev = w;
  }
  // Small-apex behaviour: pi - width ~ sqrt(2 pi) r0.
  for (double r0 : {1e-3, 1e-5, 1e-7}) {
    double gap = kPi - width(r0);
    CHECK(gap / r0 == doctest::Approx(std::sqrt(2.0 * kPi)).epsilon(2e-2 + 1e3 * r0));
  }
}

TEST_CASE("shoot_from_apex: frozen samples on the r0 = 1 geodesic") {
  GeodesicArc arc = shoot_from_apex(0.25, 1.0);
  CHECK(arc.kind == ArcKind::graph);
  CHECK(arc.apex_r == 1.0);
  CHECK(arc.apex_theta == 0.25);
  // r at offsets 0.30 and 0.55 from the apex (reference ODE solve).
  CHECK(eval_r(arc, 0.25 + 0.30) == doctest::Approx(1.102820814194317).epsilon(5e-9));
  CHECK(eval_r(arc, 0.25 + 0.55) == doctest::Approx(1.60357890657432).epsilon(5e-9));
  // angle offset at which r = 3 (reference quadrature): 0.6098593709619193
  CHECK(eval_r(arc, 0.25 + 0.6098593709619193) == doctest::Approx(3.0).epsilon(2e-8));
  // asymptotes: half-width on each side of the apex
  double w = width(1.0);
  CHECK(arc.asym_high - arc.asym_low == doctest::Approx(w).epsilon(1e-10));
  CHECK(0.5 * (arc.asym_high + arc.asym_low) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(arc.asym_bound <= 1e-12);
  CHECK(arc.end1.ideal);
  CHECK(arc.end2.ideal);
  // samples reach the minimum tail radius
  CHECK(arc.samples.front().r >= 12.5);
  CHECK(arc.samples.back().r >= 12.5);
}

TEST_CASE("shoot_from_apex: mirror symmetry about the apex") {
  GeodesicArc arc = shoot_from_apex(1.1, 0.8);
  for (double d : {0.05, 0.21, 0.37, 0.5}) {
    CHECK(std::abs(eval_r(arc, 1.1 + d) - eval_r(arc, 1.1 - d)) < 1e-12);
  }
}

TEST_CASE("shoot_from_apex: clairaut invariant along samples") {
  GeodesicArc arc = shoot_from_apex(0.0, 1.0);
  double c = std::exp(0.5);
  double worst = 0.0;
  for (const auto& s : arc.samples) {
    if (!std::isfinite(s.dr) || std::abs(s.dr) > 1e14 * s.r) continue;  // frozen tail slope
    worst = std::max(worst, std::abs(clairaut_constant(s) / c - 1.0));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("shoot_from_apex: soliton residual vanishes along samples") {
  for (double r0 : {0.2, 1.0, 3.0}) {
    GeodesicArc arc = shoot_from_apex(0.4, r0);
    CHECK(arc.max_soliton_residual() < 1e-7);
  }
}

TEST_CASE("shoot_from_apex: degenerate apex gives the perpendicular line") {
  GeodesicArc arc = shoot_from_apex(0.5, 0.0);
  CHECK(arc.kind == ArcKind::origin_line);
  CHECK(arc.end1.ideal);
  CHECK(arc.end2.ideal);
  CHECK(arc.end1.angle == doctest::Approx(wrap_angle(0.5 - kPi / 2)));
  CHECK(arc.end2.angle == doctest::Approx(wrap_angle(0.5 + kPi / 2)));
}

TEST_CASE("asymptote_error_bound: rigorous and decreasing") {
  GeodesicArc arc = shoot_from_apex(0.0, 1.0);
  double b6 = asymptote_error_bound(arc, 2, 6.0);
  double b9 = asymptote_error_bound(arc, 2, 9.0);
  double b12 = asymptote_error_bound(arc, 2, 12.0);
  CHECK(b6 > b9);
  CHECK(b9 > b12);
  CHECK(b12 < 1e-7);
  // the bound is honest: compare the sample angles against the asymptote
  for (const auto& s : arc.samples) {
    if (s.theta > arc.apex_theta && s.r > 3.0 && s.r < 12.0) {
      double bound = asymptote_error_bound(arc, 2, s.r);
      CHECK(arc.asym_high - s.theta <= bound * (1.0 + 1e-9) + 1e-15);
      CHECK(arc.asym_high - s.theta >= 0.0);
    }
  }
  CHECK_THROWS_AS(asymptote_error_bound(arc, 2, 0.5), std::invalid_argument);
}

TEST_CASE("connect: two ideal points") {
  IdealPoint a{0.3}, b{1.7};
  GeodesicArc arc = connect(a, b);
  CHECK(arc.kind == ArcKind::graph);
  CHECK(arc.apex_theta == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(arc.asym_low == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(arc.asym_high == doctest::Approx(1.7).epsilon(1e-9));
  CHECK(arc.endpoint_miss < 1e-9);
  // the apex radius solves width(r0) = 1.4
  CHECK(width(arc.apex_r) == doctest::Approx(1.4).epsilon(1e-11));
  CHECK(arc.end1.ideal);
  CHECK(arc.end1.angle == doctest::Approx(0.3));
  CHECK(arc.end1_low);

  // reversed order traverses the same geodesic the other way
  GeodesicArc rev = connect(b, a);
  CHECK_FALSE(rev.end1_low);
  CHECK(rev.apex_r == doctest::Approx(arc.apex_r).epsilon(1e-12));
  CHECK(eval_r(rev, 1.0) == doctest::Approx(eval_r(arc, 1.0)).epsilon(1e-12));
}

TEST_CASE("connect: antipodal ideal points give the line through the origin") {
  GeodesicArc arc = connect(IdealPoint{0.4}, IdealPoint{0.4 + kPi});
  CHECK(arc.kind == ArcKind::origin_line);
  CHECK(arc.line_anchor.norm() == 0.0);
  CHECK(dot(arc.line_dir, unit_vector(0.4 + kPi)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(connect(IdealPoint{0.1}, IdealPoint{0.1 + kTwoPi}), std::invalid_argument);
}

TEST_CASE("connect: interior point to ideal point reproduces a known geodesic") {
  // Take a point on the r0 = 1 apex geodesic and reconnect it to the
  // geodesic's own asymptote; the same curve must come back.
  GeodesicArc ref = shoot_from_apex(0.0, 1.0);
  double th = 0.30;
  double r = 1.102820814194317;
  Vec2 p = r * unit_vector(th);
  GeodesicArc arc = connect(p, IdealPoint{ref.asym_high});
  CHECK(arc.kind == ArcKind::graph);
  CHECK(arc.apex_r == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(arc.apex_theta == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(arc.endpoint_miss < 1e-9);
  // tangent at p matches the reference graph tangent
  Vec2 t_ref = graph_tangent({th, r, 0.7873927862761595});
  Vec2 t = arc.inward_tangent(1);
  CHECK(dot(t, t_ref) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(arc.end1.point.x == p.x);
  CHECK(arc.end2.ideal);

  // and in the flipped direction (toward the low asymptote)
  GeodesicArc arc2 = connect(p, IdealPoint{ref.asym_low});
  CHECK(arc2.apex_r == doctest::Approx(1.0).epsilon(1e-8));
  Vec2 t2 = arc2.inward_tangent(1);
  CHECK(dot(t2, t_ref) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("connect: interior to ideal, radial special cases") {
  Vec2 p{1.5, 0.0};
  GeodesicArc out = connect(p, IdealPoint{0.0});
  CHECK(out.kind == ArcKind::origin_line);
  CHECK(out.line_dir.x == doctest::Approx(1.0));
  GeodesicArc through = connect(p, IdealPoint{kPi});
  CHECK(through.kind == ArcKind::origin_line);
  CHECK(through.line_dir.x == doctest::Approx(-1.0));
  GeodesicArc from_origin = connect(Vec2{0.0, 0.0}, IdealPoint{2.2});
  CHECK(from_origin.kind == ArcKind::origin_line);
  CHECK(dot(from_origin.line_dir, unit_vector(2.2)) == doctest::Approx(1.0));
}

TEST_CASE("connect: two interior points on a known geodesic") {
  GeodesicArc ref = shoot_from_apex(0.0, 1.0);
  Vec2 p = 1.102820814194317 * unit_vector(-0.30);  // mirror side
  Vec2 q = 1.60357890657432 * unit_vector(0.55);
  GeodesicArc arc = connect(p, q);
  CHECK(arc.kind == ArcKind::graph);
  CHECK(arc.apex_r == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(arc.apex_theta == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(arc.endpoint_miss < 1e-8);
  // the arc crosses the apex: r at theta = 0 is r0
  CHECK(eval_r(arc, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
  // endpoints are reproduced exactly
  CHECK(arc.endpoint(1).x == p.x);
  CHECK(arc.endpoint(2).y == q.y);

  // swapping the endpoints yields the same point set
  GeodesicArc swp = connect(q, p);
  for (double th : {-0.2, 0.0, 0.3, 0.5}) {
    CHECK(eval_r(swp, th) == doctest::Approx(eval_r(arc, th)).epsilon(1e-8));
  }
}

TEST_CASE("connect: interior chords through the origin are segments") {
  GeodesicArc arc = connect(Vec2{1.0, 0.0}, Vec2{-2.0, 0.0});
  CHECK(arc.kind == ArcKind::origin_line);
  CHECK(arc.line_s1 == 0.0);
  CHECK(arc.line_s2 == doctest::Approx(3.0));
  GeodesicArc radial = connect(Vec2{0.5, 0.5}, Vec2{1.5, 1.5});
  CHECK(radial.kind == ArcKind::origin_line);
  CHECK_THROWS_AS(connect(Vec2{1.0, 1.0}, Vec2{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("connect: warm-start scratch reproduces the cold result") {
  Vec2 p{0.9, 0.4};
  IdealPoint b{2.1};
  ConnectScratch scratch;
  GeodesicArc cold = connect(p, b, {}, &scratch);
  REQUIRE(scratch.shoot_param.has_value());
  GeodesicArc warm = connect(p + Vec2{1e-4, -1e-4}, b, {}, &scratch);
  CHECK(warm.apex_r == doctest::Approx(cold.apex_r).epsilon(1e-2));
  GeodesicArc warm_same = connect(p, b, {}, &scratch);
  CHECK(warm_same.apex_r == doctest::Approx(cold.apex_r).epsilon(1e-10));
}

TEST_CASE("connect: random ideal pairs meet the residual tolerance") {
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> U(0.0, kTwoPi);
  for (int i = 0; i < 25; ++i) {
    double a = U(rng);
    double d = 0.05 + (kPi - 0.1) * (i + 0.5) / 25.0;
    GeodesicArc arc = connect(IdealPoint{a}, IdealPoint{a + d});
    CHECK(arc.endpoint_miss < 1e-9);
    CHECK(arc.max_soliton_residual() < 1e-6);
    CHECK(arc.asym_bound < 1e-11);
  }
}

TEST_CASE("polyline: clipping, tails and length") {
  GeodesicArc arc = shoot_from_apex(0.0, 1.0);
  auto pts = arc.polyline(3.0, 1e-3);
  REQUIRE(pts.size() > 100);
  double rmax = 0.0, rmin = 1e9;
  for (auto& p : pts) {
    rmax = std::max(rmax, p.norm());
    rmin = std::min(rmin, p.norm());
  }
  CHECK(rmax <= 3.0 * (1.0 + 1e-9));
  CHECK(rmax > 3.0 - 1e-6);
  CHECK(rmin == doctest::Approx(1.0).epsilon(1e-9));
  // frozen truncated g-length (Clairaut quadrature): 69.73371501280039
  CHECK(g_length(pts) == doctest::Approx(69.73371501280039).epsilon(3e-6));
  // polyline points lie on the curve: spot-check against eval_r
  for (std::size_t i = 10; i < pts.size(); i += 97) {
    double th = pts[i].angle();
    CHECK(pts[i].norm() == doctest::Approx(arc.eval_r_lb(th)).epsilon(1e-7));
  }
  // ray tails beyond the sampled radius
  auto far = arc.polyline(20.0, 0.05);
  double far_max = 0.0;
  for (auto& p : far) far_max = std::max(far_max, p.norm());
  CHECK(far_max > 19.999);
}

TEST_CASE("polyline: line arcs") {
  GeodesicArc arc = connect(IdealPoint{0.0}, IdealPoint{kPi});
  auto pts = arc.polyline(5.0, 0.01);
  REQUIRE(pts.size() > 100);
  for (auto& p : pts) CHECK(std::abs(p.y) < 1e-12);
  CHECK(pts.front().norm() == doctest::Approx(5.0));
  CHECK(pts.back().norm() == doctest::Approx(5.0));
  // traversal from end1 (ideal at angle 0) toward end2 (angle pi)
  CHECK(pts.front().x > 0.0);
  CHECK(pts.back().x < 0.0);
}

TEST_CASE("truncated g-length of the through-origin line") {
  // 2 * integral_0^1 e^{x^2/2} dx
  GeodesicArc arc = connect(IdealPoint{0.0}, IdealPoint{kPi});
  CHECK(arc.truncated_g_length(1.0, 2e-4) ==
        doctest::Approx(2.0 * 1.1949576619102276).epsilon(1e-7));
}

TEST_CASE("march handles steep interior launches") {
  // Nearly anti-radial launch dives close to the origin and back out.
  Vec2 p{2.0, 0.0};
  GeodesicArc arc = connect(p, IdealPoint{kPi - 0.03});
  CHECK(arc.apex_r < 0.05);
  CHECK(arc.endpoint_miss < 1e-8);
  CHECK(arc.max_soliton_residual() < 1e-6);
}
