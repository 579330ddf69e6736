#include "steinerflow/polyline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace steinerflow {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.norm2();
  if (len2 == 0.0) return distance(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

SegmentGrid::SegmentGrid(std::span<const std::vector<Vec2>> polylines) {
  double max_len = 0.0;
  Vec2 hi{};
  bool first = true;
  for (const auto& poly : polylines) {
    if (poly.empty()) continue;
    for (Vec2 p : poly) {
      if (first) {
        lo_ = hi = p;
        first = false;
      } else {
        lo_.x = std::min(lo_.x, p.x);
        lo_.y = std::min(lo_.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
      }
    }
    if (poly.size() == 1) {
      segs_.emplace_back(poly[0], poly[0]);
      continue;
    }
    for (size_t i = 0; i + 1 < poly.size(); ++i) {
      segs_.emplace_back(poly[i], poly[i + 1]);
      max_len = std::max(max_len, (poly[i + 1] - poly[i]).norm());
    }
  }
  if (segs_.empty()) {
    bins_.resize(1);
    return;
  }
  double diag = std::max(hi.x - lo_.x, hi.y - lo_.y);
  cell_ = std::max({max_len, diag / 512.0, 1e-12});
  nx_ = std::min(1024, static_cast<int>((hi.x - lo_.x) / cell_) + 1);
  ny_ = std::min(1024, static_cast<int>((hi.y - lo_.y) / cell_) + 1);
  bins_.resize(static_cast<size_t>(nx_) * ny_);
  for (size_t s = 0; s < segs_.size(); ++s) {
    auto [a, b] = segs_[s];
    int x0 = std::clamp(static_cast<int>((std::min(a.x, b.x) - lo_.x) / cell_), 0, nx_ - 1);
    int x1 = std::clamp(static_cast<int>((std::max(a.x, b.x) - lo_.x) / cell_), 0, nx_ - 1);
    int y0 = std::clamp(static_cast<int>((std::min(a.y, b.y) - lo_.y) / cell_), 0, ny_ - 1);
    int y1 = std::clamp(static_cast<int>((std::max(a.y, b.y) - lo_.y) / cell_), 0, ny_ - 1);
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) bin(ix, iy).push_back(static_cast<int>(s));
  }
}

double SegmentGrid::distance(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  if (segs_.empty()) return best;
  int ix0 = std::clamp(static_cast<int>((p.x - lo_.x) / cell_), 0, nx_ - 1);
  int iy0 = std::clamp(static_cast<int>((p.y - lo_.y) / cell_), 0, ny_ - 1);
  int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Any cell at Chebyshev index distance `ring` only holds points at
    // Euclidean distance >= (ring - 1) * cell from p (valid with clamped
    // indices because projection onto the bounding box is contracting).
    if (best < (ring - 1) * cell_) break;
    auto scan = [&](int ix, int iy) {
      if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return;
      for (int s : bin(ix, iy)) {
        best = std::min(best, point_segment_distance(p, segs_[s].first, segs_[s].second));
      }
    };
    if (ring == 0) {
      scan(ix0, iy0);
      continue;
    }
    for (int d = -ring; d <= ring; ++d) {
      scan(ix0 + d, iy0 - ring);
      scan(ix0 + d, iy0 + ring);
    }
    for (int d = -ring + 1; d <= ring - 1; ++d) {
      scan(ix0 - ring, iy0 + d);
      scan(ix0 + ring, iy0 + d);
    }
  }
  return best;
}

namespace {

double directed_hausdorff(std::span<const std::vector<Vec2>> from, const SegmentGrid& to) {
  double worst = 0.0;
  for (const auto& poly : from)
    for (Vec2 p : poly) worst = std::max(worst, to.distance(p));
  return worst;
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

// Transversal crossing, or collinear overlap of positive length.  Touching
// configurations (shared endpoints, endpoint on interior) return false.
bool segments_conflict(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
    Vec2 dir = b - a;
    if (std::abs(dir.x) < std::abs(dir.y)) {
      auto [s0, s1] = std::minmax(a.y, b.y);
      auto [t0, t1] = std::minmax(c.y, d.y);
      return std::min(s1, t1) - std::max(s0, t0) > 0.0;
    }
    auto [s0, s1] = std::minmax(a.x, b.x);
    auto [t0, t1] = std::minmax(c.x, d.x);
    return std::min(s1, t1) - std::max(s0, t0) > 0.0;
  }
  return false;
}

}  // namespace

double hausdorff_distance(std::span<const std::vector<Vec2>> a,
                          std::span<const std::vector<Vec2>> b) {
  SegmentGrid ga(a), gb(b);
  if (ga.empty() && gb.empty()) return 0.0;
  if (ga.empty() || gb.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed_hausdorff(a, gb), directed_hausdorff(b, ga));
}

bool polylines_cross(std::span<const std::vector<Vec2>> polylines) {
  struct Seg {
    Vec2 a, b;
    int owner;
  };
  std::vector<Seg> segs;
  double max_len = 0.0;
  Vec2 lo{}, hi{};
  bool first = true;
  for (size_t id = 0; id < polylines.size(); ++id) {
    const auto& poly = polylines[id];
    for (Vec2 p : poly) {
      if (first) {
        lo = hi = p;
        first = false;
      } else {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
      }
    }
    for (size_t i = 0; i + 1 < poly.size(); ++i) {
      segs.push_back({poly[i], poly[i + 1], static_cast<int>(id)});
      max_len = std::max(max_len, distance(poly[i], poly[i + 1]));
    }
  }
  if (segs.size() < 2) return false;

  double diag = std::max(hi.x - lo.x, hi.y - lo.y);
  double cell = std::max({max_len, diag / 512.0, 1e-12});
  int nx = std::min(1024, static_cast<int>((hi.x - lo.x) / cell) + 1);
  int ny = std::min(1024, static_cast<int>((hi.y - lo.y) / cell) + 1);
  std::vector<std::vector<int>> bins(static_cast<size_t>(nx) * ny);
  for (size_t s = 0; s < segs.size(); ++s) {
    int x0 = std::clamp(static_cast<int>((std::min(segs[s].a.x, segs[s].b.x) - lo.x) / cell), 0, nx - 1);
    int x1 = std::clamp(static_cast<int>((std::max(segs[s].a.x, segs[s].b.x) - lo.x) / cell), 0, nx - 1);
    int y0 = std::clamp(static_cast<int>((std::min(segs[s].a.y, segs[s].b.y) - lo.y) / cell), 0, ny - 1);
    int y1 = std::clamp(static_cast<int>((std::max(segs[s].a.y, segs[s].b.y) - lo.y) / cell), 0, ny - 1);
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) bins[ix + static_cast<size_t>(nx) * iy].push_back(static_cast<int>(s));
  }

  std::vector<std::pair<int, int>> pairs;
  for (const auto& b : bins) {
    for (size_t i = 0; i < b.size(); ++i)
      for (size_t j = i + 1; j < b.size(); ++j) {
        const Seg& si = segs[b[i]];
        const Seg& sj = segs[b[j]];
        if (si.owner == sj.owner) continue;
        pairs.emplace_back(std::min(b[i], b[j]), std::max(b[i], b[j]));
      }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (auto [i, j] : pairs) {
    if (segments_conflict(segs[i].a, segs[i].b, segs[j].a, segs[j].b)) return true;
  }
  return false;
}

std::vector<Vec2> resample(std::span<const Vec2> polyline, double ds) {
  std::vector<Vec2> out(polyline.begin(), polyline.end());
  if (polyline.size() < 2 || ds <= 0.0) return out;
  std::vector<double> arc(polyline.size(), 0.0);
  for (size_t i = 1; i < polyline.size(); ++i)
    arc[i] = arc[i - 1] + distance(polyline[i - 1], polyline[i]);
  double total = arc.back();
  if (total == 0.0) return {polyline.front(), polyline.back()};
  int n = std::max(1, static_cast<int>(std::lround(total / ds)));
  out.clear();
  out.reserve(n + 1);
  size_t seg = 0;
  for (int i = 0; i <= n; ++i) {
    double s = total * i / n;
    while (seg + 2 < polyline.size() && arc[seg + 1] < s) ++seg;
    double len = arc[seg + 1] - arc[seg];
    double t = len > 0.0 ? (s - arc[seg]) / len : 0.0;
    out.push_back(polyline[seg] + std::clamp(t, 0.0, 1.0) * (polyline[seg + 1] - polyline[seg]));
  }
  out.back() = polyline.back();
  return out;
}

}  // namespace steinerflow
