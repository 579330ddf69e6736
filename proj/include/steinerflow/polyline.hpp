#ifndef STEINERFLOW_POLYLINE_HPP_
#define STEINERFLOW_POLYLINE_HPP_

#include <span>
#include <vector>

#include "steinerflow/vec2.hpp"

namespace steinerflow {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// Segment soup over a uniform grid, for nearest-distance queries against a
// union of polylines.  Single-point polylines enter as degenerate segments.
class SegmentGrid {
 public:
  explicit SegmentGrid(std::span<const std::vector<Vec2>> polylines);

  bool empty() const { return segs_.empty(); }
  // Distance from p to the union (infinity when empty).
  double distance(Vec2 p) const;

 private:
  std::vector<int>& bin(int ix, int iy) { return bins_[ix + nx_ * iy]; }
  const std::vector<int>& bin(int ix, int iy) const { return bins_[ix + nx_ * iy]; }

  std::vector<std::pair<Vec2, Vec2>> segs_;
  Vec2 lo_{};
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> bins_;
};

// Symmetric Hausdorff distance between two unions of polylines, measured
// from the vertices of each side to the segments of the other.  The result
// matches the Hausdorff distance of the underlying curves up to the vertex
// spacing sagitta, so compare finely sampled polylines.
double hausdorff_distance(std::span<const std::vector<Vec2>> a,
                          std::span<const std::vector<Vec2>> b);

// True if segments from two distinct polylines cross transversally or
// overlap collinearly over positive length.  Contacts at shared sample
// points (junctions of a network) do not count, and segments within one
// polyline are never tested against each other.
bool polylines_cross(std::span<const std::vector<Vec2>> polylines);

// Resample by arclength at spacing about ds (linear interpolation, exact
// endpoints).  Inputs with fewer than two points come back unchanged.
std::vector<Vec2> resample(std::span<const Vec2> polyline, double ds);

}  // namespace steinerflow

#endif  // STEINERFLOW_POLYLINE_HPP_
