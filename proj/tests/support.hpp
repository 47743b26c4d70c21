#pragma once

// Independent geometric checks shared by the test binaries. Nothing here calls
// into the mesh's own edge table.

#include "hh2/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace hh2::test {

inline double signed_area(const Point& a, const Point& b, const Point& c)
{
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

/// Every edge has one or two incident triangles, never the same orientation
/// twice, and no vertex lies in the relative interior of another triangle's edge.
inline bool is_conforming(const Mesh& mesh)
{
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : mesh.triangles())
    for (int j = 0; j < 3; ++j)
      if (++directed[{t.v[j], t.v[(j + 1) % 3]}] > 1)
        return false;
  // hanging nodes: a vertex strictly inside a boundary-looking edge
  for (const auto& [e, count] : directed) {
    if (directed.count({e.second, e.first}))
      continue;
    const Point& a = mesh.vertex(e.first);
    const Point& b = mesh.vertex(e.second);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (v == e.first || v == e.second)
        continue;
      const Point& x = mesh.vertex(v);
      const double cross = (b - a).x() * (x - a).y() - (b - a).y() * (x - a).x();
      const double s = (x - a).dot(b - a) / (b - a).squaredNorm();
      if (std::abs(cross) < 1e-13 && s > 1e-12 && s < 1 - 1e-12)
        return false;
    }
  }
  return true;
}

inline bool contains(const std::array<Point, 3>& c, const Point& x, double tol = 1e-12)
{
  const double area = signed_area(c[0], c[1], c[2]);
  return signed_area(x, c[1], c[2]) >= -tol * area && signed_area(c[0], x, c[2]) >= -tol * area &&
         signed_area(c[0], c[1], x) >= -tol * area;
}

inline bool strictly_inside(const std::array<Point, 3>& c, const Point& x, double tol = 1e-12)
{
  const double area = signed_area(c[0], c[1], c[2]);
  return signed_area(x, c[1], c[2]) > tol * area && signed_area(c[0], x, c[2]) > tol * area &&
         signed_area(c[0], c[1], x) > tol * area;
}

inline bool on_open_segment(const Point& a, const Point& b, const Point& x, double tol = 1e-12)
{
  const double cross = (b - a).x() * (x - a).y() - (b - a).y() * (x - a).x();
  const double s = (x - a).dot(b - a) / (b - a).squaredNorm();
  return std::abs(cross) <= tol * (b - a).squaredNorm() && s > tol && s < 1 - tol;
}

/// Is x on the boundary of the L-shaped domain?
inline bool on_lshape_boundary(const Point& x)
{
  const double e = 1e-13;
  auto near = [e](double a, double b) { return std::abs(a - b) < e; };
  const bool in_box = x.x() >= -1 - e && x.x() <= 1 + e && x.y() >= -1 - e && x.y() <= 1 + e;
  if (!in_box)
    return false;
  if (near(x.x(), -1) || near(x.y(), 1))
    return true;
  if (near(x.x(), 1))
    return x.y() >= -e;
  if (near(x.y(), -1))
    return x.x() <= e;
  if (near(x.x(), 0))
    return x.y() <= e;
  if (near(x.y(), 0))
    return x.x() >= -e;
  return false;
}

} // namespace hh2::test
