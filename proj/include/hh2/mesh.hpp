#pragma once

// Conforming triangulations of planar polygons and their refinement by
// newest vertex bisection (NVB).
//
// Every triangle stores its vertices counterclockwise as (v0, v1, v2); the
// reference edge is (v0, v1). Bisection inserts the midpoint m of (v0, v1)
// and produces the sons (v2, v0, m) and (v1, v2, m), so the reference edge of
// each son is an edge of the father and lies opposite the new node.
//
// refine() realises three patterns for marked elements:
//   bisec3 (RefineMode::M3):  4 sons, every edge of the father is halved;
//   bisec5 (RefineMode::M3P): 6 sons, additionally the two grandsons that
//                             share the segment (m, v2) are bisected, which
//                             creates a node in the interior of the father.
// Non-marked elements are bisected once, twice or three times as the
// conformity closure requires. Only 2D NVB is provided; the tetrahedral
// variant with typed vertex permutations has no counterpart here.
//
// Meshes are immutable. Vertices keep their ids under refinement (new vertices
// are appended), and every refined mesh records the index of each triangle's
// father, so a chain of refinements can be walked back with child_map().

#include "hh2/common.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hh2 {

enum class RefineMode
{
  M3,  ///< marked elements: 3 bisections, 4 sons
  M3P, ///< marked elements: 5 bisections, 6 sons, one interior node
};

/// Number of sons of a marked element.
constexpr int sons_per_element(RefineMode mode) noexcept
{
  return mode == RefineMode::M3 ? 4 : 6;
}

struct Triangle
{
  std::array<int, 3> v;
  int parent = -1;     ///< father in the previous generation, -1 for initial elements
  int generation = 0;  ///< number of bisections since the initial mesh
  int origin = 0;      ///< ancestor in the initial mesh
};

class Mesh
{
public:
  /// Builds the edge table and validates orientation and conformity of
  /// edge incidences. Throws InputError on degenerate or clockwise triangles
  /// and on edges shared by more than two triangles.
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles);

  int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles_.size()); }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }

  const Point& vertex(int i) const { return vertices_[i]; }
  std::span<const Point> vertices() const noexcept { return vertices_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  std::span<const Triangle> triangles() const noexcept { return triangles_; }

  /// Edge as (a, b) with a < b.
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  /// Local edge j of a triangle is the one opposite vertex j, so local edge 2
  /// is the reference edge.
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
  /// Incident triangles; the second entry is -1 on the boundary.
  const std::array<int, 2>& edge_triangles(int e) const { return edge_triangles_[e]; }
  /// Edge id of the unordered vertex pair, -1 if it is not an edge.
  int find_edge(int a, int b) const;

  bool is_boundary_edge(int e) const { return edge_triangles_[e][1] < 0; }
  bool is_boundary_vertex(int i) const { return boundary_vertex_[i] != 0; }

  double area(int t) const;
  double total_area() const;
  /// h_T = |T|^{1/2}
  double mesh_size(int t) const;
  double diameter(int t) const;
  std::array<Point, 3> corners(int t) const;

  /// Unique per constructed mesh; used to verify refinement lineage.
  std::uint64_t id() const noexcept { return lineage_->mesh_id; }
  bool is_refinement_of(const Mesh& coarse) const;

private:
  friend Mesh refine(const Mesh&, std::span<const int>, RefineMode);
  friend std::vector<std::vector<int>> child_map(const Mesh&, const Mesh&);

  struct Lineage
  {
    std::uint64_t mesh_id;
    std::shared_ptr<const Lineage> parent;
    std::vector<int> father;  ///< per triangle, index into the parent mesh
  };

  void build_edges();

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<int, 2>> edge_triangles_;
  std::vector<char> boundary_vertex_;
  std::shared_ptr<const Lineage> lineage_;
};

/// Reorders each triangle cyclically so that its longest edge becomes the
/// reference edge; ties go to the edge with the lexicographically smallest
/// sorted vertex-id pair. Orientation is preserved.
std::vector<Triangle> assign_longest_edge_reference(std::span<const Point> vertices,
                                                    std::vector<Triangle> triangles);

/// The L-shaped domain (-1,1)^2 \ [0,1]x[-1,0] split into three unit squares,
/// each cut into four triangles through its centre: 12 triangles, 11 vertices.
Mesh initial_lshape();

/// NVB refinement of the marked triangles with conformity closure.
Mesh refine(const Mesh& mesh, std::span<const int> marked, RefineMode mode);

Mesh uniform_refine(const Mesh& mesh, RefineMode mode);

/// For every triangle of `coarse`, the triangles of `fine` contained in it.
/// `fine` must be `coarse` itself or descend from it by refine() calls;
/// otherwise LineageError is thrown.
std::vector<std::vector<int>> child_map(const Mesh& coarse, const Mesh& fine);

/// max_T diam(T) / h_T
double shape_regularity(const Mesh& mesh);

/// Smallest interior angle over all triangles, in radians.
double min_angle(const Mesh& mesh);

// Text format: first line "V E", then V lines "x y", then E lines "v0 v1 v2"
// (0-based; the first two ids span the reference edge).
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::string& path);

} // namespace hh2
