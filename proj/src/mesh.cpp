#include "hh2/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <tuple>

namespace hh2 {

namespace {

std::atomic<std::uint64_t> next_mesh_id{1};

double signed_area(const Point& a, const Point& b, const Point& c)
{
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

std::uint64_t edge_key(int a, int b)
{
  if (a > b)
    std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles)
  : vertices_(std::move(vertices)), triangles_(std::move(triangles))
{
  const int nv = num_vertices();
  for (const auto& p : vertices_)
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw InputError("mesh: non-finite vertex coordinate");
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& v = triangles_[t].v;
    for (int k = 0; k < 3; ++k)
      if (v[k] < 0 || v[k] >= nv)
        throw InputError("mesh: triangle " + std::to_string(t) + " references a missing vertex");
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw InputError("mesh: triangle " + std::to_string(t) + " repeats a vertex");
    if (!(signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]) > 0.0))
      throw InputError("mesh: triangle " + std::to_string(t) + " is not counterclockwise");
  }
  build_edges();

  std::vector<int> father(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    father[t] = triangles_[t].parent;
  lineage_ = std::make_shared<const Lineage>(Lineage{next_mesh_id++, nullptr, std::move(father)});
}

void Mesh::build_edges()
{
  struct Incidence
  {
    std::uint64_t key;
    int triangle;
    int local;
  };
  std::vector<Incidence> inc;
  inc.reserve(3 * triangles_.size());
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& v = triangles_[t].v;
    for (int j = 0; j < 3; ++j)
      inc.push_back({edge_key(v[(j + 1) % 3], v[(j + 2) % 3]), t, j});
  }
  std::sort(inc.begin(), inc.end(), [](const Incidence& a, const Incidence& b) {
    return std::tie(a.key, a.triangle, a.local) < std::tie(b.key, b.triangle, b.local);
  });

  edges_.clear();
  edge_triangles_.clear();
  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < inc.size();) {
    std::size_t j = i;
    while (j < inc.size() && inc[j].key == inc[i].key)
      ++j;
    if (j - i > 2)
      throw InputError("mesh: edge shared by more than two triangles");
    const int e = static_cast<int>(edges_.size());
    edges_.push_back({static_cast<int>(inc[i].key >> 32), static_cast<int>(inc[i].key & 0xffffffffu)});
    edge_triangles_.push_back({inc[i].triangle, j - i == 2 ? inc[i + 1].triangle : -1});
    for (std::size_t k = i; k < j; ++k)
      triangle_edges_[inc[k].triangle][inc[k].local] = e;
    i = j;
  }

  boundary_vertex_.assign(vertices_.size(), 0);
  for (int e = 0; e < num_edges(); ++e)
    if (is_boundary_edge(e)) {
      boundary_vertex_[edges_[e][0]] = 1;
      boundary_vertex_[edges_[e][1]] = 1;
    }
}

int Mesh::find_edge(int a, int b) const
{
  if (a > b)
    std::swap(a, b);
  const std::array<int, 2> key{a, b};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key)
    return -1;
  return static_cast<int>(it - edges_.begin());
}

double Mesh::area(int t) const
{
  const auto& v = triangles_[t].v;
  return signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

double Mesh::total_area() const
{
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t)
    sum += area(t);
  return sum;
}

double Mesh::mesh_size(int t) const { return std::sqrt(area(t)); }

double Mesh::diameter(int t) const
{
  const auto c = corners(t);
  return std::max({(c[0] - c[1]).norm(), (c[1] - c[2]).norm(), (c[2] - c[0]).norm()});
}

std::array<Point, 3> Mesh::corners(int t) const
{
  const auto& v = triangles_[t].v;
  return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

bool Mesh::is_refinement_of(const Mesh& coarse) const
{
  for (const Lineage* l = lineage_.get(); l != nullptr; l = l->parent.get())
    if (l->mesh_id == coarse.id())
      return true;
  return false;
}

std::vector<Triangle> assign_longest_edge_reference(std::span<const Point> vertices,
                                                    std::vector<Triangle> triangles)
{
  for (auto& tri : triangles) {
    auto v = tri.v;
    int best = 0;
    double best_len = -1.0;
    std::array<int, 2> best_pair{};
    // Candidate rotation r makes (v[r], v[r+1]) the reference edge.
    for (int r = 0; r < 3; ++r) {
      const int a = v[r], b = v[(r + 1) % 3];
      const double len = (vertices[a] - vertices[b]).squaredNorm();
      const std::array<int, 2> pair{std::min(a, b), std::max(a, b)};
      if (len > best_len || (len == best_len && pair < best_pair)) {
        best = r;
        best_len = len;
        best_pair = pair;
      }
    }
    tri.v = {v[best], v[(best + 1) % 3], v[(best + 2) % 3]};
  }
  return triangles;
}

Mesh initial_lshape()
{
  std::vector<Point> vertices{
    {-1.0, -1.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {-1.0, 1.0},
    {0.0, 1.0},   {1.0, 1.0},  {-0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5},
  };
  // Counterclockwise corners of each unit square and its centre.
  const std::array<std::array<int, 5>, 3> squares{{
    {0, 1, 3, 2, 8},
    {2, 3, 6, 5, 9},
    {3, 4, 7, 6, 10},
  }};
  std::vector<Triangle> triangles;
  for (const auto& sq : squares)
    for (int k = 0; k < 4; ++k) {
      Triangle t;
      t.v = {sq[k], sq[(k + 1) % 4], sq[4]};
      t.origin = static_cast<int>(triangles.size());
      triangles.push_back(t);
    }
  triangles = assign_longest_edge_reference(vertices, std::move(triangles));
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh refine(const Mesh& mesh, std::span<const int> marked, RefineMode mode)
{
  const int nt = mesh.num_triangles();
  std::vector<char> is_marked(nt, 0);
  for (int t : marked) {
    if (t < 0 || t >= nt)
      throw InputError("refine: triangle id " + std::to_string(t) + " out of range");
    is_marked[t] = 1;
  }

  // Edge-marking closure: all edges of marked triangles, then the reference
  // edge of every triangle that owns a marked edge, until nothing changes.
  std::vector<char> edge_marked(mesh.num_edges(), 0);
  std::vector<int> work;
  auto mark_edge = [&](int e) {
    if (!edge_marked[e]) {
      edge_marked[e] = 1;
      work.push_back(e);
    }
  };
  for (int t = 0; t < nt; ++t)
    if (is_marked[t])
      for (int e : mesh.triangle_edges(t))
        mark_edge(e);
  while (!work.empty()) {
    const int e = work.back();
    work.pop_back();
    for (int t : mesh.edge_triangles(e))
      if (t >= 0)
        mark_edge(mesh.triangle_edges(t)[2]);
  }

  std::vector<Point> vertices(mesh.vertices().begin(), mesh.vertices().end());
  std::vector<int> midpoint(mesh.num_edges(), -1);
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (edge_marked[e]) {
      const auto& ab = mesh.edge(e);
      midpoint[e] = static_cast<int>(vertices.size());
      vertices.push_back(0.5 * (mesh.vertex(ab[0]) + mesh.vertex(ab[1])));
    }

  std::vector<Triangle> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nt));

  for (int t = 0; t < nt; ++t) {
    const Triangle& T = mesh.triangle(t);
    auto emit = [&](int a, int b, int c, int depth) {
      triangles.push_back({{a, b, c}, t, T.generation + depth, T.origin});
    };
    const auto [v0, v1, v2] = T.v;
    const auto& te = mesh.triangle_edges(t);
    const int m_ref = midpoint[te[2]];
    if (m_ref < 0) {
      emit(v0, v1, v2, 0);
      continue;
    }
    const int m_left = midpoint[te[1]];   // on (v2, v0)
    const int m_right = midpoint[te[0]];  // on (v1, v2)
    const bool interior = is_marked[t] && mode == RefineMode::M3P;

    if (interior) {
      // bisec3 grandsons (m_ref, v2, m_left) and (v2, m_ref, m_right) share
      // the segment (m_ref, v2), which is their reference edge; bisect both.
      const int c = static_cast<int>(vertices.size());
      vertices.push_back(0.5 * (vertices[m_ref] + vertices[v2]));
      emit(m_left, m_ref, c, 3);
      emit(v2, m_left, c, 3);
      emit(v0, m_ref, m_left, 2);
      emit(m_right, v2, c, 3);
      emit(m_ref, m_right, c, 3);
      emit(m_ref, v1, m_right, 2);
      continue;
    }

    // son (v2, v0, m_ref)
    if (m_left < 0) {
      emit(v2, v0, m_ref, 1);
    } else {
      emit(m_ref, v2, m_left, 2);
      emit(v0, m_ref, m_left, 2);
    }
    // son (v1, v2, m_ref)
    if (m_right < 0) {
      emit(v1, v2, m_ref, 1);
    } else {
      emit(m_ref, v1, m_right, 2);
      emit(v2, m_ref, m_right, 2);
    }
  }

  Mesh fine(std::move(vertices), std::move(triangles));
  auto lineage = std::make_shared<Mesh::Lineage>();
  lineage->mesh_id = fine.id();
  lineage->parent = mesh.lineage_;
  lineage->father.resize(fine.num_triangles());
  for (int t = 0; t < fine.num_triangles(); ++t)
    lineage->father[t] = fine.triangle(t).parent;
  fine.lineage_ = std::move(lineage);
  return fine;
}

Mesh uniform_refine(const Mesh& mesh, RefineMode mode)
{
  std::vector<int> all(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    all[t] = t;
  return refine(mesh, all, mode);
}

std::vector<std::vector<int>> child_map(const Mesh& coarse, const Mesh& fine)
{
  std::vector<int> ancestor(fine.num_triangles());
  for (int t = 0; t < fine.num_triangles(); ++t)
    ancestor[t] = t;
  const Mesh::Lineage* l = fine.lineage_.get();
  while (l != nullptr && l->mesh_id != coarse.id()) {
    for (int& a : ancestor)
      a = l->father[a];
    l = l->parent.get();
  }
  if (l == nullptr)
    throw LineageError("child_map: mesh is not a refinement of the given coarse mesh");

  std::vector<std::vector<int>> children(coarse.num_triangles());
  for (int t = 0; t < fine.num_triangles(); ++t)
    children[ancestor[t]].push_back(t);
  return children;
}

double shape_regularity(const Mesh& mesh)
{
  double worst = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    worst = std::max(worst, mesh.diameter(t) / mesh.mesh_size(t));
  return worst;
}

double min_angle(const Mesh& mesh)
{
  double smallest = std::numbers::pi;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    for (int k = 0; k < 3; ++k) {
      const Point a = c[(k + 1) % 3] - c[k];
      const Point b = c[(k + 2) % 3] - c[k];
      const double cross = a.x() * b.y() - a.y() * b.x();
      smallest = std::min(smallest, std::atan2(std::abs(cross), a.dot(b)));
    }
  }
  return smallest;
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
  out.precision(17);
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  for (const auto& p : mesh.vertices())
    out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles())
    out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
}

void write_mesh(const std::string& path, const Mesh& mesh)
{
  std::ofstream out(path);
  if (!out)
    throw InputError("cannot open " + path + " for writing");
  write_mesh(out, mesh);
}

Mesh read_mesh(std::istream& in)
{
  int nv = 0, nt = 0;
  if (!(in >> nv >> nt) || nv < 0 || nt < 0)
    throw InputError("read_mesh: bad header");
  std::vector<Point> vertices(nv);
  for (auto& p : vertices)
    if (!(in >> p.x() >> p.y()))
      throw InputError("read_mesh: truncated vertex list");
  std::vector<Triangle> triangles(nt);
  for (int t = 0; t < nt; ++t) {
    auto& tri = triangles[t];
    if (!(in >> tri.v[0] >> tri.v[1] >> tri.v[2]))
      throw InputError("read_mesh: truncated triangle list");
    tri.origin = t;
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh read_mesh(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open " + path);
  return read_mesh(in);
}

} // namespace hh2
