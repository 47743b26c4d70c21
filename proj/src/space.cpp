#include "hh2/space.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace hh2 {

namespace {

constexpr double containment_tol = 1e-12;

} // namespace

ElementGeometry element_geometry(const std::array<Point, 3>& corners)
{
  ElementGeometry geo;
  geo.corners = corners;
  const Point& a = corners[0];
  const Point& b = corners[1];
  const Point& c = corners[2];
  geo.area = 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  for (int i = 0; i < 3; ++i) {
    const Point& p = corners[(i + 1) % 3];
    const Point& q = corners[(i + 2) % 3];
    geo.grad_bary(i, 0) = (p.y() - q.y()) / (2.0 * geo.area);
    geo.grad_bary(i, 1) = (q.x() - p.x()) / (2.0 * geo.area);
  }
  return geo;
}

ElementGeometry element_geometry(const Mesh& mesh, int t) { return element_geometry(mesh.corners(t)); }

Barycentric ElementGeometry::barycentric(const Point& x) const
{
  Barycentric b;
  const Point d = x - corners[0];
  b[1] = grad_bary.row(1).dot(d);
  b[2] = grad_bary.row(2).dot(d);
  b[0] = 1.0 - b[1] - b[2];
  return b;
}

Barycentric local_node(int k)
{
  if (k < 3)
    return Barycentric::Unit(k);
  Barycentric b = Barycentric::Constant(0.5);
  b[k - 3] = 0.0;
  return b;
}

LocalVector basis_values(int degree, const Barycentric& b)
{
  if (degree == 1)
    return b;
  LocalVector v(6);
  for (int i = 0; i < 3; ++i)
    v[i] = b[i] * (2.0 * b[i] - 1.0);
  for (int j = 0; j < 3; ++j)
    v[3 + j] = 4.0 * b[(j + 1) % 3] * b[(j + 2) % 3];
  return v;
}

LocalGradients basis_gradients(int degree, const ElementGeometry& geo, const Barycentric& b)
{
  if (degree == 1)
    return geo.grad_bary;
  LocalGradients g(6, 2);
  for (int i = 0; i < 3; ++i)
    g.row(i) = (4.0 * b[i] - 1.0) * geo.grad_bary.row(i);
  for (int j = 0; j < 3; ++j) {
    const int p = (j + 1) % 3, q = (j + 2) % 3;
    g.row(3 + j) = 4.0 * (b[q] * geo.grad_bary.row(p) + b[p] * geo.grad_bary.row(q));
  }
  return g;
}

std::array<Matrix2, 6> basis_hessians(int degree, const ElementGeometry& geo)
{
  std::array<Matrix2, 6> h;
  for (auto& m : h)
    m.setZero();
  if (degree == 1)
    return h;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d g = geo.grad_bary.row(i).transpose();
    h[i] = 4.0 * g * g.transpose();
  }
  for (int j = 0; j < 3; ++j) {
    const Eigen::Vector2d gp = geo.grad_bary.row((j + 1) % 3).transpose();
    const Eigen::Vector2d gq = geo.grad_bary.row((j + 2) % 3).transpose();
    h[3 + j] = 4.0 * (gp * gq.transpose() + gq * gp.transpose());
  }
  return h;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree)
  : mesh_(std::move(mesh)), degree_(degree)
{
  if (degree != 1 && degree != 2)
    throw InputError("unsupported polynomial degree " + std::to_string(degree));
  const Mesh& m = *mesh_;
  const int nv = m.num_vertices();
  num_dofs_ = degree == 1 ? nv : nv + m.num_edges();
  const int n = dofs_per_element();
  dofs_.resize(static_cast<std::size_t>(m.num_triangles()) * n);
  for (int t = 0; t < m.num_triangles(); ++t) {
    int* d = dofs_.data() + static_cast<std::size_t>(t) * n;
    for (int i = 0; i < 3; ++i)
      d[i] = m.triangle(t).v[i];
    if (degree == 2)
      for (int j = 0; j < 3; ++j)
        d[3 + j] = nv + m.triangle_edges(t)[j];
  }
  boundary_.assign(num_dofs_, 0);
  for (int i = 0; i < nv; ++i)
    boundary_[i] = m.is_boundary_vertex(i) ? 1 : 0;
  if (degree == 2)
    for (int e = 0; e < m.num_edges(); ++e)
      boundary_[nv + e] = m.is_boundary_edge(e) ? 1 : 0;
}

Point FeSpace::dof_point(int i) const
{
  const int nv = mesh_->num_vertices();
  if (i < nv)
    return mesh_->vertex(i);
  const auto& ab = mesh_->edge(i - nv);
  return 0.5 * (mesh_->vertex(ab[0]) + mesh_->vertex(ab[1]));
}

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree)
{
  return std::make_shared<const FeSpace>(std::move(mesh), degree);
}

LocalVector DiscreteFunction::local_coefficients(int t) const
{
  const auto dofs = space->element_dofs(t);
  LocalVector c(static_cast<int>(dofs.size()));
  for (std::size_t k = 0; k < dofs.size(); ++k)
    c[static_cast<int>(k)] = coefficients[dofs[k]];
  return c;
}

double DiscreteFunction::value(int t, const Barycentric& b) const
{
  return basis_values(space->degree(), b).dot(local_coefficients(t));
}

Eigen::Vector2d DiscreteFunction::gradient(int t, const ElementGeometry& geo, const Barycentric& b) const
{
  return basis_gradients(space->degree(), geo, b).transpose() * local_coefficients(t);
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& fn)
{
  Eigen::VectorXd c(space.num_dofs());
  for (int i = 0; i < space.num_dofs(); ++i)
    c[i] = fn(space.dof_point(i));
  return c;
}

Eigen::VectorXd nodal_interpolate(const FeSpace& coarse_space, const DiscreteFunction& fine_fn)
{
  const Mesh& coarse = coarse_space.mesh();
  const Mesh& fine = fine_fn.space->mesh();
  const auto children = child_map(coarse, fine);

  Eigen::VectorXd result = Eigen::VectorXd::Zero(coarse_space.num_dofs());
  std::vector<char> done(coarse_space.num_dofs(), 0);
  for (int t = 0; t < coarse.num_triangles(); ++t) {
    const auto dofs = coarse_space.element_dofs(t);
    const ElementGeometry geo = element_geometry(coarse, t);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      if (done[dofs[k]])
        continue;
      const Point x = geo.map(local_node(static_cast<int>(k)));
      for (int c : children[t]) {
        const Barycentric b = element_geometry(fine, c).barycentric(x);
        if (b.minCoeff() >= -containment_tol) {
          result[dofs[k]] = fine_fn.value(c, b);
          done[dofs[k]] = 1;
          break;
        }
      }
      if (!done[dofs[k]])
        throw LineageError("nodal_interpolate: coarse node not covered by its sons");
    }
  }
  return result;
}

Eigen::VectorXd prolongate(const DiscreteFunction& coarse_fn, const FeSpace& fine_space)
{
  const Mesh& coarse = coarse_fn.space->mesh();
  const Mesh& fine = fine_space.mesh();
  const auto children = child_map(coarse, fine);

  Eigen::VectorXd result = Eigen::VectorXd::Zero(fine_space.num_dofs());
  std::vector<char> done(fine_space.num_dofs(), 0);
  for (int t = 0; t < coarse.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(coarse, t);
    for (int c : children[t]) {
      const auto dofs = fine_space.element_dofs(c);
      const ElementGeometry child = element_geometry(fine, c);
      for (std::size_t k = 0; k < dofs.size(); ++k) {
        if (done[dofs[k]])
          continue;
        const Barycentric b = geo.barycentric(child.map(local_node(static_cast<int>(k))));
        result[dofs[k]] = coarse_fn.value(t, b);
        done[dofs[k]] = 1;
      }
    }
  }
  return result;
}

Eigen::VectorXd monomials(int degree, const Point& center, double scale, const Point& x)
{
  const double xi = (x.x() - center.x()) / scale;
  const double eta = (x.y() - center.y()) / scale;
  Eigen::VectorXd q(monomial_count(degree));
  int idx = 0;
  for (int k = 0; k <= degree; ++k)
    for (int j = 0; j <= k; ++j)
      q[idx++] = std::pow(xi, k - j) * std::pow(eta, j);
  return q;
}

double ElementPoly::operator()(const Point& x) const
{
  return monomials(degree, center, scale, x).dot(coefficients);
}

Eigen::MatrixXd monomial_gram(const ElementGeometry& geo, int degree)
{
  const int n = monomial_count(degree);
  const Point c = geo.centroid();
  const double s = std::sqrt(geo.area);
  const auto& rule = quadrature(2 * degree);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Eigen::VectorXd q = monomials(degree, c, s, geo.map(rule.points[i]));
    gram.noalias() += (geo.area * rule.weights[i]) * q * q.transpose();
  }
  return gram;
}

ElementPoly project_scalar(const ElementGeometry& geo, const ScalarField& f, int degree, int order)
{
  ElementPoly poly;
  poly.center = geo.centroid();
  poly.scale = std::sqrt(geo.area);
  poly.degree = degree;
  const auto& rule = quadrature(order);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(monomial_count(degree));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Point x = geo.map(rule.points[i]);
    rhs += (geo.area * rule.weights[i] * f(x)) * monomials(degree, poly.center, poly.scale, x);
  }
  poly.coefficients = monomial_gram(geo, degree).ldlt().solve(rhs);
  return poly;
}

std::array<ElementPoly, 2> project_gradient(const Mesh& coarse, int coarse_t,
                                            const DiscreteFunction& fine_fn,
                                            std::span<const int> children, int degree)
{
  const ElementGeometry geo = element_geometry(coarse, coarse_t);
  const Point center = geo.centroid();
  const double scale = std::sqrt(geo.area);
  const int n = monomial_count(degree);
  const Mesh& fine = fine_fn.space->mesh();
  const auto& rule = quadrature(fine_fn.space->degree() - 1 + degree);

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  for (int c : children) {
    const ElementGeometry child = element_geometry(fine, c);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Eigen::Vector2d g = fine_fn.gradient(c, child, rule.points[i]);
      const Eigen::VectorXd q = monomials(degree, center, scale, child.map(rule.points[i]));
      rhs.noalias() += (child.area * rule.weights[i]) * q * g.transpose();
    }
  }
  const Eigen::MatrixXd coeffs = monomial_gram(geo, degree).ldlt().solve(rhs);
  std::array<ElementPoly, 2> result;
  for (int k = 0; k < 2; ++k)
    result[k] = ElementPoly{center, scale, degree, coeffs.col(k)};
  return result;
}

} // namespace hh2
