#pragma once

// Lagrange finite element spaces of degree 1 and 2 on a Mesh, nodal
// interpolation between nested meshes and elementwise L2 projections onto
// polynomials.

#include "hh2/common.hpp"
#include "hh2/mesh.hpp"
#include "hh2/quadrature.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace hh2 {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;
using Barycentric = Eigen::Vector3d;

/// Up to six local basis functions; fixed-capacity so nothing hits the heap.
using LocalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using LocalGradients = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, 6, 2>;

struct ElementGeometry
{
  std::array<Point, 3> corners;
  double area = 0.0;
  /// Row i is the (constant) gradient of the barycentric coordinate i.
  Eigen::Matrix<double, 3, 2> grad_bary;

  Point map(const Barycentric& b) const
  {
    return b[0] * corners[0] + b[1] * corners[1] + b[2] * corners[2];
  }
  Barycentric barycentric(const Point& x) const;
  Point centroid() const { return (corners[0] + corners[1] + corners[2]) / 3.0; }
};

ElementGeometry element_geometry(const Mesh& mesh, int t);
ElementGeometry element_geometry(const std::array<Point, 3>& corners);

constexpr int local_dof_count(int degree) noexcept { return degree == 1 ? 3 : 6; }

/// Barycentric coordinates of the local Lagrange nodes: vertices 0..2, then
/// the midpoints of the local edges opposite vertex 0, 1, 2.
Barycentric local_node(int k);

// Nodal basis: lambda_i for p = 1; lambda_i (2 lambda_i - 1) and
// 4 lambda_a lambda_b on the edge opposite vertex j for p = 2.
LocalVector basis_values(int degree, const Barycentric& b);
LocalGradients basis_gradients(int degree, const ElementGeometry& geo, const Barycentric& b);
/// Hessians are constant per element; entry k is d^2 phi_k (only p = 2 is nonzero).
std::array<Matrix2, 6> basis_hessians(int degree, const ElementGeometry& geo);

class FeSpace
{
public:
  /// Throws InputError unless degree is 1 or 2.
  FeSpace(std::shared_ptr<const Mesh> mesh, int degree);

  int degree() const noexcept { return degree_; }
  int num_dofs() const noexcept { return num_dofs_; }
  int dofs_per_element() const noexcept { return local_dof_count(degree_); }

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }

  /// Global dof ids of triangle t in local basis order. Vertex i has dof i,
  /// edge e has dof num_vertices + e.
  std::span<const int> element_dofs(int t) const
  {
    const int n = dofs_per_element();
    return {dofs_.data() + static_cast<std::size_t>(t) * n, static_cast<std::size_t>(n)};
  }

  bool is_boundary_dof(int i) const { return boundary_[i] != 0; }
  Point dof_point(int i) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  int num_dofs_;
  std::vector<int> dofs_;
  std::vector<char> boundary_;
};

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, int degree);

/// A member of a finite element space.
struct DiscreteFunction
{
  std::shared_ptr<const FeSpace> space;
  Eigen::VectorXd coefficients;

  double value(int t, const Barycentric& b) const;
  Eigen::Vector2d gradient(int t, const ElementGeometry& geo, const Barycentric& b) const;
  LocalVector local_coefficients(int t) const;
};

/// Coefficients of the nodal interpolant of a continuous function.
Eigen::VectorXd interpolate(const FeSpace& space, const ScalarField& fn);

/// Nodal interpolation of a discrete function living on a refinement of the
/// coarse space's mesh. Throws LineageError for unrelated meshes.
Eigen::VectorXd nodal_interpolate(const FeSpace& coarse_space, const DiscreteFunction& fine_fn);

/// Representation of a coarse function in a space on a refinement of its
/// mesh (exact: the coarse space is contained in the fine one).
Eigen::VectorXd prolongate(const DiscreteFunction& coarse_fn, const FeSpace& fine_space);

/// Polynomial on one element in the monomials
///   1, xi, eta, xi^2, xi eta, eta^2, ...   with (xi, eta) = (x - c) / s,
/// c the centroid and s = |T|^{1/2}.
struct ElementPoly
{
  Point center = Point::Zero();
  double scale = 1.0;
  int degree = 0;
  Eigen::VectorXd coefficients;

  double operator()(const Point& x) const;
};

/// Number of monomials of total degree <= d in two variables.
constexpr int monomial_count(int d) noexcept { return (d + 1) * (d + 2) / 2; }

/// Monomial basis values at x for an element with the given centre and scale.
Eigen::VectorXd monomials(int degree, const Point& center, double scale, const Point& x);

/// Gram matrix of the monomial basis over the element (exact quadrature).
Eigen::MatrixXd monomial_gram(const ElementGeometry& geo, int degree);

/// L2(T)-orthogonal projection of f onto polynomials of degree <= `degree`;
/// the moments of f are evaluated with a rule of order `order`.
ElementPoly project_scalar(const ElementGeometry& geo, const ScalarField& f, int degree, int order);

/// Componentwise L2(T)-orthogonal projection of grad(fine_fn) onto polynomials
/// of degree <= `degree` over the coarse triangle `coarse_t`, whose sons in
/// the fine mesh are `children`.
std::array<ElementPoly, 2> project_gradient(const Mesh& coarse, int coarse_t,
                                            const DiscreteFunction& fine_fn,
                                            std::span<const int> children, int degree);

} // namespace hh2
