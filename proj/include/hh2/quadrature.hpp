#pragma once

// Quadrature on triangles in barycentric coordinates. Weights are normalised
// to sum to one, so  int_T g dx  ~=  |T| * sum_i w_i g(x_i).

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace hh2 {

template <typename Scalar>
struct QuadratureRule
{
  using Barycentric = Eigen::Matrix<Scalar, 3, 1>;

  int order = 0;  ///< polynomials up to this total degree are integrated exactly
  std::vector<Barycentric> points;
  std::vector<Scalar> weights;

  std::size_t size() const noexcept { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
template <typename Scalar>
void gauss_legendre(int n, std::vector<Scalar>& nodes, std::vector<Scalar>& weights)
{
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const Scalar beta = Scalar(k) / std::sqrt(Scalar(4 * k * k - 1));
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const Scalar v0 = eig.eigenvectors()(0, i);
    nodes[i] = (eig.eigenvalues()(i) + Scalar(1)) / Scalar(2);
    weights[i] = v0 * v0;  // 2 v0^2 on [-1,1], halved for [0,1]
  }
}

/// Conical product rule: Gauss-Legendre tensor rule on the unit square mapped
/// by the Duffy transformation onto the triangle, with the collapsed side at
/// barycentric vertex `apex`. Exact for total degree `order`; the points
/// accumulate at `apex`, which suits integrands singular there.
template <typename Scalar>
QuadratureRule<Scalar> collapsed_rule(int order, int apex = 2)
{
  // the Duffy Jacobian (1 - t) raises the degree in t by one
  const int n = (order + 3) / 2;
  std::vector<Scalar> x, w;
  gauss_legendre<Scalar>(n, x, w);
  QuadratureRule<Scalar> rule;
  rule.order = order;
  const int i0 = (apex + 1) % 3, i1 = (apex + 2) % 3;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Scalar s = x[i], t = x[j];
      typename QuadratureRule<Scalar>::Barycentric b;
      b[apex] = t;
      b[i0] = (Scalar(1) - t) * (Scalar(1) - s);
      b[i1] = (Scalar(1) - t) * s;
      rule.points.push_back(b);
      rule.weights.push_back(Scalar(2) * w[i] * w[j] * (Scalar(1) - t));
    }
  return rule;
}

/// Cached rule of at least the requested order (orders below 0 are treated
/// as 0). Low orders use symmetric rules (1, 3 and 7 points); from order 6
/// on, conical product rules.
const QuadratureRule<double>& quadrature(int order);

/// Conical product rule of the given order collapsed at vertex `apex`.
const QuadratureRule<double>& singular_quadrature(int order, int apex);

/// Exact integral of x^a y^b over the reference triangle (0,0),(1,0),(0,1),
/// divided by its area: 2 a! b! / (a+b+2)!.
template <typename Scalar>
Scalar reference_monomial_mean(int a, int b)
{
  Scalar num = Scalar(2);
  for (int k = 2; k <= a; ++k)
    num *= Scalar(k);
  for (int k = 2; k <= b; ++k)
    num *= Scalar(k);
  Scalar den = Scalar(1);
  for (int k = 2; k <= a + b + 2; ++k)
    den *= Scalar(k);
  return num / den;
}

/// Gauss rule on [0,1], weights summing to one; used for edge integrals.
struct LineRule
{
  std::vector<double> points;
  std::vector<double> weights;
};
const LineRule& line_quadrature(int order);

} // namespace hh2
