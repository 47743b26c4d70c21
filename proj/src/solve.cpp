#include "hh2/solve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace hh2 {

CoefficientField::CoefficientField(std::vector<Matrix2> per_initial_element)
  : matrices_(std::move(per_initial_element))
{
  roots_.reserve(matrices_.size());
  for (const Matrix2& m : matrices_) {
    if (!m.allFinite() || std::abs(m(0, 1) - m(1, 0)) > 1e-14 * m.norm())
      throw InputError("coefficient matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix2> eig(m);
    if (!(eig.eigenvalues().minCoeff() > 0.0))
      throw InputError("coefficient matrix is not positive definite");
    roots_.push_back(eig.operatorSqrt());
  }
}

const Matrix2& CoefficientField::matrix(const Mesh& mesh, int t) const
{
  static const Matrix2 identity = Matrix2::Identity();
  if (matrices_.empty())
    return identity;
  return matrices_.at(mesh.triangle(t).origin);
}

const Matrix2& CoefficientField::sqrt_matrix(const Mesh& mesh, int t) const
{
  static const Matrix2 identity = Matrix2::Identity();
  if (roots_.empty())
    return identity;
  return roots_.at(mesh.triangle(t).origin);
}

namespace {

using Triplet = Eigen::Triplet<double>;

template <typename Fn>
void for_each_local_stiffness(const FeSpace& space, const CoefficientField& a, Fn&& fn)
{
  const Mesh& mesh = space.mesh();
  const int p = space.degree();
  const int n = space.dofs_per_element();
  const auto& rule = quadrature(2 * p - 2);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    const Matrix2& A = a.matrix(mesh, t);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6> k(n, n);
    k.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const LocalGradients g = basis_gradients(p, geo, rule.points[q]);
      k.noalias() += (geo.area * rule.weights[q]) * g * A * g.transpose();
    }
    fn(t, k);
  }
}

} // namespace

SparseMatrix assemble_stiffness(const FeSpace& space, const CoefficientField& a)
{
  const int n = space.dofs_per_element();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(space.mesh().num_triangles()) * n * n);
  for_each_local_stiffness(space, a, [&](int t, const auto& k) {
    const auto dofs = space.element_dofs(t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        triplets.emplace_back(dofs[i], dofs[j], k(i, j));
  });
  SparseMatrix m(space.num_dofs(), space.num_dofs());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseSystem assemble(std::shared_ptr<const FeSpace> space, const CoefficientField& a, const ScalarField& f)
{
  SparseSystem sys;
  sys.matrix = assemble_stiffness(*space, a);
  sys.rhs = Eigen::VectorXd::Zero(space->num_dofs());
  sys.values = Eigen::VectorXd::Zero(space->num_dofs());

  const Mesh& mesh = space->mesh();
  const int p = space->degree();
  const auto& rule = quadrature(2 * p + 4);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    LocalVector local = LocalVector::Zero(space->dofs_per_element());
    for (std::size_t q = 0; q < rule.size(); ++q)
      local += (geo.area * rule.weights[q] * f(geo.map(rule.points[q]))) * basis_values(p, rule.points[q]);
    const auto dofs = space->element_dofs(t);
    for (std::size_t i = 0; i < dofs.size(); ++i)
      sys.rhs[dofs[i]] += local[static_cast<int>(i)];
  }
  sys.space = std::move(space);
  return sys;
}

SparseSystem apply_dirichlet(const SparseSystem& system, const Eigen::VectorXd& dof_values)
{
  const FeSpace& space = *system.space;
  const int n = space.num_dofs();
  SparseSystem sys = system;
  sys.constrained.clear();
  sys.free_dofs.clear();
  sys.values = Eigen::VectorXd::Zero(n);

  std::vector<int> reduced_index(n, -1);
  for (int i = 0; i < n; ++i) {
    if (space.is_boundary_dof(i)) {
      sys.constrained.push_back(i);
      sys.values[i] = dof_values[i];
    } else {
      reduced_index[i] = static_cast<int>(sys.free_dofs.size());
      sys.free_dofs.push_back(i);
    }
  }

  const int nf = static_cast<int>(sys.free_dofs.size());
  sys.reduced_rhs.resize(nf);
  for (int k = 0; k < nf; ++k)
    sys.reduced_rhs[k] = system.rhs[sys.free_dofs[k]];

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(system.matrix.nonZeros()));
  for (int col = 0; col < system.matrix.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(system.matrix, col); it; ++it) {
      const int r = reduced_index[it.row()];
      if (r < 0)
        continue;
      const int c = reduced_index[col];
      if (c >= 0)
        triplets.emplace_back(r, c, it.value());
      else
        sys.reduced_rhs[r] -= it.value() * sys.values[col];
    }
  sys.reduced_matrix.resize(nf, nf);
  sys.reduced_matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

SparseSystem apply_dirichlet(const SparseSystem& system, const ScalarField& g)
{
  const FeSpace& space = *system.space;
  Eigen::VectorXd values = Eigen::VectorXd::Zero(space.num_dofs());
  for (int i = 0; i < space.num_dofs(); ++i)
    if (space.is_boundary_dof(i))
      values[i] = g(space.dof_point(i));
  return apply_dirichlet(system, values);
}

namespace {

DiscreteSolution expand(const SparseSystem& system, const Eigen::VectorXd& reduced)
{
  if (!system.has_constraints())
    return {system.space, reduced};
  Eigen::VectorXd full = system.values;
  for (std::size_t k = 0; k < system.free_dofs.size(); ++k)
    full[system.free_dofs[k]] = reduced[static_cast<Eigen::Index>(k)];
  return {system.space, full};
}

Eigen::VectorXd dense_solve(const SparseMatrix& m, const Eigen::VectorXd& rhs)
{
  const Eigen::MatrixXd dense(m);
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  if (llt.info() != Eigen::Success)
    throw SolverError("dense Cholesky failed: matrix not positive definite", 0);
  return llt.solve(rhs);
}

} // namespace

DiscreteSolution solve_dense(const SparseSystem& system)
{
  const bool reduced = system.has_constraints();
  const SparseMatrix& m = reduced ? system.reduced_matrix : system.matrix;
  const Eigen::VectorXd& rhs = reduced ? system.reduced_rhs : system.rhs;
  return expand(system, dense_solve(m, rhs));
}

DiscreteSolution solve_system(const SparseSystem& system, const SolverOptions& options,
                              const Eigen::VectorXd* initial_guess, SolverStats* stats)
{
  const bool reduced = system.has_constraints();
  const SparseMatrix& m = reduced ? system.reduced_matrix : system.matrix;
  const Eigen::VectorXd& rhs = reduced ? system.reduced_rhs : system.rhs;
  const Eigen::Index n = rhs.size();

  SolverStats local;
  if (n == 0)
    return expand(system, Eigen::VectorXd());

  if (options.method == SolverMethod::SparseLdlt) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(m);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd x = ldlt.solve(rhs);
      const double bnorm = rhs.norm();
      const double res = bnorm > 0.0 ? (m * x - rhs).norm() / bnorm : (m * x).norm();
      if (x.allFinite() && res <= options.tolerance) {
        local.direct = true;
        local.relative_residual = res;
        if (stats != nullptr)
          *stats = local;
        return expand(system, x);
      }
      // otherwise polish / redo with CG below
    }
  }

  const int max_it = options.max_iterations > 0
                       ? options.max_iterations
                       : std::max(100, static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))));
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(options.tolerance);
  cg.setMaxIterations(max_it);
  cg.compute(m);

  Eigen::VectorXd x;
  if (initial_guess != nullptr) {
    Eigen::VectorXd guess(n);
    if (reduced)
      for (Eigen::Index k = 0; k < n; ++k)
        guess[k] = (*initial_guess)[system.free_dofs[static_cast<std::size_t>(k)]];
    else
      guess = *initial_guess;
    x = cg.solveWithGuess(rhs, guess);
  } else {
    x = cg.solve(rhs);
  }
  local.iterations = static_cast<int>(cg.iterations());
  local.relative_residual = cg.error();

  if (cg.info() != Eigen::Success || !x.allFinite()) {
    if (n > options.dense_limit)
      throw SolverError("conjugate gradients did not converge after " + std::to_string(cg.iterations()) +
                          " iterations (relative residual " + std::to_string(cg.error()) + ")",
                        static_cast<int>(cg.iterations()));
    x = dense_solve(m, rhs);
    local.dense = true;
    local.relative_residual = rhs.norm() > 0.0 ? (m * x - rhs).norm() / rhs.norm() : 0.0;
  }
  if (stats != nullptr)
    *stats = local;
  return expand(system, x);
}

Eigen::VectorXd energy_norm_squared_per_element(const FeSpace& space, const Eigen::VectorXd& coefficients,
                                                const CoefficientField& a)
{
  const Mesh& mesh = space.mesh();
  const int p = space.degree();
  const auto& rule = quadrature(2 * p - 2);
  Eigen::VectorXd out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    const auto dofs = space.element_dofs(t);
    LocalVector c(static_cast<int>(dofs.size()));
    for (std::size_t k = 0; k < dofs.size(); ++k)
      c[static_cast<int>(k)] = coefficients[dofs[k]];
    const Matrix2& A = a.matrix(mesh, t);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d g = basis_gradients(p, geo, rule.points[q]).transpose() * c;
      sum += rule.weights[q] * g.dot(A * g);
    }
    out[t] = geo.area * sum;
  }
  return out;
}

double energy_norm(const FeSpace& space, const Eigen::VectorXd& coefficients, const CoefficientField& a)
{
  return std::sqrt(energy_norm_squared_per_element(space, coefficients, a).sum());
}

} // namespace hh2
