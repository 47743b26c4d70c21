#pragma once

// Galerkin discretisation of  -div(A grad u) = f  with Dirichlet data:
// assembly, symmetric elimination of constrained dofs and the linear solve.

#include "hh2/common.hpp"
#include "hh2/space.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <optional>
#include <vector>

namespace hh2 {

/// Diffusion matrix, constant on each element of the initial mesh and
/// inherited by all descendants. Default constructed: the identity.
class CoefficientField
{
public:
  CoefficientField() = default;
  /// One symmetric positive definite matrix per initial element; throws
  /// InputError otherwise.
  explicit CoefficientField(std::vector<Matrix2> per_initial_element);

  bool is_identity() const noexcept { return matrices_.empty(); }
  const Matrix2& matrix(const Mesh& mesh, int t) const;
  /// Symmetric square root A^{1/2}.
  const Matrix2& sqrt_matrix(const Mesh& mesh, int t) const;

private:
  std::vector<Matrix2> matrices_;
  std::vector<Matrix2> roots_;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SparseSystem
{
  std::shared_ptr<const FeSpace> space;
  SparseMatrix matrix;        ///< stiffness over all dofs
  Eigen::VectorXd rhs;        ///< load over all dofs
  std::vector<int> constrained;
  Eigen::VectorXd values;     ///< full length; prescribed data at constrained dofs, 0 elsewhere
  // Filled by apply_dirichlet: the system on free dofs after moving the
  // constrained columns to the right-hand side.
  std::vector<int> free_dofs;
  SparseMatrix reduced_matrix;
  Eigen::VectorXd reduced_rhs;

  bool has_constraints() const noexcept { return !free_dofs.empty() || !constrained.empty(); }
};

using DiscreteSolution = DiscreteFunction;

/// Stiffness  int A grad phi_i . grad phi_j  (exact) and load  int f phi_i
/// (rule of order 2p + 4).
SparseSystem assemble(std::shared_ptr<const FeSpace> space, const CoefficientField& a, const ScalarField& f);

SparseMatrix assemble_stiffness(const FeSpace& space, const CoefficientField& a);

/// Fixes every boundary dof to g at its Lagrange node.
SparseSystem apply_dirichlet(const SparseSystem& system, const ScalarField& g);
/// Same, with the prescribed values given per dof (entries at interior dofs are ignored).
SparseSystem apply_dirichlet(const SparseSystem& system, const Eigen::VectorXd& dof_values);

enum class SolverMethod
{
  SparseLdlt,  ///< sparse LDL^T with AMD ordering, CG if the residual check fails
  Cg,          ///< Jacobi-preconditioned conjugate gradients
};

struct SolverOptions
{
  SolverMethod method = SolverMethod::SparseLdlt;
  double tolerance = 1e-10;   ///< relative residual
  int max_iterations = -1;    ///< -1: 20 sqrt(n)
  int dense_limit = 2000;     ///< dense Cholesky fallback up to this size
};

struct SolverStats
{
  int iterations = 0;  ///< CG iterations, 0 for a direct solve
  double relative_residual = 0.0;
  bool dense = false;
  bool direct = false;
};

/// Solves on the free dofs. The result always meets the relative residual
/// tolerance; SolverError (with the CG iteration count) otherwise.
DiscreteSolution solve_system(const SparseSystem& system, const SolverOptions& options = {},
                              const Eigen::VectorXd* initial_guess = nullptr,
                              SolverStats* stats = nullptr);

/// Dense Cholesky solve of the same system; test oracle and fallback.
DiscreteSolution solve_dense(const SparseSystem& system);

/// || A^{1/2} grad v ||_Omega by elementwise quadrature (exact).
double energy_norm(const FeSpace& space, const Eigen::VectorXd& coefficients, const CoefficientField& a);

/// Per-element  || A^{1/2} grad v ||_T^2.
Eigen::VectorXd energy_norm_squared_per_element(const FeSpace& space, const Eigen::VectorXd& coefficients,
                                                const CoefficientField& a);

} // namespace hh2
