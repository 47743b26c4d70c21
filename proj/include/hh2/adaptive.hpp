#pragma once

// Adaptive loop driven by (h - h/2) estimators:
//
//   (i)   solve on the uniform refinement of the current mesh,
//   (ii)  compute eta(T, u_hat) for every element of the current mesh,
//   (iii) Doerfler marking with parameter theta,
//   (iv)  refine the marked elements.

#include "hh2/estimators.hpp"
#include "hh2/harness.hpp"
#include "hh2/mesh.hpp"
#include "hh2/problems.hpp"
#include "hh2/solve.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace hh2 {

struct LoopConfig
{
  double theta = 0.5;
  int degree = 1;
  RefineMode mode = RefineMode::M3;
  EstimatorVariant variant = default_variant(1, RefineMode::M3);
  int max_elements = 200000;  ///< levels are computed while #T_l does not exceed this
  int max_levels = 1000;
  /// Also solve on T_l to report errors, mu_tilde and the residual estimator.
  bool reference_solve = true;
  SolverOptions solver;
};

/// Throws ConfigError for theta outside (0, 1], unsupported degree, or an
/// estimator variant that the degree/mode combination does not allow.
void validate(const LoopConfig& config);

/// Minimal set M with  theta * sum_T eta(T)^2 <= sum_{T in M} eta(T)^2,
/// taken in order of decreasing indicator (ties: smaller id first). theta = 1
/// returns every element. Result is sorted by element id.
std::vector<int> doerfler_mark(std::span<const double> squared, double theta);
std::vector<int> doerfler_mark(const IndicatorVector& indicators, double theta);

struct LevelState
{
  int level = 0;
  std::shared_ptr<const Mesh> coarse;   ///< T_l
  std::shared_ptr<const Mesh> fine;     ///< uniform refinement of T_l
  DiscreteFunction fine_solution;       ///< u_hat_l
  LocalIndicators local;
  IndicatorVector indicators;           ///< eta_l(T, u_hat_l) for the configured variant
  std::vector<int> marked;              ///< M_l
  std::shared_ptr<const Mesh> next;     ///< T_{l+1}
  SolverStats solver_stats;
};

/// Discrete solution of the problem on a mesh (Dirichlet data by nodal
/// interpolation).
DiscreteFunction solve_problem(std::shared_ptr<const Mesh> mesh, int degree, const ProblemSpec& problem,
                               const SolverOptions& options = {}, const Eigen::VectorXd* initial_guess = nullptr,
                               SolverStats* stats = nullptr);

/// One pass of steps (i)-(iv) on `mesh`. A coarse discrete solution, when
/// given, only serves as the starting vector of the iterative solver.
LevelState adaptive_step(std::shared_ptr<const Mesh> mesh, int level, const LoopConfig& config,
                         const ProblemSpec& problem, const DiscreteFunction* coarse_solution = nullptr);

/// Diagnostics of one level; the coarse solution is the Galerkin solution on
/// T_l if it was computed.
LevelRecord make_record(const LevelState& state, const ProblemSpec& problem, const LoopConfig& config,
                        const DiscreteFunction* coarse_solution);

using LevelObserver = std::function<void(const LevelState&, const LevelRecord&)>;

/// Runs the loop from `initial` until the stop rule triggers.
std::vector<LevelRecord> run(const LoopConfig& config, const ProblemSpec& problem,
                             std::shared_ptr<const Mesh> initial, const LevelObserver& observer = {});

/// Same, starting from the 12-element L-shaped mesh.
std::vector<LevelRecord> run(const LoopConfig& config, const ProblemSpec& problem,
                             const LevelObserver& observer = {});

} // namespace hh2
