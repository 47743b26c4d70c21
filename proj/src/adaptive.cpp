#include "hh2/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hh2 {

void validate(const LoopConfig& config)
{
  if (!(config.theta > 0.0 && config.theta <= 1.0))
    throw ConfigError("theta must lie in (0, 1]");
  if (config.degree != 1 && config.degree != 2)
    throw ConfigError("degree must be 1 or 2");
  if (config.max_elements <= 0 || config.max_levels <= 0)
    throw ConfigError("stop rule needs positive limits");
  validate_variant(config.variant, config.degree, config.mode);
}

std::vector<int> doerfler_mark(std::span<const double> squared, double theta)
{
  if (!(theta > 0.0 && theta <= 1.0))
    throw InputError("doerfler_mark: theta must lie in (0, 1]");
  const int n = static_cast<int>(squared.size());
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (theta == 1.0)
    return all;

  double total = 0.0;
  for (double v : squared) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InputError("doerfler_mark: indicators must be finite and nonnegative");
    total += v;
  }
  if (total == 0.0)
    return {};

  std::vector<int> order = all;
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return squared[i] > squared[j]; });

  // sum in sorted order so the prefix sums are the ones compared against
  const double goal = theta * total;
  std::vector<int> marked;
  double sum = 0.0;
  for (int t : order) {
    if (sum >= goal)
      break;
    marked.push_back(t);
    sum += squared[t];
  }
  // rounding can leave the last prefix a hair below theta * total when theta ~ 1
  if (sum < goal)
    marked = order;
  std::sort(marked.begin(), marked.end());
  return marked;
}

std::vector<int> doerfler_mark(const IndicatorVector& indicators, double theta)
{
  const Eigen::VectorXd sq = indicators.squared();
  return doerfler_mark(std::span<const double>(sq.data(), static_cast<std::size_t>(sq.size())), theta);
}

DiscreteFunction solve_problem(std::shared_ptr<const Mesh> mesh, int degree, const ProblemSpec& problem,
                               const SolverOptions& options, const Eigen::VectorXd* initial_guess,
                               SolverStats* stats)
{
  auto space = build_space(std::move(mesh), degree);
  const SparseSystem system = apply_dirichlet(assemble(space, problem.a, problem.f), problem.g);
  return solve_system(system, options, initial_guess, stats);
}

LevelState adaptive_step(std::shared_ptr<const Mesh> mesh, int level, const LoopConfig& config,
                         const ProblemSpec& problem, const DiscreteFunction* coarse_solution)
{
  LevelState s;
  s.level = level;
  s.coarse = mesh;
  s.fine = std::make_shared<const Mesh>(uniform_refine(*mesh, config.mode));

  // (i) solve
  Eigen::VectorXd guess;
  const Eigen::VectorXd* guess_ptr = nullptr;
  auto fine_space = build_space(s.fine, config.degree);
  if (coarse_solution != nullptr) {
    guess = prolongate(*coarse_solution, *fine_space);
    guess_ptr = &guess;
  }
  const SparseSystem system = apply_dirichlet(assemble(fine_space, problem.a, problem.f), problem.g);
  s.fine_solution = solve_system(system, config.solver, guess_ptr, &s.solver_stats);

  // (ii) estimate
  const TwoLevel pair(mesh, s.fine_solution);
  s.local = compute_indicators(pair, problem.f, problem.a);
  s.indicators = eta_indicators(config.variant, s.local);

  // (iii) mark, (iv) refine
  s.marked = doerfler_mark(s.indicators, config.theta);
  s.next = std::make_shared<const Mesh>(refine(*mesh, s.marked, config.mode));
  return s;
}

LevelRecord make_record(const LevelState& s, const ProblemSpec& problem, const LoopConfig& config,
                        const DiscreteFunction* coarse)
{
  LevelRecord r;
  r.level = s.level;
  r.nrelements = s.coarse->num_triangles();
  r.fine_dofs = s.fine_solution.space->num_dofs();
  r.marked = static_cast<int>(s.marked.size());
  r.estimators = make_report(s.local, config.degree);
  r.min_angle = min_angle(*s.coarse);
  r.solver_iterations = s.solver_stats.iterations;

  const double mu_max = s.local.mu.size() > 0 ? s.local.mu.maxCoeff() : 0.0;
  for (Eigen::Index t = 0; t < s.local.mu.size(); ++t)
    if (s.local.mu[t] > 1e-14 * mu_max)
      r.max_lambda_over_mu = std::max(r.max_lambda_over_mu, s.local.lambda[t] / s.local.mu[t]);

  ErrorQuadrature quad;
  quad.singular_point = problem.singular_point;

  if (coarse != nullptr) {
    const double tilde = mu_tilde(s.fine_solution, *coarse, problem.a);
    r.estimators.mu_tilde = tilde;
    r.residual = residual_estimator(*coarse, problem.f, problem.a).total();
    if (problem.exact_gradient) {
      const double err = true_error(*coarse->space, coarse->coefficients, *problem.exact_gradient, problem.a, quad);
      r.error = err;
      r.error_osc = std::sqrt(err * err + r.estimators.osc * r.estimators.osc);
    }
    if (problem.homogeneous) {
      const double fine2 = std::pow(energy_norm(*s.fine_solution.space, s.fine_solution.coefficients, problem.a), 2);
      const double coarse2 = std::pow(energy_norm(*coarse->space, coarse->coefficients, problem.a), 2);
      if (fine2 > 0.0)
        r.pythagoras_defect = std::abs(fine2 - coarse2 - tilde * tilde) / fine2;
    }
  }
  if (problem.exact_gradient)
    r.fine_error = true_error(*s.fine_solution.space, s.fine_solution.coefficients, *problem.exact_gradient,
                              problem.a, quad);

  if (const auto idx = indices(r)) {
    r.efficiency = idx->efficiency;
    r.reliability = idx->reliability;
    r.efficiency_plain = idx->efficiency_plain;
    r.reliability_plain = idx->reliability_plain;
  }
  return r;
}

std::vector<LevelRecord> run(const LoopConfig& config, const ProblemSpec& problem,
                             std::shared_ptr<const Mesh> initial, const LevelObserver& observer)
{
  validate(config);
  std::vector<LevelRecord> records;
  std::shared_ptr<const Mesh> mesh = std::move(initial);
  std::optional<DiscreteFunction> previous;
  for (int level = 0; level < config.max_levels && mesh->num_triangles() <= config.max_elements; ++level) {
    std::optional<DiscreteFunction> coarse;
    if (config.reference_solve) {
      // nested iteration: T_l refines T_{l-1}
      Eigen::VectorXd guess;
      if (previous)
        guess = prolongate(*previous, *build_space(mesh, config.degree));
      coarse = solve_problem(mesh, config.degree, problem, config.solver, previous ? &guess : nullptr);
    }
    LevelState s = adaptive_step(mesh, level, config, problem, coarse ? &*coarse : nullptr);
    records.push_back(make_record(s, problem, config, coarse ? &*coarse : nullptr));
    if (observer)
      observer(s, records.back());
    mesh = s.next;
    previous = std::move(coarse);
  }
  return records;
}

std::vector<LevelRecord> run(const LoopConfig& config, const ProblemSpec& problem, const LevelObserver& observer)
{
  return run(config, problem, std::make_shared<const Mesh>(initial_lshape()), observer);
}

} // namespace hh2
