#pragma once

// Per-level bookkeeping for convergence studies: true errors, efficiency and
// reliability indices, log-log rate fits and CSV output.

#include "hh2/common.hpp"
#include "hh2/estimators.hpp"
#include "hh2/problems.hpp"
#include "hh2/solve.hpp"
#include "hh2/space.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hh2 {

/// Quadrature orders used for  || A^{1/2} grad(u - u_h) ||.
struct ErrorQuadrature
{
  int regular_order = -1;   ///< -1: 2p + 4
  int singular_order = 19;  ///< on elements with a vertex at the singular point
  std::optional<Point> singular_point;
};

double true_error(const FeSpace& space, const Eigen::VectorXd& coefficients, const VectorField& exact_gradient,
                  const CoefficientField& a, const ErrorQuadrature& quad = {});

struct LevelRecord
{
  int level = 0;
  int nrelements = 0;
  int fine_dofs = 0;
  int marked = 0;

  EstimatorReport estimators;
  std::optional<double> error;       ///< || grad(u - u_l) ||
  std::optional<double> fine_error;  ///< || grad(u - u_hat_l) ||
  std::optional<double> error_osc;   ///< (error^2 + osc^2)^{1/2}
  std::optional<double> efficiency;         ///< lambda'' / error_osc
  std::optional<double> reliability;        ///< error_osc / mu''
  std::optional<double> efficiency_plain;   ///< lambda / error
  std::optional<double> reliability_plain;  ///< error / mu

  std::optional<double> residual;    ///< residual estimator of the coarse solution
  /// | ||grad u_hat||^2 - ||grad u_l||^2 - ||grad(u_hat - u_l)||^2 | / ||grad u_hat||^2
  std::optional<double> pythagoras_defect;
  /// max_T lambda(T) / mu(T) over elements with non-negligible mu(T)
  double max_lambda_over_mu = 0.0;
  double min_angle = 0.0;
  int solver_iterations = 0;
};

struct Indices
{
  double efficiency;
  double reliability;
  double efficiency_plain;
  double reliability_plain;
};

/// Both index families; nullopt unless the true error is known.
std::optional<Indices> indices(const LevelRecord& record);

using Quantity = std::function<std::optional<double>(const LevelRecord&)>;

struct RateEstimate
{
  double slope = 0.0;
  double intercept = 0.0;
  int first = 0;  ///< index into the records of the first level used
  int last = 0;   ///< inclusive
  double residual = 0.0;  ///< rms deviation of log(quantity) from the fit
};

/// Least-squares slope of log(y) against log(n). Needs at least 2 points.
RateEstimate fit_rate(std::span<const double> n, std::span<const double> y);

/// Fit over the trailing levels with N >= min_elements, extended backwards to
/// at least min_points levels. Throws InputError if fewer than 5 levels carry
/// the quantity.
RateEstimate estimate_rate(std::span<const LevelRecord> records, const Quantity& quantity,
                           int min_elements = 1000, int min_points = 6);

/// level,nrelements,eta1,...,eta6,errorH1semi,osc,errorH1semiosc,
/// effectivityindex,reliabilityindex,mutilde; eta3/eta6 empty for p = 1.
void write_csv(std::ostream& out, std::span<const LevelRecord> records, int degree);
void write_csv(const std::string& path, std::span<const LevelRecord> records, int degree);

extern const char* const csv_header;

} // namespace hh2
