#pragma once

// (h - h/2)-type a posteriori error estimators.
//
// Given a mesh T and the Galerkin solution u_hat on its uniform refinement,
// for every coarse element T:
//
//   lambda(T) = || (1 - pi) A^{1/2} grad u_hat ||_T      pi: L2 projection onto P^{p-1}(T)
//   mu(T)     = || A^{1/2} grad (1 - I) u_hat ||_T        I: nodal interpolation onto S^p(T)
//   res(T)^2  = h_T^2 sum_{T' son of T} || f + div(A grad u_hat) ||_{T'}^2
//   osc(T)^2  = h_T^2 || (1 - pi) f ||_T^2
//   apx(T)^2  = h_T^2 || (1 - Pi) f ||_T^2                Pi: onto P^{max(p-2,0)}(T)
//
// and the six estimators eta(T)^2 = {lambda, mu}(T)^2 + {res, osc, apx}(T)^2.
// Global values follow the l2 convention eta^2 = sum_T eta(T)^2.
//
// The classical residual estimator (element residuals plus normal jumps on
// interior edges) is provided as an independent reference.

#include "hh2/common.hpp"
#include "hh2/mesh.hpp"
#include "hh2/solve.hpp"
#include "hh2/space.hpp"

#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hh2 {

enum class EstimatorBase
{
  Lambda,
  Mu,
};

enum class DataTerm
{
  Res,
  Osc,
  Apx,
};

struct EstimatorVariant
{
  EstimatorBase base = EstimatorBase::Lambda;
  DataTerm data = DataTerm::Res;

  friend bool operator==(const EstimatorVariant&, const EstimatorVariant&) = default;
};

/// Throws ConfigError unless the variant may drive refinement with the given
/// degree and mode: res and apx need M3, osc needs M3P, apx needs p >= 2.
void validate_variant(EstimatorVariant variant, int degree, RefineMode mode);

/// res for p = 1 with M3, apx for p = 2 with M3, osc with M3P.
EstimatorVariant default_variant(int degree, RefineMode mode);

/// "lambda-res", "mu-osc", ...; throws ConfigError on unknown names.
EstimatorVariant parse_variant(std::string_view name);
std::string to_string(EstimatorVariant variant);

/// A coarse mesh together with a discrete function on its refinement and the
/// father-son relation between them.
class TwoLevel
{
public:
  /// Throws LineageError if the function's mesh does not descend from `coarse`.
  TwoLevel(std::shared_ptr<const Mesh> coarse, DiscreteFunction fine);

  const Mesh& coarse() const noexcept { return *coarse_; }
  const std::shared_ptr<const Mesh>& coarse_ptr() const noexcept { return coarse_; }
  const DiscreteFunction& fine() const noexcept { return fine_; }
  int degree() const noexcept { return fine_.space->degree(); }
  std::span<const int> children(int t) const { return children_[t]; }

private:
  std::shared_ptr<const Mesh> coarse_;
  DiscreteFunction fine_;
  std::vector<std::vector<int>> children_;
};

double lambda_indicator(const TwoLevel& pair, int t, const CoefficientField& a);
double mu_indicator(const TwoLevel& pair, int t, const CoefficientField& a);
double res_indicator(const TwoLevel& pair, int t, const ScalarField& f, const CoefficientField& a);
double osc_indicator(const Mesh& mesh, int t, const ScalarField& f, int degree);
double apx_indicator(const Mesh& mesh, int t, const ScalarField& f, int degree);

/// Values of the coarse nodal interpolant of the fine function at the local
/// Lagrange nodes of coarse element t.
LocalVector coarse_interpolant_on(const TwoLevel& pair, int t);

/// All five ingredients for every coarse element (unsquared).
struct LocalIndicators
{
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  Eigen::VectorXd res;
  Eigen::VectorXd osc;
  Eigen::VectorXd apx;
};

LocalIndicators compute_indicators(const TwoLevel& pair, const ScalarField& f, const CoefficientField& a);

/// eta(T) split into its estimator and data parts.
struct IndicatorVector
{
  Eigen::VectorXd base;
  Eigen::VectorXd data;

  Eigen::VectorXd squared() const { return base.array().square() + data.array().square(); }
  Eigen::VectorXd values() const { return squared().cwiseSqrt(); }
  double total() const { return std::sqrt(squared().sum()); }
  Eigen::Index size() const { return base.size(); }
};

IndicatorVector eta_indicators(EstimatorVariant variant, const LocalIndicators& local);
IndicatorVector eta_indicators(EstimatorVariant variant, const TwoLevel& pair, const ScalarField& f,
                               const CoefficientField& a);

/// Global values of all six estimators; the apx-based ones only for p >= 2.
struct EstimatorReport
{
  double lambda_res = 0.0;  // lambda'
  double lambda_osc = 0.0;  // lambda''
  std::optional<double> lambda_apx;  // lambda'''
  double mu_res = 0.0;      // mu'
  double mu_osc = 0.0;      // mu''
  std::optional<double> mu_apx;      // mu'''
  double lambda = 0.0;      ///< lambda(u_hat) without data terms
  double mu = 0.0;          ///< mu(u_hat) without data terms
  double osc = 0.0;
  double apx = 0.0;
  double res = 0.0;
  std::optional<double> mu_tilde;  ///< || A^{1/2} grad(u_hat - u) || if the coarse solution is known

  double total(EstimatorVariant variant) const;
};

EstimatorReport make_report(const LocalIndicators& local, int degree);

/// || A^{1/2} grad (u_hat - u) || for the coarse Galerkin solution u.
double mu_tilde(const DiscreteFunction& fine, const DiscreteFunction& coarse, const CoefficientField& a);

struct ResidualIndicators
{
  Eigen::VectorXd element;  ///< res(T, u) per triangle
  Eigen::VectorXd facet;    ///< h_E^{1/2} ||[A grad u . n]||_E per edge, 0 on the boundary

  double total() const { return std::sqrt(element.squaredNorm() + facet.squaredNorm()); }
};

ResidualIndicators residual_estimator(const DiscreteFunction& u, const ScalarField& f, const CoefficientField& a);

} // namespace hh2
