#pragma once

// Model problems  -div(A grad u) = f  in the L-shaped domain, u = g on the
// boundary.

#include "hh2/common.hpp"
#include "hh2/solve.hpp"
#include "hh2/space.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace hh2 {

enum class ProblemId
{
  Smooth,           ///< u = (1 - 10 r^2) exp(-5 r^2)
  SingularKnown,    ///< u = r^{2/3} sin(2 phi / 3), f = 0
  SingularUnknown,  ///< f = 1, g = 0
  Custom,
};

struct ProblemSpec
{
  ProblemId id = ProblemId::Custom;
  std::string name;
  ScalarField f;
  ScalarField g;
  std::optional<ScalarField> exact;
  std::optional<VectorField> exact_gradient;
  CoefficientField a;
  /// Point where grad u is singular; elements touching it get a graded rule
  /// when the true error is integrated.
  std::optional<Point> singular_point;
  bool homogeneous = false;  ///< g == 0
};

ProblemSpec problem_smooth();
ProblemSpec problem_singular_known();
ProblemSpec problem_singular_unknown();

/// "smooth", "singular-known" or "singular-unknown"; ConfigError otherwise.
ProblemSpec problem_by_name(std::string_view name);

/// Polar angle in [0, 2 pi).
double polar_angle(const Point& x);

} // namespace hh2
