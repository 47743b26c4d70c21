#include "hh2/problems.hpp"

#include <cmath>
#include <numbers>

namespace hh2 {

double polar_angle(const Point& x)
{
  double phi = std::atan2(x.y(), x.x());
  if (phi < 0.0)
    phi += 2.0 * std::numbers::pi;
  return phi;
}

ProblemSpec problem_smooth()
{
  ProblemSpec p;
  p.id = ProblemId::Smooth;
  p.name = "smooth";
  p.exact = [](const Point& x) {
    const double r2 = x.squaredNorm();
    return (1.0 - 10.0 * r2) * std::exp(-5.0 * r2);
  };
  p.g = *p.exact;
  p.exact_gradient = [](const Point& x) {
    const double r2 = x.squaredNorm();
    return Eigen::Vector2d(x * std::exp(-5.0 * r2) * (100.0 * r2 - 30.0));
  };
  p.f = [](const Point& x) {
    const double r2 = x.squaredNorm();
    return std::exp(-5.0 * r2) * (1000.0 * r2 * r2 - 700.0 * r2 + 60.0);
  };
  return p;
}

ProblemSpec problem_singular_known()
{
  ProblemSpec p;
  p.id = ProblemId::SingularKnown;
  p.name = "singular-known";
  p.exact = [](const Point& x) {
    const double r = x.norm();
    if (r == 0.0)
      return 0.0;
    return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * polar_angle(x) / 3.0);
  };
  p.g = *p.exact;
  p.exact_gradient = [](const Point& x) {
    const double r = x.norm();
    const double phi = polar_angle(x);
    const double scale = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
    return Eigen::Vector2d(-scale * std::sin(phi / 3.0), scale * std::cos(phi / 3.0));
  };
  p.f = [](const Point&) { return 0.0; };
  p.singular_point = Point::Zero();
  return p;
}

ProblemSpec problem_singular_unknown()
{
  ProblemSpec p;
  p.id = ProblemId::SingularUnknown;
  p.name = "singular-unknown";
  p.f = [](const Point&) { return 1.0; };
  p.g = [](const Point&) { return 0.0; };
  p.homogeneous = true;
  p.singular_point = Point::Zero();
  return p;
}

ProblemSpec problem_by_name(std::string_view name)
{
  if (name == "smooth")
    return problem_smooth();
  if (name == "singular-known")
    return problem_singular_known();
  if (name == "singular-unknown")
    return problem_singular_unknown();
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

} // namespace hh2
