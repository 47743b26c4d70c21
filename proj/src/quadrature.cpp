#include "hh2/quadrature.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace hh2 {

namespace {

QuadratureRule<double> centroid_rule()
{
  QuadratureRule<double> rule;
  rule.order = 1;
  rule.points.push_back(Eigen::Vector3d::Constant(1.0 / 3.0));
  rule.weights.push_back(1.0);
  return rule;
}

QuadratureRule<double> three_point_rule()
{
  QuadratureRule<double> rule;
  rule.order = 2;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d b = Eigen::Vector3d::Constant(1.0 / 6.0);
    b[k] = 2.0 / 3.0;
    rule.points.push_back(b);
    rule.weights.push_back(1.0 / 3.0);
  }
  return rule;
}

// Radon's seven-point rule, degree 5.
QuadratureRule<double> seven_point_rule()
{
  QuadratureRule<double> rule;
  rule.order = 5;
  rule.points.push_back(Eigen::Vector3d::Constant(1.0 / 3.0));
  rule.weights.push_back(9.0 / 40.0);
  const double s15 = std::sqrt(15.0);
  const std::pair<double, double> orbits[] = {
    {(6.0 - s15) / 21.0, (155.0 - s15) / 1200.0},
    {(6.0 + s15) / 21.0, (155.0 + s15) / 1200.0},
  };
  for (const auto& [a, w] : orbits)
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d b = Eigen::Vector3d::Constant(a);
      b[k] = 1.0 - 2.0 * a;
      rule.points.push_back(b);
      rule.weights.push_back(w);
    }
  return rule;
}

std::mutex cache_mutex;

} // namespace

const QuadratureRule<double>& quadrature(int order)
{
  static const QuadratureRule<double> r1 = centroid_rule();
  static const QuadratureRule<double> r2 = three_point_rule();
  static const QuadratureRule<double> r5 = seven_point_rule();
  if (order <= 1)
    return r1;
  if (order == 2)
    return r2;
  if (order <= 5)
    return r5;
  static std::map<int, QuadratureRule<double>> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end())
    it = cache.emplace(order, collapsed_rule<double>(order)).first;
  return it->second;
}

const QuadratureRule<double>& singular_quadrature(int order, int apex)
{
  static std::map<std::pair<int, int>, QuadratureRule<double>> cache;
  std::lock_guard lock(cache_mutex);
  const auto key = std::make_pair(order, apex);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, collapsed_rule<double>(order, apex)).first;
  return it->second;
}

const LineRule& line_quadrature(int order)
{
  static std::map<int, LineRule> cache;
  std::lock_guard lock(cache_mutex);
  const int n = std::max(order, 0) / 2 + 1;
  auto it = cache.find(n);
  if (it == cache.end()) {
    LineRule rule;
    gauss_legendre<double>(n, rule.points, rule.weights);
    it = cache.emplace(n, std::move(rule)).first;
  }
  return it->second;
}

} // namespace hh2
