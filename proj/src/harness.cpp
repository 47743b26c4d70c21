#include "hh2/harness.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace hh2 {

double true_error(const FeSpace& space, const Eigen::VectorXd& coefficients, const VectorField& exact_gradient,
                  const CoefficientField& a, const ErrorQuadrature& quad)
{
  const Mesh& mesh = space.mesh();
  const int p = space.degree();
  const auto& regular = quadrature(quad.regular_order >= 0 ? quad.regular_order : 2 * p + 4);
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    const QuadratureRule<double>* rule = &regular;
    if (quad.singular_point)
      for (int k = 0; k < 3; ++k)
        if ((geo.corners[k] - *quad.singular_point).norm() <= 1e-14)
          rule = &singular_quadrature(quad.singular_order, k);

    const auto dofs = space.element_dofs(t);
    LocalVector c(static_cast<int>(dofs.size()));
    for (std::size_t k = 0; k < dofs.size(); ++k)
      c[static_cast<int>(k)] = coefficients[dofs[k]];
    const Matrix2& A = a.matrix(mesh, t);
    double local = 0.0;
    for (std::size_t q = 0; q < rule->size(); ++q) {
      const Barycentric& b = rule->points[q];
      const Eigen::Vector2d e = exact_gradient(geo.map(b)) - basis_gradients(p, geo, b).transpose() * c;
      local += rule->weights[q] * e.dot(A * e);
    }
    sum += geo.area * local;
  }
  return std::sqrt(sum);
}

std::optional<Indices> indices(const LevelRecord& r)
{
  if (!r.error || !r.error_osc)
    return std::nullopt;
  Indices out;
  out.efficiency = r.estimators.lambda_osc / *r.error_osc;
  out.reliability = *r.error_osc / r.estimators.mu_osc;
  out.efficiency_plain = r.estimators.lambda / *r.error;
  out.reliability_plain = *r.error / r.estimators.mu;
  return out;
}

RateEstimate fit_rate(std::span<const double> n, std::span<const double> y)
{
  if (n.size() != y.size() || n.size() < 2)
    throw InputError("fit_rate: need at least two (N, value) pairs");
  const auto m = static_cast<Eigen::Index>(n.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(n[i] > 0.0) || !(y[i] > 0.0))
      throw InputError("fit_rate: values must be positive");
    design(i, 0) = std::log(n[i]);
    design(i, 1) = 1.0;
    rhs[i] = std::log(y[i]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  RateEstimate est;
  est.slope = coef[0];
  est.intercept = coef[1];
  est.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(m));
  est.last = static_cast<int>(m) - 1;
  return est;
}

RateEstimate estimate_rate(std::span<const LevelRecord> records, const Quantity& quantity, int min_elements,
                           int min_points)
{
  std::vector<int> usable;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto q = quantity(records[i]);
    if (q && *q > 0.0)
      usable.push_back(static_cast<int>(i));
  }
  if (usable.size() < 5)
    throw InputError("estimate_rate: fewer than 5 levels carry the quantity");

  std::size_t start = usable.size();
  while (start > 0 && records[usable[start - 1]].nrelements >= min_elements)
    --start;
  if (usable.size() - start < static_cast<std::size_t>(min_points))
    start = usable.size() >= static_cast<std::size_t>(min_points) ? usable.size() - min_points : 0;

  std::vector<double> n, y;
  for (std::size_t k = start; k < usable.size(); ++k) {
    n.push_back(records[usable[k]].nrelements);
    y.push_back(*quantity(records[usable[k]]));
  }
  RateEstimate est = fit_rate(n, y);
  est.first = usable[start];
  est.last = usable.back();
  return est;
}

const char* const csv_header = "level,nrelements,eta1,eta2,eta3,eta4,eta5,eta6,errorH1semi,osc,errorH1semiosc,"
                               "effectivityindex,reliabilityindex,mutilde";

namespace {

void put(std::ostream& out, std::optional<double> v)
{
  out << ',';
  if (v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", *v);
    out << buf;
  }
}

} // namespace

void write_csv(std::ostream& out, std::span<const LevelRecord> records, int degree)
{
  out << csv_header << '\n';
  for (const auto& r : records) {
    const auto& e = r.estimators;
    const auto idx = indices(r);
    out << r.level << ',' << r.nrelements;
    put(out, e.lambda_res);
    put(out, e.lambda_osc);
    put(out, degree >= 2 ? e.lambda_apx : std::nullopt);
    put(out, e.mu_res);
    put(out, e.mu_osc);
    put(out, degree >= 2 ? e.mu_apx : std::nullopt);
    put(out, r.error);
    put(out, e.osc);
    put(out, r.error_osc);
    put(out, idx ? std::optional(idx->efficiency) : std::nullopt);
    put(out, idx ? std::optional(idx->reliability) : std::nullopt);
    put(out, e.mu_tilde);
    out << '\n';
  }
}

void write_csv(const std::string& path, std::span<const LevelRecord> records, int degree)
{
  std::ofstream out(path);
  if (!out)
    throw InputError("cannot open " + path + " for writing");
  write_csv(out, records, degree);
}

} // namespace hh2
