#include "hh2/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace hh2 {

void validate_variant(EstimatorVariant variant, int degree, RefineMode mode)
{
  if (degree != 1 && degree != 2)
    throw ConfigError("unsupported polynomial degree " + std::to_string(degree));
  const std::string name = to_string(variant);
  switch (variant.data) {
  case DataTerm::Res:
    if (mode != RefineMode::M3)
      throw ConfigError(name + " requires refinement mode m3");
    break;
  case DataTerm::Osc:
    if (mode != RefineMode::M3P)
      throw ConfigError(name + " requires refinement mode m3p");
    break;
  case DataTerm::Apx:
    if (degree < 2)
      throw ConfigError(name + " requires p >= 2");
    if (mode != RefineMode::M3)
      throw ConfigError(name + " requires refinement mode m3");
    break;
  }
}

EstimatorVariant default_variant(int degree, RefineMode mode)
{
  if (mode == RefineMode::M3P)
    return {EstimatorBase::Lambda, DataTerm::Osc};
  return {EstimatorBase::Lambda, degree >= 2 ? DataTerm::Apx : DataTerm::Res};
}

EstimatorVariant parse_variant(std::string_view name)
{
  const auto dash = name.find('-');
  if (dash == std::string_view::npos)
    throw ConfigError("unknown estimator variant '" + std::string(name) + "'");
  const auto base = name.substr(0, dash);
  const auto data = name.substr(dash + 1);
  EstimatorVariant v;
  if (base == "lambda")
    v.base = EstimatorBase::Lambda;
  else if (base == "mu")
    v.base = EstimatorBase::Mu;
  else
    throw ConfigError("unknown estimator variant '" + std::string(name) + "'");
  if (data == "res")
    v.data = DataTerm::Res;
  else if (data == "osc")
    v.data = DataTerm::Osc;
  else if (data == "apx")
    v.data = DataTerm::Apx;
  else
    throw ConfigError("unknown estimator variant '" + std::string(name) + "'");
  return v;
}

std::string to_string(EstimatorVariant variant)
{
  std::string s = variant.base == EstimatorBase::Lambda ? "lambda-" : "mu-";
  switch (variant.data) {
  case DataTerm::Res:
    return s + "res";
  case DataTerm::Osc:
    return s + "osc";
  case DataTerm::Apx:
    return s + "apx";
  }
  return s;
}

TwoLevel::TwoLevel(std::shared_ptr<const Mesh> coarse, DiscreteFunction fine)
  : coarse_(std::move(coarse)), fine_(std::move(fine)),
    children_(child_map(*coarse_, fine_.space->mesh()))
{}

namespace {

constexpr double containment_tol = 1e-12;

struct ElementTerms
{
  double lambda2 = 0.0;
  double mu2 = 0.0;
  double res2 = 0.0;
};

double divergence_term(int degree, const ElementGeometry& geo, const Matrix2& a, const LocalVector& coeffs)
{
  if (degree == 1)
    return 0.0;
  const auto hess = basis_hessians(degree, geo);
  double div = 0.0;
  for (int k = 0; k < coeffs.size(); ++k)
    div += coeffs[k] * (a.cwiseProduct(hess[k])).sum();
  return div;
}

ElementTerms element_terms(const TwoLevel& pair, int t, const CoefficientField& a, const ScalarField* f)
{
  const Mesh& coarse = pair.coarse();
  const DiscreteFunction& fine = pair.fine();
  const Mesh& fine_mesh = fine.space->mesh();
  const int p = pair.degree();
  const ElementGeometry geo = element_geometry(coarse, t);
  const Matrix2& A = a.matrix(coarse, t);
  const Matrix2& root = a.sqrt_matrix(coarse, t);
  const auto children = pair.children(t);

  const auto proj = project_gradient(coarse, t, fine, children, p - 1);
  const LocalVector interp = coarse_interpolant_on(pair, t);
  const auto& low = quadrature(2 * p - 2);
  const auto& high = quadrature(2 * p + 4);

  ElementTerms out;
  for (int c : children) {
    const ElementGeometry child = element_geometry(fine_mesh, c);
    const LocalVector coeffs = fine.local_coefficients(c);
    for (std::size_t q = 0; q < low.size(); ++q) {
      const Barycentric& b = low.points[q];
      const Point x = child.map(b);
      const Eigen::Vector2d g = basis_gradients(p, child, b).transpose() * coeffs;
      const Eigen::Vector2d pg(proj[0](x), proj[1](x));
      const Eigen::Vector2d gi = basis_gradients(p, geo, geo.barycentric(x)).transpose() * interp;
      const Eigen::Vector2d d = g - gi;
      const double w = child.area * low.weights[q];
      out.lambda2 += w * (root * (g - pg)).squaredNorm();
      out.mu2 += w * d.dot(A * d);
    }
    if (f != nullptr) {
      const double div = divergence_term(p, child, A, coeffs);
      for (std::size_t q = 0; q < high.size(); ++q) {
        const double r = (*f)(child.map(high.points[q])) + div;
        out.res2 += child.area * high.weights[q] * r * r;
      }
    }
  }
  out.res2 *= geo.area;
  return out;
}

double data_term(const Mesh& mesh, int t, const ScalarField& f, int projection_degree, int order)
{
  const ElementGeometry geo = element_geometry(mesh, t);
  const ElementPoly poly = project_scalar(geo, f, projection_degree, order);
  const auto& rule = quadrature(order);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point x = geo.map(rule.points[q]);
    const double r = f(x) - poly(x);
    sum += rule.weights[q] * r * r;
  }
  return std::sqrt(geo.area * geo.area * sum);
}

} // namespace

LocalVector coarse_interpolant_on(const TwoLevel& pair, int t)
{
  const int p = pair.degree();
  const ElementGeometry geo = element_geometry(pair.coarse(), t);
  const Mesh& fine_mesh = pair.fine().space->mesh();
  LocalVector values(local_dof_count(p));
  for (int k = 0; k < values.size(); ++k) {
    const Point x = geo.map(local_node(k));
    bool found = false;
    for (int c : pair.children(t)) {
      const Barycentric b = element_geometry(fine_mesh, c).barycentric(x);
      if (b.minCoeff() >= -containment_tol) {
        values[k] = pair.fine().value(c, b);
        found = true;
        break;
      }
    }
    if (!found)
      throw LineageError("coarse node not covered by its sons");
  }
  return values;
}

double lambda_indicator(const TwoLevel& pair, int t, const CoefficientField& a)
{
  return std::sqrt(element_terms(pair, t, a, nullptr).lambda2);
}

double mu_indicator(const TwoLevel& pair, int t, const CoefficientField& a)
{
  return std::sqrt(element_terms(pair, t, a, nullptr).mu2);
}

double res_indicator(const TwoLevel& pair, int t, const ScalarField& f, const CoefficientField& a)
{
  return std::sqrt(element_terms(pair, t, a, &f).res2);
}

double osc_indicator(const Mesh& mesh, int t, const ScalarField& f, int degree)
{
  return data_term(mesh, t, f, degree - 1, 2 * degree + 4);
}

double apx_indicator(const Mesh& mesh, int t, const ScalarField& f, int degree)
{
  return data_term(mesh, t, f, std::max(degree - 2, 0), 2 * degree + 4);
}

LocalIndicators compute_indicators(const TwoLevel& pair, const ScalarField& f, const CoefficientField& a)
{
  const Mesh& mesh = pair.coarse();
  const int n = mesh.num_triangles();
  const int p = pair.degree();
  LocalIndicators out;
  out.lambda.resize(n);
  out.mu.resize(n);
  out.res.resize(n);
  out.osc.resize(n);
  out.apx.resize(n);
  for (int t = 0; t < n; ++t) {
    const ElementTerms e = element_terms(pair, t, a, &f);
    out.lambda[t] = std::sqrt(e.lambda2);
    out.mu[t] = std::sqrt(e.mu2);
    out.res[t] = std::sqrt(e.res2);
    out.osc[t] = osc_indicator(mesh, t, f, p);
    out.apx[t] = p >= 2 ? apx_indicator(mesh, t, f, p) : out.osc[t];
  }
  return out;
}

IndicatorVector eta_indicators(EstimatorVariant variant, const LocalIndicators& local)
{
  IndicatorVector v;
  v.base = variant.base == EstimatorBase::Lambda ? local.lambda : local.mu;
  switch (variant.data) {
  case DataTerm::Res:
    v.data = local.res;
    break;
  case DataTerm::Osc:
    v.data = local.osc;
    break;
  case DataTerm::Apx:
    v.data = local.apx;
    break;
  }
  return v;
}

IndicatorVector eta_indicators(EstimatorVariant variant, const TwoLevel& pair, const ScalarField& f,
                               const CoefficientField& a)
{
  return eta_indicators(variant, compute_indicators(pair, f, a));
}

double EstimatorReport::total(EstimatorVariant variant) const
{
  const bool lam = variant.base == EstimatorBase::Lambda;
  switch (variant.data) {
  case DataTerm::Res:
    return lam ? lambda_res : mu_res;
  case DataTerm::Osc:
    return lam ? lambda_osc : mu_osc;
  case DataTerm::Apx:
    return lam ? lambda_apx.value_or(lambda_osc) : mu_apx.value_or(mu_osc);
  }
  return 0.0;
}

EstimatorReport make_report(const LocalIndicators& local, int degree)
{
  const double l2 = local.lambda.squaredNorm();
  const double m2 = local.mu.squaredNorm();
  const double r2 = local.res.squaredNorm();
  const double o2 = local.osc.squaredNorm();
  const double a2 = local.apx.squaredNorm();
  EstimatorReport rep;
  rep.lambda = std::sqrt(l2);
  rep.mu = std::sqrt(m2);
  rep.res = std::sqrt(r2);
  rep.osc = std::sqrt(o2);
  rep.apx = std::sqrt(a2);
  rep.lambda_res = std::sqrt(l2 + r2);
  rep.lambda_osc = std::sqrt(l2 + o2);
  rep.mu_res = std::sqrt(m2 + r2);
  rep.mu_osc = std::sqrt(m2 + o2);
  if (degree >= 2) {
    rep.lambda_apx = std::sqrt(l2 + a2);
    rep.mu_apx = std::sqrt(m2 + a2);
  }
  return rep;
}

double mu_tilde(const DiscreteFunction& fine, const DiscreteFunction& coarse, const CoefficientField& a)
{
  const Eigen::VectorXd lifted = prolongate(coarse, *fine.space);
  return energy_norm(*fine.space, fine.coefficients - lifted, a);
}

ResidualIndicators residual_estimator(const DiscreteFunction& u, const ScalarField& f, const CoefficientField& a)
{
  const FeSpace& space = *u.space;
  const Mesh& mesh = space.mesh();
  const int p = space.degree();
  ResidualIndicators out;
  out.element.resize(mesh.num_triangles());
  out.facet = Eigen::VectorXd::Zero(mesh.num_edges());

  const auto& rule = quadrature(2 * p + 4);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    const double div = divergence_term(p, geo, a.matrix(mesh, t), u.local_coefficients(t));
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double r = f(geo.map(rule.points[q])) + div;
      sum += rule.weights[q] * r * r;
    }
    out.element[t] = std::sqrt(geo.area * geo.area * sum);
  }

  const auto& line = line_quadrature(2 * p - 2);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e))
      continue;
    const auto& ab = mesh.edge(e);
    const Point pa = mesh.vertex(ab[0]);
    const Point pb = mesh.vertex(ab[1]);
    const double len = (pb - pa).norm();
    const Eigen::Vector2d normal = Eigen::Vector2d(pb.y() - pa.y(), pa.x() - pb.x()) / len;
    const int tl = mesh.edge_triangles(e)[0];
    const int tr = mesh.edge_triangles(e)[1];
    const ElementGeometry gl = element_geometry(mesh, tl);
    const ElementGeometry gr = element_geometry(mesh, tr);
    double sum = 0.0;
    for (std::size_t q = 0; q < line.points.size(); ++q) {
      const Point x = pa + line.points[q] * (pb - pa);
      const Eigen::Vector2d fl = a.matrix(mesh, tl) * u.gradient(tl, gl, gl.barycentric(x));
      const Eigen::Vector2d fr = a.matrix(mesh, tr) * u.gradient(tr, gr, gr.barycentric(x));
      const double jump = (fl - fr).dot(normal);
      sum += line.weights[q] * jump * jump;
    }
    out.facet[e] = std::sqrt(len * len * sum);
  }
  return out;
}

} // namespace hh2
