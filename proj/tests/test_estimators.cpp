#include "hh2/estimators.hpp"
#include "hh2/problems.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hh2;

namespace {

std::shared_ptr<const Mesh> graded(int rounds, RefineMode mode = RefineMode::M3)
{
  Mesh m = initial_lshape();
  for (int k = 0; k < rounds; ++k) {
    std::vector<int> marked;
    for (int t = 0; t < m.num_triangles(); t += 3)
      marked.push_back(t);
    m = refine(m, marked, mode);
  }
  return std::make_shared<const Mesh>(std::move(m));
}

DiscreteFunction random_function(std::shared_ptr<const Mesh> mesh, int p, std::mt19937& rng)
{
  std::normal_distribution<double> n01;
  auto s = build_space(std::move(mesh), p);
  Eigen::VectorXd c(s->num_dofs());
  for (auto& v : c)
    v = n01(rng);
  return {s, c};
}

TwoLevel random_pair(std::shared_ptr<const Mesh> coarse, int p, RefineMode mode, std::mt19937& rng)
{
  auto fine = std::make_shared<const Mesh>(uniform_refine(*coarse, mode));
  return TwoLevel(coarse, random_function(fine, p, rng));
}

CoefficientField anisotropic()
{
  std::vector<Matrix2> a;
  for (int k = 0; k < 12; ++k)
    a.push_back((Matrix2() << 1.0 + 0.2 * k, 0.3, 0.3, 2.0 - 0.1 * k).finished());
  return CoefficientField(a);
}

ScalarField zero() { return [](const Point&) { return 0.0; }; }

} // namespace

TEST_CASE("variants: parsing, defaults, admissibility")
{
  for (const char* name : {"lambda-res", "lambda-osc", "lambda-apx", "mu-res", "mu-osc", "mu-apx"})
    CHECK(to_string(parse_variant(name)) == name);
  CHECK_THROWS_AS(parse_variant("lambda"), ConfigError);
  CHECK_THROWS_AS(parse_variant("nu-res"), ConfigError);
  CHECK_THROWS_AS(parse_variant("mu-xyz"), ConfigError);

  CHECK(default_variant(1, RefineMode::M3) == parse_variant("lambda-res"));
  CHECK(default_variant(2, RefineMode::M3) == parse_variant("lambda-apx"));
  CHECK(default_variant(1, RefineMode::M3P) == parse_variant("lambda-osc"));
  CHECK(default_variant(2, RefineMode::M3P) == parse_variant("lambda-osc"));

  CHECK_NOTHROW(validate_variant(parse_variant("mu-res"), 1, RefineMode::M3));
  CHECK_THROWS_AS(validate_variant(parse_variant("mu-res"), 1, RefineMode::M3P), ConfigError);
  CHECK_NOTHROW(validate_variant(parse_variant("lambda-osc"), 2, RefineMode::M3P));
  CHECK_THROWS_AS(validate_variant(parse_variant("lambda-osc"), 2, RefineMode::M3), ConfigError);
  CHECK_THROWS_AS(validate_variant(parse_variant("lambda-apx"), 1, RefineMode::M3), ConfigError);
  CHECK_NOTHROW(validate_variant(parse_variant("lambda-apx"), 2, RefineMode::M3));
  CHECK_THROWS_AS(validate_variant(parse_variant("lambda-apx"), 2, RefineMode::M3P), ConfigError);
  CHECK_THROWS_AS(validate_variant(parse_variant("lambda-res"), 3, RefineMode::M3), ConfigError);
}

TEST_CASE("coarse functions have zero lambda and mu")
{
  std::mt19937 rng(1);
  const auto coarse = graded(2);
  for (int p : {1, 2})
    for (RefineMode mode : {RefineMode::M3, RefineMode::M3P}) {
      const DiscreteFunction u = random_function(coarse, p, rng);
      auto fine = build_space(std::make_shared<const Mesh>(uniform_refine(*coarse, mode)), p);
      const TwoLevel pair(coarse, DiscreteFunction{fine, prolongate(u, *fine)});
      const auto a = anisotropic();
      for (int t = 0; t < coarse->num_triangles(); ++t) {
        CHECK(lambda_indicator(pair, t, a) < 1e-12);
        CHECK(mu_indicator(pair, t, a) < 1e-12);
      }
    }
}

TEST_CASE("p = 1 lambda is the spread of the son gradients")
{
  std::mt19937 rng(2);
  const auto coarse = graded(2);
  const TwoLevel pair = random_pair(coarse, 1, RefineMode::M3, rng);
  const Mesh& fine = pair.fine().space->mesh();
  for (int t = 0; t < coarse->num_triangles(); ++t) {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector2d> g;
    for (int c : pair.children(t)) {
      g.push_back(pair.fine().gradient(c, element_geometry(fine, c), Barycentric::Constant(1.0 / 3)));
      mean += fine.area(c) * g.back();
    }
    mean /= coarse->area(t);
    double expected = 0.0;
    int k = 0;
    for (int c : pair.children(t))
      expected += fine.area(c) * (g[k++] - mean).squaredNorm();
    CHECK(lambda_indicator(pair, t, {}) == doctest::Approx(std::sqrt(expected)).epsilon(1e-12));
  }
}

TEST_CASE("lambda uses the projection of A^{1/2} grad u")
{
  // the library applies the root after projecting; here it goes first
  std::mt19937 rng(3);
  const auto coarse = graded(1);
  const auto a = anisotropic();
  for (int p : {1, 2}) {
    const TwoLevel pair = random_pair(coarse, p, RefineMode::M3, rng);
    const Mesh& fine = pair.fine().space->mesh();
    for (int t = 0; t < coarse->num_triangles(); ++t) {
      const Matrix2& root = a.sqrt_matrix(*coarse, t);
      const auto pg = project_gradient(*coarse, t, pair.fine(), pair.children(t), p - 1);
      // project A^{1/2} grad u through its own moments
      const ElementGeometry cgeo = element_geometry(*coarse, t);
      const int nm = monomial_count(p - 1);
      const Eigen::MatrixXd G = monomial_gram(cgeo, p - 1);
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nm, 2);
      const auto& rule = quadrature(2 * p);
      for (int c : pair.children(t)) {
        const auto geo = element_geometry(fine, c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Point x = geo.map(rule.points[q]);
          const Eigen::Vector2d v = root * pair.fine().gradient(c, geo, rule.points[q]);
          rhs += geo.area * rule.weights[q] * monomials(p - 1, pg[0].center, pg[0].scale, x) * v.transpose();
        }
      }
      const Eigen::MatrixXd coef = G.ldlt().solve(rhs);
      double direct = 0.0;
      for (int c : pair.children(t)) {
        const auto geo = element_geometry(fine, c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Point x = geo.map(rule.points[q]);
          const Eigen::Vector2d v = root * pair.fine().gradient(c, geo, rule.points[q]);
          const Eigen::Vector2d pv = coef.transpose() * monomials(p - 1, pg[0].center, pg[0].scale, x);
          direct += geo.area * rule.weights[q] * (v - pv).squaredNorm();
        }
      }
      CHECK(lambda_indicator(pair, t, a) == doctest::Approx(std::sqrt(direct)).epsilon(1e-10));
    }
  }
}

TEST_CASE("mu against interpolation and prolongation")
{
  std::mt19937 rng(4);
  const auto coarse = graded(2);
  const auto a = anisotropic();
  for (int p : {1, 2})
    for (RefineMode mode : {RefineMode::M3, RefineMode::M3P}) {
      const TwoLevel pair = random_pair(coarse, p, mode, rng);
      const auto cs = build_space(coarse, p);
      const DiscreteFunction iu{cs, nodal_interpolate(*cs, pair.fine())};
      const FeSpace& fs = *pair.fine().space;
      const Eigen::VectorXd diff = pair.fine().coefficients - prolongate(iu, fs);
      const Eigen::VectorXd per = energy_norm_squared_per_element(fs, diff, a);
      for (int t = 0; t < coarse->num_triangles(); ++t) {
        double sum = 0.0;
        for (int c : pair.children(t))
          sum += per[c];
        CHECK(mu_indicator(pair, t, a) == doctest::Approx(std::sqrt(sum)).epsilon(1e-10));
      }
    }
}

TEST_CASE("lambda <= mu elementwise; mu / lambda stays bounded")
{
  std::mt19937 rng(5);
  double worst = 0.0;
  for (int p : {1, 2})
    for (RefineMode mode : {RefineMode::M3, RefineMode::M3P})
      for (const CoefficientField& a : {CoefficientField{}, anisotropic()})
        for (int trial = 0; trial < 3; ++trial) {
          const TwoLevel pair = random_pair(graded(trial, mode), p, mode, rng);
          const auto loc = compute_indicators(pair, zero(), a);
          for (Eigen::Index t = 0; t < loc.lambda.size(); ++t) {
            CHECK(loc.lambda[t] <= loc.mu[t] * (1 + 1e-12));
            if (loc.lambda[t] > 0)
              worst = std::max(worst, loc.mu[t] / loc.lambda[t]);
          }
        }
  MESSAGE("largest mu(T)/lambda(T) over random fine functions: " << worst);
  CHECK(std::isfinite(worst));
}

TEST_CASE("global chain lambda <= mu_tilde <= mu for Galerkin solutions")
{
  for (const ProblemSpec& pr : {problem_smooth(), problem_singular_known(), problem_singular_unknown()})
    for (int p : {1, 2})
      for (RefineMode mode : {RefineMode::M3, RefineMode::M3P}) {
        const auto coarse = graded(2, mode);
        const auto fine = std::make_shared<const Mesh>(uniform_refine(*coarse, mode));
        const auto u = solve_system(apply_dirichlet(assemble(build_space(coarse, p), pr.a, pr.f), pr.g));
        const auto uh = solve_system(apply_dirichlet(assemble(build_space(fine, p), pr.a, pr.f), pr.g));
        const TwoLevel pair(coarse, uh);
        const auto rep = make_report(compute_indicators(pair, pr.f, pr.a), p);
        const double tilde = mu_tilde(uh, u, pr.a);
        CAPTURE(pr.name);
        CAPTURE(p);
        CHECK(rep.lambda <= tilde * (1 + 1e-10));
        CHECK(tilde <= rep.mu * (1 + 1e-10));
      }
}

TEST_CASE("element residual")
{
  std::mt19937 rng(6);
  const auto coarse = graded(1);
  const ScalarField f = [](const Point& x) { return std::cos(x.x()) + x.y() * x.y(); };

  // p = 1, constant A: h_T^2 ||f||_T^2
  const TwoLevel p1 = random_pair(coarse, 1, RefineMode::M3, rng);
  const auto& rule = quadrature(20);
  for (int t = 0; t < coarse->num_triangles(); ++t) {
    const auto geo = element_geometry(*coarse, t);
    double ff = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      ff += rule.weights[q] * std::pow(f(geo.map(rule.points[q])), 2);
    ff *= geo.area;
    CHECK(res_indicator(p1, t, f, anisotropic()) == doctest::Approx(std::sqrt(geo.area * ff)).epsilon(1e-8));
    CHECK(res_indicator(p1, t, zero(), {}) == 0.0);
  }

  // p = 2, f = 0: div(A grad u) by differencing the discrete gradient
  const auto a = anisotropic();
  const TwoLevel p2 = random_pair(coarse, 2, RefineMode::M3, rng);
  const Mesh& fine = p2.fine().space->mesh();
  for (int t = 0; t < coarse->num_triangles(); ++t) {
    const Matrix2& A = a.matrix(*coarse, t);
    double sum = 0.0;
    for (int c : p2.children(t)) {
      const auto geo = element_geometry(fine, c);
      const Point x0 = geo.centroid();
      const double h = 1e-4;
      double div = 0.0;
      for (int d = 0; d < 2; ++d) {
        const Point e = Point::Unit(d) * h;
        const Eigen::Vector2d gp = A * p2.fine().gradient(c, geo, geo.barycentric(x0 + e));
        const Eigen::Vector2d gm = A * p2.fine().gradient(c, geo, geo.barycentric(x0 - e));
        div += (gp[d] - gm[d]) / (2 * h);
      }
      sum += geo.area * div * div;  // constant per son
    }
    CHECK(res_indicator(p2, t, zero(), a) ==
          doctest::Approx(std::sqrt(coarse->area(t) * sum)).epsilon(1e-6));
  }
}

TEST_CASE("oscillation and approximation terms")
{
  const Mesh unit({Point(0, 0), Point(1, 0), Point(0, 1)}, {Triangle{{0, 1, 2}}});
  const ScalarField one = [](const Point&) { return 1.0; };
  const ScalarField x = [](const Point& y) { return y.x(); };
  CHECK(osc_indicator(unit, 0, one, 1) < 1e-15);
  CHECK(osc_indicator(unit, 0, one, 2) < 1e-15);
  CHECK(apx_indicator(unit, 0, one, 2) < 1e-15);
  // ||x - 1/3||^2 = 1/12 - (1/2)(1/9) = 1/36, h_T^2 = 1/2
  CHECK(osc_indicator(unit, 0, x, 1) == doctest::Approx(std::sqrt(1.0 / 72)).epsilon(1e-13));
  CHECK(apx_indicator(unit, 0, x, 2) == doctest::Approx(std::sqrt(1.0 / 72)).epsilon(1e-13));
  CHECK(osc_indicator(unit, 0, x, 2) < 1e-15);
}

TEST_CASE("indicator vectors compose base and data terms")
{
  std::mt19937 rng(7);
  const auto coarse = graded(2);
  const auto pr = problem_smooth();
  const TwoLevel pair = random_pair(coarse, 2, RefineMode::M3, rng);
  const auto loc = compute_indicators(pair, pr.f, pr.a);
  const auto rep = make_report(loc, 2);
  for (const char* name : {"lambda-res", "lambda-osc", "lambda-apx", "mu-res", "mu-osc", "mu-apx"}) {
    const EstimatorVariant v = parse_variant(name);
    const IndicatorVector eta = eta_indicators(v, loc);
    const Eigen::VectorXd& base = v.base == EstimatorBase::Lambda ? loc.lambda : loc.mu;
    const Eigen::VectorXd& data = v.data == DataTerm::Res ? loc.res : v.data == DataTerm::Osc ? loc.osc : loc.apx;
    double manual = 0.0;
    for (Eigen::Index t = 0; t < eta.size(); ++t) {
      const double e2 = base[t] * base[t] + data[t] * data[t];
      CHECK(eta.squared()[t] == doctest::Approx(e2).epsilon(1e-14));
      manual += e2;
    }
    CHECK(eta.total() == doctest::Approx(std::sqrt(manual)).epsilon(1e-12));
    CHECK(rep.total(v) == doctest::Approx(std::sqrt(manual)).epsilon(1e-12));
  }
  CHECK(rep.lambda_res <= rep.mu_res);
  CHECK(rep.lambda_osc <= rep.mu_osc);
  CHECK(*rep.lambda_apx <= *rep.mu_apx);

  const auto rep1 = make_report(loc, 1);
  CHECK_FALSE(rep1.lambda_apx.has_value());
  CHECK_FALSE(rep1.mu_apx.has_value());
}

TEST_CASE("constant data: lambda'' = lambda''' for p = 2, res = 0 for f = 0 and p = 1")
{
  const auto coarse = graded(2);
  const auto fine = std::make_shared<const Mesh>(uniform_refine(*coarse, RefineMode::M3));
  {
    const auto pr = problem_singular_unknown();
    const auto uh = solve_system(apply_dirichlet(assemble(build_space(fine, 2), pr.a, pr.f), pr.g));
    const auto rep = make_report(compute_indicators(TwoLevel(coarse, uh), pr.f, pr.a), 2);
    CHECK(rep.osc < 1e-14);
    CHECK(rep.apx < 1e-14);
    CHECK(std::abs(rep.lambda_osc - *rep.lambda_apx) <= 1e-14 * rep.lambda_osc);
    CHECK(std::abs(rep.mu_osc - *rep.mu_apx) <= 1e-14 * rep.mu_osc);
  }
  {
    const auto pr = problem_singular_known();
    const auto uh = solve_system(apply_dirichlet(assemble(build_space(fine, 1), pr.a, pr.f), pr.g));
    const auto rep = make_report(compute_indicators(TwoLevel(coarse, uh), pr.f, pr.a), 1);
    CHECK(rep.lambda_res == rep.lambda_osc);
    CHECK(rep.mu_res == rep.mu_osc);
  }
}

TEST_CASE("residual estimator: affine functions and a single interior edge")
{
  const auto m = graded(2);
  const auto s = build_space(m, 2);
  const DiscreteFunction affine{s, interpolate(*s, [](const Point& x) { return 1 + 2 * x.x() - 3 * x.y(); })};
  const auto r = residual_estimator(affine, zero(), {});
  CHECK(r.facet.norm() < 1e-12);
  CHECK(r.element.norm() == 0.0);

  // two triangles sharing the diagonal of the unit square; hat at (1,0)
  const auto sq = std::make_shared<const Mesh>(
    Mesh({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}, {Triangle{{0, 1, 2}}, Triangle{{2, 3, 0}}}));
  const auto s1 = build_space(sq, 1);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c[1] = 1.0;
  const auto rr = residual_estimator(DiscreteFunction{s1, c}, zero(), {});
  // grad = (1,-1) below the diagonal, 0 above; normal (1,-1)/sqrt2: jump sqrt2
  const double len = std::sqrt(2.0);
  const int e = sq->find_edge(0, 2);
  CHECK(rr.facet[e] == doctest::Approx(std::sqrt(len * len * 2.0)).epsilon(1e-14));
  CHECK(rr.total() == doctest::Approx(2.0).epsilon(1e-14));
  for (int k = 0; k < sq->num_edges(); ++k)
    if (k != e)
      CHECK(rr.facet[k] == 0.0);
}

TEST_CASE("residual estimator is locally stable")
{
  // |rho(T, v) - rho(T, w)| <= C ||grad(v - w)||_{patch of T}
  std::mt19937 rng(8);
  const auto m = graded(3);
  const ScalarField f = [](const Point& x) { return 1 + x.x(); };
  double worst = 0.0;
  for (int p : {1, 2})
    for (int trial = 0; trial < 5; ++trial) {
      const DiscreteFunction v = random_function(m, p, rng);
      const DiscreteFunction w = random_function(m, p, rng);
      const auto rv = residual_estimator(v, f, {});
      const auto rw = residual_estimator(w, f, {});
      const Eigen::VectorXd diff = energy_norm_squared_per_element(*v.space, v.coefficients - w.coefficients, {});
      for (int t = 0; t < m->num_triangles(); ++t) {
        double a = rv.element[t] * rv.element[t], b = rw.element[t] * rw.element[t], patch = diff[t];
        for (int e : m->triangle_edges(t)) {
          a += rv.facet[e] * rv.facet[e];
          b += rw.facet[e] * rw.facet[e];
          for (int nb : m->edge_triangles(e))
            if (nb >= 0 && nb != t)
              patch += diff[nb];
        }
        worst = std::max(worst, std::abs(std::sqrt(a) - std::sqrt(b)) / std::sqrt(patch));
      }
    }
  MESSAGE("local stability constant of the residual estimator: " << worst);
  CHECK(std::isfinite(worst));
  CHECK(worst < 100.0);
}

TEST_CASE("indicators do not depend on vertex numbering")
{
  const Mesh base = initial_lshape();
  // reverse the vertex ids, keep every triangle's vertex order
  const int nv = base.num_vertices();
  std::vector<Point> pts(nv);
  for (int i = 0; i < nv; ++i)
    pts[nv - 1 - i] = base.vertex(i);
  std::vector<Triangle> tris;
  for (const auto& t : base.triangles()) {
    Triangle r = t;
    for (int& v : r.v)
      v = nv - 1 - v;
    tris.push_back(r);
  }
  const auto a = std::make_shared<const Mesh>(base);
  const auto b = std::make_shared<const Mesh>(Mesh(pts, tris));
  const auto pr = problem_smooth();
  for (int p : {1, 2}) {
    auto indicators = [&](std::shared_ptr<const Mesh> m) {
      const auto fine = std::make_shared<const Mesh>(uniform_refine(*m, RefineMode::M3));
      const auto uh = solve_system(apply_dirichlet(assemble(build_space(fine, p), pr.a, pr.f), pr.g));
      return compute_indicators(TwoLevel(m, uh), pr.f, pr.a);
    };
    const auto la = indicators(a);
    const auto lb = indicators(b);
    CHECK((la.lambda - lb.lambda).norm() <= 1e-10 * la.lambda.norm());
    CHECK((la.mu - lb.mu).norm() <= 1e-10 * la.mu.norm());
    CHECK((la.res - lb.res).norm() <= 1e-10 * la.res.norm());
    CHECK((la.osc - lb.osc).norm() <= 1e-12 * la.osc.norm());
  }
}
