#include "hh2/problems.hpp"
#include "hh2/solve.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hh2;

namespace {

std::shared_ptr<const Mesh> graded(int rounds = 3)
{
  Mesh m = initial_lshape();
  for (int k = 0; k < rounds; ++k) {
    std::vector<int> marked;
    for (int t = 0; t < m.num_triangles(); t += 4)
      marked.push_back(t);
    m = refine(m, marked, k % 2 ? RefineMode::M3P : RefineMode::M3);
  }
  return std::make_shared<const Mesh>(std::move(m));
}

ScalarField zero() { return [](const Point&) { return 0.0; }; }

} // namespace

TEST_CASE("local P1 stiffness of the unit right triangle")
{
  const auto m = std::make_shared<const Mesh>(Mesh({Point(0, 0), Point(1, 0), Point(0, 1)}, {Triangle{{0, 1, 2}}}));
  const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_stiffness(*build_space(m, 1), {}));
  Eigen::Matrix3d expected;
  expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  expected *= 0.5;
  CHECK((k - expected).norm() < 1e-15);
}

TEST_CASE("assembled matrices: symmetry, constants in the kernel, zero load")
{
  const auto m = graded();
  const CoefficientField a(std::vector<Matrix2>(12, (Matrix2() << 2.0, 0.3, 0.3, 1.0).finished()));
  for (int p : {1, 2}) {
    const auto s = build_space(m, p);
    for (const CoefficientField& coef : {CoefficientField{}, a}) {
      const SparseSystem sys = assemble(s, coef, zero());
      const Eigen::MatrixXd K(sys.matrix);
      CHECK((K - K.transpose()).norm() <= 1e-12 * K.norm());
      CHECK((K * Eigen::VectorXd::Ones(K.rows())).norm() <= 1e-12 * K.norm());
      CHECK(sys.rhs.norm() == 0.0);
    }
  }
}

TEST_CASE("coefficient validation")
{
  CHECK_THROWS_AS(CoefficientField(std::vector<Matrix2>{(Matrix2() << 1, 0.5, 0.2, 1).finished()}), InputError);
  CHECK_THROWS_AS(CoefficientField(std::vector<Matrix2>{(Matrix2() << 1, 2, 2, 1).finished()}), InputError);
  const CoefficientField a(std::vector<Matrix2>(12, (Matrix2() << 4, 1, 1, 3).finished()));
  const Mesh m = initial_lshape();
  const Matrix2 r = a.sqrt_matrix(m, 3);
  CHECK((r * r - a.matrix(m, 3)).norm() < 1e-14);
}

TEST_CASE("Galerkin reproduces members of the space")
{
  const auto m = graded();
  const ScalarField affine = [](const Point& x) { return 0.3 + 2.0 * x.x() - x.y(); };
  const ScalarField quad = [](const Point& x) { return x.x() * x.x() + 2.0 * x.y() * x.y() - x.x() * x.y() + x.x(); };
  // -lap(quad) = -(2 + 4) = -6
  const ScalarField source = [](const Point&) { return -6.0; };

  for (SolverMethod method : {SolverMethod::SparseLdlt, SolverMethod::Cg}) {
    SolverOptions opt;
    opt.method = method;
    opt.dense_limit = 0;

    const auto s1 = build_space(m, 1);
    const auto u1 = solve_system(apply_dirichlet(assemble(s1, {}, zero()), affine), opt);
    for (int i = 0; i < s1->num_dofs(); ++i)
      CHECK(u1.coefficients[i] == doctest::Approx(affine(s1->dof_point(i))).epsilon(1e-9));

    const auto s2 = build_space(m, 2);
    const auto u2 = solve_system(apply_dirichlet(assemble(s2, {}, source), quad), opt);
    for (int i = 0; i < s2->num_dofs(); ++i)
      CHECK(u2.coefficients[i] == doctest::Approx(quad(s2->dof_point(i))).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("Dirichlet elimination")
{
  const auto m = graded(2);
  const auto s = build_space(m, 2);
  const ScalarField g = [](const Point& x) { return std::sin(x.x()) + x.y(); };
  const SparseSystem sys = apply_dirichlet(assemble(s, {}, [](const Point&) { return 1.0; }), g);
  const auto u = solve_system(sys);
  int constrained = 0;
  for (int i = 0; i < s->num_dofs(); ++i)
    if (s->is_boundary_dof(i)) {
      ++constrained;
      CHECK(u.coefficients[i] == g(s->dof_point(i)));
    }
  CHECK(static_cast<int>(sys.constrained.size()) == constrained);
  CHECK(static_cast<int>(sys.free_dofs.size()) == s->num_dofs() - constrained);
  const Eigen::MatrixXd R(sys.reduced_matrix);
  CHECK((R - R.transpose()).norm() <= 1e-12 * R.norm());

  // homogeneous data: reduced system is the free block of the full one
  const SparseSystem h = apply_dirichlet(assemble(s, {}, [](const Point&) { return 1.0; }), zero());
  const Eigen::MatrixXd K(h.matrix);
  for (std::size_t i = 0; i < h.free_dofs.size(); i += 7) {
    CHECK(h.reduced_rhs[static_cast<Eigen::Index>(i)] == h.rhs[h.free_dofs[i]]);
    for (std::size_t j = 0; j < h.free_dofs.size(); j += 5)
      CHECK(h.reduced_matrix.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
            K(h.free_dofs[i], h.free_dofs[j]));
  }
}

TEST_CASE("sparse, iterative and dense solves agree")
{
  const auto m = graded(4);
  const ProblemSpec pr = problem_smooth();
  for (int p : {1, 2}) {
    const SparseSystem sys = apply_dirichlet(assemble(build_space(m, p), pr.a, pr.f), pr.g);
    SolverStats direct, cg;
    const auto a = solve_system(sys, {}, nullptr, &direct);
    SolverOptions opt;
    opt.method = SolverMethod::Cg;
    const auto b = solve_system(sys, opt, nullptr, &cg);
    const auto c = solve_dense(sys);
    CHECK(direct.direct);
    CHECK(direct.relative_residual <= 1e-10);
    CHECK_FALSE(cg.direct);
    CHECK(cg.iterations > 0);
    CHECK(cg.relative_residual <= 1e-10);
    CHECK((a.coefficients - c.coefficients).norm() <= 1e-10 * c.coefficients.norm());
    CHECK((b.coefficients - c.coefficients).norm() <= 1e-7 * c.coefficients.norm());

    // warm start from the solution converges at once
    SolverStats warm;
    solve_system(sys, opt, &c.coefficients, &warm);
    CHECK(warm.iterations <= 1);
  }
}

TEST_CASE("non-convergence is reported with the iteration count")
{
  const auto m = graded(4);
  const auto pr = problem_singular_unknown();
  const SparseSystem sys = apply_dirichlet(assemble(build_space(m, 2), pr.a, pr.f), pr.g);
  SolverOptions opt;
  opt.method = SolverMethod::Cg;
  opt.max_iterations = 3;
  opt.dense_limit = 0;
  try {
    solve_system(sys, opt);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.iterations() == 3);
  }
  // small systems fall back to the dense factorisation
  opt.dense_limit = 100000;
  SolverStats st;
  const auto u = solve_system(sys, opt, nullptr, &st);
  CHECK(st.dense);
  CHECK((u.coefficients - solve_dense(sys).coefficients).norm() < 1e-12);
}

TEST_CASE("repeated solves are bit-identical")
{
  const auto m = graded(4);
  const auto pr = problem_singular_known();
  for (SolverMethod method : {SolverMethod::SparseLdlt, SolverMethod::Cg}) {
    SolverOptions opt;
    opt.method = method;
    const auto a = solve_system(apply_dirichlet(assemble(build_space(m, 2), pr.a, pr.f), pr.g), opt);
    const auto b = solve_system(apply_dirichlet(assemble(build_space(m, 2), pr.a, pr.f), pr.g), opt);
    CHECK(a.coefficients == b.coefficients);
  }
}

TEST_CASE("energy norm")
{
  const auto m = graded();
  const CoefficientField a(std::vector<Matrix2>(12, (Matrix2() << 2.0, -0.4, -0.4, 1.5).finished()));
  std::mt19937 rng(8);
  std::normal_distribution<double> n01;
  for (int p : {1, 2}) {
    const auto s = build_space(m, p);
    CHECK(energy_norm(*s, Eigen::VectorXd::Zero(s->num_dofs()), a) == 0.0);
    CHECK(energy_norm(*s, Eigen::VectorXd::Constant(s->num_dofs(), 3.0), a) < 1e-12);
    Eigen::VectorXd v(s->num_dofs());
    for (auto& x : v)
      x = n01(rng);
    const SparseMatrix K = assemble_stiffness(*s, a);
    const double quad = energy_norm(*s, v, a);
    CHECK(quad == doctest::Approx(std::sqrt(v.dot(K * v))).epsilon(1e-12));
    CHECK(energy_norm_squared_per_element(*s, v, a).sum() == doctest::Approx(quad * quad).epsilon(1e-12));
  }

  // hat at the square centre (-0.5, -0.5), summed by hand over its patch
  const auto m0 = std::make_shared<const Mesh>(initial_lshape());
  const auto s = build_space(m0, 1);
  Eigen::VectorXd hat = Eigen::VectorXd::Zero(s->num_dofs());
  hat[8] = 1.0;
  // each patch triangle has area 1/4 and height 1/2 over the unit side: |grad| = 2
  CHECK(energy_norm(*s, hat, {}) == doctest::Approx(std::sqrt(4 * 0.25 * 4.0)).epsilon(1e-14));
}

TEST_CASE("Galerkin orthogonality and Pythagoras on nested meshes")
{
  const auto coarse = graded(3);
  const auto fine = std::make_shared<const Mesh>(uniform_refine(*coarse, RefineMode::M3));
  const auto pr = problem_singular_unknown();
  for (int p : {1, 2}) {
    const auto cs = build_space(coarse, p);
    const auto fs = build_space(fine, p);
    const auto u = solve_system(apply_dirichlet(assemble(cs, pr.a, pr.f), pr.g));
    const auto uh = solve_system(apply_dirichlet(assemble(fs, pr.a, pr.f), pr.g));
    const Eigen::VectorXd diff = uh.coefficients - prolongate(u, *fs);
    const SparseMatrix K = assemble_stiffness(*fs, pr.a);
    const double norm_uh = std::sqrt(uh.coefficients.dot(K * uh.coefficients));
    double worst = 0.0;
    for (int i = 0; i < cs->num_dofs(); ++i) {
      if (cs->is_boundary_dof(i))
        continue;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(cs->num_dofs());
      e[i] = 1.0;
      const Eigen::VectorXd v = prolongate(DiscreteFunction{cs, e}, *fs);
      const double nv = std::sqrt(v.dot(K * v));
      worst = std::max(worst, std::abs(diff.dot(K * v)) / (norm_uh * nv));
    }
    CHECK(worst <= 1e-8);
    const double a2 = std::pow(energy_norm(*fs, uh.coefficients, pr.a), 2);
    const double b2 = std::pow(energy_norm(*cs, u.coefficients, pr.a), 2);
    const double c2 = std::pow(energy_norm(*fs, diff, pr.a), 2);
    CHECK(std::abs(a2 - b2 - c2) <= 1e-8 * a2);
  }
}

TEST_CASE("f = 1 on the initial mesh against a dense solve")
{
  const auto m = std::make_shared<const Mesh>(initial_lshape());
  const auto pr = problem_singular_unknown();
  for (int p : {1, 2}) {
    const auto sys = apply_dirichlet(assemble(build_space(m, p), pr.a, pr.f), pr.g);
    const auto u = solve_system(sys);
    const auto d = solve_dense(sys);
    const double e = energy_norm(*u.space, u.coefficients, pr.a);
    CHECK(std::isfinite(e));
    CHECK(e > 0.0);
    CHECK(e == doctest::Approx(energy_norm(*d.space, d.coefficients, pr.a)).epsilon(1e-12));
    // energy = load . u for the homogeneous problem
    CHECK(e * e == doctest::Approx(sys.rhs.dot(u.coefficients)).epsilon(1e-12));
  }
}
