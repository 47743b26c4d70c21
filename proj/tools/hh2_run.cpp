// Command line driver: runs the adaptive loop on one of the L-shape problems
// and writes one CSV row per level.

#include "hh2/adaptive.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Adaptive FEM with (h - h/2) error estimators on the L-shaped domain"};

  std::string problem_name = "singular-known";
  int degree = 1;
  std::string mode_name = "m3";
  double theta = 0.5;
  std::string variant_name;
  int max_elements = 200000;
  int max_levels = 1000;
  std::string out_path;
  std::string mesh_path;
  int seed = 0;
  bool quiet = false;

  app.add_option("--problem", problem_name, "smooth | singular-known | singular-unknown")
    ->check(CLI::IsMember({"smooth", "singular-known", "singular-unknown"}));
  app.add_option("--p", degree, "polynomial degree")->check(CLI::IsMember({1, 2}));
  app.add_option("--mode", mode_name, "refinement of marked elements: m3 (bisec3) or m3p (bisec5)")
    ->check(CLI::IsMember({"m3", "m3p"}));
  app.add_option("--theta", theta, "Doerfler parameter in (0, 1]; 1 means uniform refinement");
  app.add_option("--variant", variant_name,
                 "lambda-res | lambda-osc | lambda-apx | mu-res | mu-osc | mu-apx (default depends on p and mode)");
  app.add_option("--max-elements", max_elements, "stop once the mesh has more elements than this");
  app.add_option("--max-levels", max_levels, "stop after this many levels");
  app.add_option("--out", out_path, "CSV output path (stdout if omitted)");
  app.add_option("--dump-mesh", mesh_path, "write the final mesh to this path");
  app.add_option("--seed", seed, "unused; runs are deterministic");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  hh2::LoopConfig config;
  hh2::ProblemSpec problem;
  try {
    problem = hh2::problem_by_name(problem_name);
    config.theta = theta;
    config.degree = degree;
    config.mode = mode_name == "m3p" ? hh2::RefineMode::M3P : hh2::RefineMode::M3;
    config.variant = variant_name.empty() ? hh2::default_variant(degree, config.mode)
                                          : hh2::parse_variant(variant_name);
    config.max_elements = max_elements;
    config.max_levels = max_levels;
    hh2::validate(config);
  } catch (const hh2::Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  }

  std::shared_ptr<const hh2::Mesh> last;
  const auto start = std::chrono::steady_clock::now();
  auto observer = [&](const hh2::LevelState& s, const hh2::LevelRecord& r) {
    last = s.coarse;
    if (quiet)
      return;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "level %3d  N %8d  eta %.4e  err %.4e  cg %5d  %.1fs\n", r.level, r.nrelements,
                 r.estimators.total(config.variant), r.error.value_or(0.0), r.solver_iterations, secs);
  };

  std::vector<hh2::LevelRecord> records;
  try {
    records = hh2::run(config, problem, observer);
  } catch (const hh2::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const hh2::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  }

  try {
    if (out_path.empty())
      hh2::write_csv(std::cout, records, degree);
    else
      hh2::write_csv(out_path, records, degree);
    if (!mesh_path.empty() && last)
      hh2::write_mesh(mesh_path, *last);
  } catch (const hh2::Error& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return exit_config;
  }
  return 0;
}
