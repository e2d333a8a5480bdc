// Experiment driver: convergence and epsilon studies for the polygonal VEM
// solver of the regularized Monge-Ampere equation. Writes plot-ready
// whitespace-separated .dat files.

#include <CLI11.hpp>

#include "vem/study.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Virtual element solver for the regularized Monge-Ampere equation on [0,1]^2"};

  vem::ExperimentConfig config;
  std::string study = "convergence";
  std::string solver = "newton";
  std::string stab = "constant";
  std::string phi = "frozen";
  std::string exec = "omp";
  std::string bc;
  std::string sizes_csv = "11,20,40";
  bool no_warmup = false;

  app.add_option("--problem", config.problem, "Problem id: quadratic|p1|p2|p3")
      ->default_val("quadratic");
  app.add_option("--study", study, "Study: convergence|epsilon")->default_val("convergence");
  app.add_option("--mesh", config.mesh_family, "Mesh family: quad|voronoi|file")
      ->default_val("quad");
  app.add_option("--mesh-file", config.mesh_file, "Mesh file (with --mesh file)");
  app.add_option("--order", config.order, "Polynomial order (2, 3, or 4)")->default_val(2);
  app.add_option("--sizes", sizes_csv, "Comma-separated mesh sizes (cells per axis or cell counts)");
  app.add_option("--epsilon", config.epsilon, "Regularization parameter")->default_val(0.01);
  app.add_option("--solver", solver, "Nonlinear solver: fixedpoint|newton")->default_val("newton");
  app.add_option("--damping", config.solver.damping, "Fixed-point damping in (0,1]")->default_val(0.5);
  app.add_option("--tol", config.solver.tolerance, "Residual sup-norm tolerance")->default_val(1e-9);
  app.add_option("--max-iter", config.solver.max_iterations, "Max iterations per stage")
      ->default_val(60);
  app.add_option("--stab", stab, "Stabilization: constant|paper")->default_val("constant");
  app.add_option("--phi", phi, "Fixed-point coefficient field: frozen|identity")
      ->default_val("frozen");
  app.add_option("--seed", config.seed, "RNG seed for Voronoi meshes")->default_val(42);
  app.add_option("--lloyd", config.lloyd_iterations, "Lloyd relaxation iterations")
      ->default_val(100);
  app.add_option("--output", config.output, "Output .dat path");
  app.add_option("--bc", bc,
                 "Extra boundary condition: exact (psi = laplacian u) or eps (psi = epsilon; "
                 "epsilon-study default)");
  app.add_option("--exec", exec, "Element loops: omp|serial")->default_val("omp");
  app.add_flag("--no-warmup", no_warmup, "Skip the eps=1 warmup stage");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& tok : CLI::detail::split(sizes_csv, ','))
      config.sizes.push_back(std::stoi(tok));

    config.solver.method =
        solver == "fixedpoint" ? vem::SolveMethod::FixedPoint : vem::SolveMethod::Newton;
    if (solver != "fixedpoint" && solver != "newton")
      throw std::runtime_error("unknown solver '" + solver + "'");
    config.solver.stab.mode = stab == "paper" ? vem::StabMode::Paper : vem::StabMode::Constant;
    if (stab != "paper" && stab != "constant")
      throw std::runtime_error("unknown stabilization '" + stab + "'");
    config.solver.phi = phi == "identity" ? vem::PhiStrategy::Identity : vem::PhiStrategy::Frozen;
    if (phi != "identity" && phi != "frozen") throw std::runtime_error("unknown phi '" + phi + "'");
    config.solver.exec = exec == "serial" ? vem::Exec::Serial : vem::Exec::OpenMP;
    config.solver.warmup = !no_warmup;
    config.bc = bc.empty() ? (study == "epsilon" ? "eps" : "exact") : bc;

    vem::StudyResult result;
    if (study == "convergence") {
      result = vem::run_convergence_study(config);
    } else if (study == "epsilon") {
      result = vem::run_epsilon_study(config);
    } else {
      throw std::runtime_error("unknown study '" + study + "'");
    }

    if (!result.all_converged) {
      std::fprintf(stderr, "solver did not converge (%s)\n", result.failure.c_str());
      return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
