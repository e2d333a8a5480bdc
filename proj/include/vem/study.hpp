#ifndef VEM_STUDY_HPP
#define VEM_STUDY_HPP

#include <optional>

#include "vem/solver.hpp"

namespace vem {

struct ErrorRecord {
  double h = 0.0;
  double H2 = 0.0; // || hess u - P2 u_h ||_0
  double H1 = 0.0; // || grad u - P1 u_h ||_0
  double L2 = 0.0; // || u - P0 u_h ||_0
  std::optional<std::array<double, 3>> eoc; // (H2, H1, L2) vs the previous record
};

/// Element-wise quadrature (exactness 2l+2) of the three projected error
/// norms against the exact solution.
ErrorRecord compute_errors(const AssemblyContext& ctx, const Eigen::VectorXd& u_full,
                           const ManufacturedSolution& exact, Exec exec = Exec::OpenMP);

/// eoc = log(e_prev/e_curr) / log(h_prev/h_curr) per norm, from the second
/// record on; undefined (nullopt entries stay NaN) when an error vanishes.
void compute_eoc(std::vector<ErrorRecord>& records);

struct ExperimentConfig {
  std::string problem = "quadratic";    // quadratic | p1 | p2 | p3 (long ids accepted)
  std::string mesh_family = "quad";     // quad | voronoi | file
  std::string mesh_file;
  int order = 2;
  std::vector<int> sizes;               // cells per axis (quad) or cell counts (voronoi)
  double epsilon = 0.01;
  SolverConfig solver;
  std::string output;                   // .dat path; empty keeps the table in memory
  std::uint64_t seed = 42;
  int lloyd_iterations = 100;
  std::string bc = "exact";             // exact: psi = laplacian(u); eps: psi = epsilon
  bool log = true;
};

struct StudyResult {
  std::vector<ErrorRecord> records;
  std::vector<double> epsilons; // epsilon study only
  bool all_converged = true;
  std::string failure; // names the failing stage/mesh
};

/// One solve per mesh size at fixed epsilon; writes "h H2 H1 L2" rows
/// (12 significant digits) incrementally, so a solver failure leaves a
/// partial file behind.
StudyResult run_convergence_study(const ExperimentConfig& config);

/// Continuation over the epsilon schedule on a fixed mesh; writes
/// "Epsilon H2 H1 L2" rows. Errors are measured against the problem's exact
/// (limit) solution.
StudyResult run_epsilon_study(const ExperimentConfig& config);

/// The schedule used in the epsilon experiments: 1 down to 0.0005.
std::vector<double> default_epsilon_schedule();

Mesh build_study_mesh(const ExperimentConfig& config, int size);
ProblemData make_problem(const ExperimentConfig& config, double eps);

} // namespace vem

#endif
