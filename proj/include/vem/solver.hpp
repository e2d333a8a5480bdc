#ifndef VEM_SOLVER_HPP
#define VEM_SOLVER_HPP

#include "vem/forms.hpp"

namespace vem {

enum class SolveMethod { FixedPoint, Newton };
enum class PhiStrategy {
  Frozen,  // cof(P2 v) at the current iterate (Picard / quasi-Newton)
  Identity
};

struct SolverConfig {
  SolveMethod method = SolveMethod::Newton;
  double damping = 0.5; // fixed-point only
  double tolerance = 1e-9;
  int max_iterations = 60;
  std::vector<double> epsilon_schedule; // strictly decreasing
  bool warmup = true;                   // eps = 1, tol 0.1, <= 10 iterations
  PhiStrategy phi = PhiStrategy::Frozen;
  StabilizationSpec stab;
  Exec exec = Exec::OpenMP;
};

struct StageReport {
  double epsilon = 0.0;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history; // residual before each iteration
};

struct SolveReport {
  std::vector<StageReport> stages;
  bool converged = false;
  double final_residual = 0.0;
  double wall_seconds = 0.0;
  int total_iterations() const
  {
    int n = 0;
    for (const auto& s : stages) n += s.iterations;
    return n;
  }
};

/// Sparse direct solve (LU; LDLt when flagged symmetric) with one step of
/// iterative refinement. Throws if the relative algebraic residual stays
/// above 1e-11 or the factorization fails.
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             bool symmetric = false);
Eigen::VectorXd solve_linear(const GlobalSystem& sys);

/// One application of the fixed-point map: solves A_L,h(d, w) = F(v)(w) on
/// the free dofs and returns v + d (undamped).
Eigen::VectorXd fixed_point_step(const AssemblyContext& ctx, const Eigen::VectorXd& v_full,
                                 const ProblemData& problem, const SolverConfig& config,
                                 const Eigen::VectorXd* rhs_cached = nullptr);

/// Damped fixed-point iteration from the given iterate (with lift applied).
StageReport fixed_point_solve(const AssemblyContext& ctx, Eigen::VectorXd& u_full,
                              const ProblemData& problem, const SolverConfig& config,
                              double tolerance, int max_iterations);

/// Newton with backtracking line search (halve while the residual does not
/// decrease, floor 1e-4).
StageReport newton_solve_stage(const AssemblyContext& ctx, Eigen::VectorXd& u_full,
                               const ProblemData& problem, const SolverConfig& config,
                               double tolerance, int max_iterations);

/// Single-stage solve from an initial full iterate.
std::pair<Eigen::VectorXd, SolveReport> newton_solve(const AssemblyContext& ctx,
                                                     const Eigen::VectorXd& v0_full,
                                                     const ProblemData& problem,
                                                     const SolverConfig& config);

using ProblemFactory = std::function<ProblemData(double eps)>;
using StageCallback =
    std::function<void(int stage, double eps, const Eigen::VectorXd& u_full, const StageReport&)>;

/// Warmup at eps = 1 (when enabled), then one solve per schedule entry, each
/// warm-started from the previous stage. Stops at the first non-convergent
/// stage; the report names it.
std::pair<Eigen::VectorXd, SolveReport> continuation_solve(const AssemblyContext& ctx,
                                                           const ProblemFactory& factory,
                                                           const SolverConfig& config,
                                                           const StageCallback& on_stage = {});

} // namespace vem

#endif
