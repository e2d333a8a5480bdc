#include "vem/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <chrono>
#include <stdexcept>

namespace vem {

namespace {

Eigen::VectorXd lu_solve_refined(const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
                                 const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b)
{
  Eigen::VectorXd x = lu.solve(b);
  x += lu.solve(b - A * x);
  return x;
}

struct StageContext {
  const AssemblyContext& ctx;
  const ProblemData& problem;
  const SolverConfig& cfg;
  Eigen::VectorXd rhs; // data vector, u-independent within a stage

  StageContext(const AssemblyContext& c, const ProblemData& p, const SolverConfig& s)
      : ctx(c), problem(p), cfg(s), rhs(assemble_rhs(c, p, s.exec))
  {
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& u_full) const
  {
    return assemble_residual(ctx, u_full, problem, cfg.stab, &rhs, cfg.exec);
  }
};

} // namespace

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             bool symmetric)
{
  Eigen::VectorXd x;
  if (symmetric) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("solve_linear: LDLt factorization failed");
    x = ldlt.solve(b);
    x += ldlt.solve(b - A * x);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("solve_linear: LU factorization failed (matrix singular?)");
    x = lu_solve_refined(lu, A, b);
  }
  const double bnorm = std::max(b.norm(), 1e-300);
  const double rel = (b - A * x).norm() / bnorm;
  if (!(rel <= 1e-11))
    throw std::runtime_error("solve_linear: relative residual " + std::to_string(rel) +
                             " exceeds 1e-11 (ill-conditioned system)");
  return x;
}

Eigen::VectorXd solve_linear(const GlobalSystem& sys) { return solve_linear(sys.A, sys.rhs, sys.symmetric); }

Eigen::VectorXd fixed_point_step(const AssemblyContext& ctx, const Eigen::VectorXd& v_full,
                                 const ProblemData& problem, const SolverConfig& config,
                                 const Eigen::VectorXd* rhs_cached)
{
  const DofLayout& layout = *ctx.layout;
  const Eigen::VectorXd F =
      assemble_residual(ctx, v_full, problem, config.stab, rhs_cached, config.exec);
  const PhiField phi = config.phi == PhiStrategy::Identity
                           ? identity_phi()
                           : frozen_cofactor_phi(ctx, v_full);
  const GlobalSystem sys =
      assemble_linearized(ctx, phi, problem.epsilon, config.stab, nullptr, config.exec);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("fixed_point_step: linearized system factorization failed");
  const Eigen::VectorXd d = lu_solve_refined(lu, sys.A, F);

  Eigen::VectorXd next = v_full;
  const auto& free_list = layout.free_dofs();
  for (long i = 0; i < layout.n_free(); ++i) next[free_list[i]] += d[i];
  return next;
}

StageReport fixed_point_solve(const AssemblyContext& ctx, Eigen::VectorXd& u_full,
                              const ProblemData& problem, const SolverConfig& config,
                              double tolerance, int max_iterations)
{
  const DofLayout& layout = *ctx.layout;
  StageContext stage(ctx, problem, config);
  StageReport rep;
  rep.epsilon = problem.epsilon;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd F = stage.residual(u_full);
    const double r = F.lpNorm<Eigen::Infinity>();
    rep.residual_history.push_back(r);
    rep.final_residual = r;
    if (r <= tolerance) {
      rep.converged = true;
      return rep;
    }
    if (it >= max_iterations) return rep;
    const PhiField phi = config.phi == PhiStrategy::Identity
                             ? identity_phi()
                             : frozen_cofactor_phi(ctx, u_full);
    const GlobalSystem sys =
        assemble_linearized(ctx, phi, problem.epsilon, config.stab, nullptr, config.exec);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.A);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("fixed_point_solve: factorization failed");
    const Eigen::VectorXd d = lu_solve_refined(lu, sys.A, F);
    const auto& free_list = layout.free_dofs();
    for (long i = 0; i < layout.n_free(); ++i)
      u_full[free_list[i]] += config.damping * d[i];
    ++rep.iterations;
  }
}

StageReport newton_solve_stage(const AssemblyContext& ctx, Eigen::VectorXd& u_full,
                               const ProblemData& problem, const SolverConfig& config,
                               double tolerance, int max_iterations)
{
  const DofLayout& layout = *ctx.layout;
  StageContext stage(ctx, problem, config);
  StageReport rep;
  rep.epsilon = problem.epsilon;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd F = stage.residual(u_full);
    const double r = F.lpNorm<Eigen::Infinity>();
    rep.residual_history.push_back(r);
    rep.final_residual = r;
    if (r <= tolerance) {
      rep.converged = true;
      return rep;
    }
    if (it >= max_iterations) return rep;

    const Eigen::SparseMatrix<double> J =
        assemble_jacobian(ctx, u_full, problem, config.stab, config.exec);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("newton_solve: singular Jacobian");
    const Eigen::VectorXd d = lu_solve_refined(lu, J, -F);

    const auto& free_list = layout.free_dofs();
    double step = 1.0;
    Eigen::VectorXd trial;
    for (;;) {
      trial = u_full;
      for (long i = 0; i < layout.n_free(); ++i) trial[free_list[i]] += step * d[i];
      const double r_trial = stage.residual(trial).lpNorm<Eigen::Infinity>();
      if (r_trial < r || step <= 1e-4) break;
      step *= 0.5;
    }
    u_full = trial;
    ++rep.iterations;
  }
}

namespace {

StageReport solve_stage(const AssemblyContext& ctx, Eigen::VectorXd& u_full,
                        const ProblemData& problem, const SolverConfig& config, double tolerance,
                        int max_iterations)
{
  if (config.method == SolveMethod::FixedPoint)
    return fixed_point_solve(ctx, u_full, problem, config, tolerance, max_iterations);
  return newton_solve_stage(ctx, u_full, problem, config, tolerance, max_iterations);
}

} // namespace

std::pair<Eigen::VectorXd, SolveReport> newton_solve(const AssemblyContext& ctx,
                                                     const Eigen::VectorXd& v0_full,
                                                     const ProblemData& problem,
                                                     const SolverConfig& config)
{
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::VectorXd u = v0_full;
  SolveReport report;
  report.stages.push_back(
      newton_solve_stage(ctx, u, problem, config, config.tolerance, config.max_iterations));
  report.converged = report.stages.back().converged;
  report.final_residual = report.stages.back().final_residual;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {u, report};
}

std::pair<Eigen::VectorXd, SolveReport> continuation_solve(const AssemblyContext& ctx,
                                                           const ProblemFactory& factory,
                                                           const SolverConfig& config,
                                                           const StageCallback& on_stage)
{
  if (config.epsilon_schedule.empty())
    throw std::runtime_error("continuation_solve: empty epsilon schedule");
  for (std::size_t i = 1; i < config.epsilon_schedule.size(); ++i)
    if (!(config.epsilon_schedule[i] < config.epsilon_schedule[i - 1]))
      throw std::runtime_error("continuation_solve: schedule must be strictly decreasing");

  const auto t0 = std::chrono::steady_clock::now();
  const DofLayout& layout = *ctx.layout;
  SolveReport report;

  const ProblemData first = factory(config.epsilon_schedule.front());
  Eigen::VectorXd u = dirichlet_values(layout, first.g);

  if (config.warmup) {
    const ProblemData warm = factory(1.0);
    StageReport rep = solve_stage(ctx, u, warm, config, 0.1, 10);
    rep.epsilon = 1.0;
    report.stages.push_back(rep); // warmup stage only generates the initial value
  }

  report.converged = true;
  for (std::size_t s = 0; s < config.epsilon_schedule.size(); ++s) {
    const double eps = config.epsilon_schedule[s];
    const ProblemData p = factory(eps);
    StageReport rep = solve_stage(ctx, u, p, config, config.tolerance, config.max_iterations);
    report.stages.push_back(rep);
    if (on_stage) on_stage(static_cast<int>(s), eps, u, rep);
    if (!rep.converged) {
      report.converged = false;
      break;
    }
  }
  if (!report.stages.empty()) report.final_residual = report.stages.back().final_residual;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {u, report};
}

} // namespace vem
