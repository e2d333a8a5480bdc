#include "vem/study.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace vem {

ErrorRecord compute_errors(const AssemblyContext& ctx, const Eigen::VectorXd& u_full,
                           const ManufacturedSolution& exact, Exec exec)
{
  const Mesh& mesh = *ctx.mesh;
  const int l = ctx.layout->order();
  std::vector<std::array<double, 3>> partial(mesh.n_elements());

  parallel_for(mesh.n_elements(), exec, [&](std::ptrdiff_t k) {
    const ElementOperators& ops = ctx.ops[k];
    const int n0 = poly_dim(l);
    const int n1 = poly_dim(l - 1);
    const int n2 = poly_dim(l - 2);
    const Eigen::VectorXd u_loc = gather_local(*ctx.layout, static_cast<int>(k), u_full);
    const Eigen::VectorXd c0 = ops.P0 * u_loc;
    const std::array<Eigen::VectorXd, 2> c1 = {ops.P1[0] * u_loc, ops.P1[1] * u_loc};
    const std::array<Eigen::VectorXd, 4> c2 = {ops.P2[0] * u_loc, ops.P2[1] * u_loc,
                                               ops.P2[2] * u_loc, ops.P2[3] * u_loc};
    const QuadratureRule rule = polygon_quadrature(mesh, static_cast<int>(k), 2 * l + 2);
    double e2 = 0, e1 = 0, e0 = 0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2& x = rule.points[q];
      const double w = rule.weights[q];
      const Eigen::RowVectorXd m = ops.basis.values(x);
      const double dv = exact.u(x) - m.head(n0).dot(c0);
      const Vec2 dg = exact.grad(x) - Vec2(m.head(n1).dot(c1[0]), m.head(n1).dot(c1[1]));
      const Mat2 dh = exact.hess(x) - ops.hessian_at(m.head(n2), c2);
      e0 += w * dv * dv;
      e1 += w * dg.squaredNorm();
      e2 += w * dh.squaredNorm();
    }
    partial[k] = {e2, e1, e0};
  });

  ErrorRecord rec;
  rec.h = mesh.h_max;
  double s2 = 0, s1 = 0, s0 = 0;
  for (const auto& p : partial) {
    s2 += p[0];
    s1 += p[1];
    s0 += p[2];
  }
  rec.H2 = std::sqrt(s2);
  rec.H1 = std::sqrt(s1);
  rec.L2 = std::sqrt(s0);
  return rec;
}

void compute_eoc(std::vector<ErrorRecord>& records)
{
  for (std::size_t i = 1; i < records.size(); ++i) {
    const ErrorRecord& a = records[i - 1];
    ErrorRecord& b = records[i];
    const double lh = std::log(a.h / b.h);
    auto rate = [lh](double ea, double eb) {
      if (!(ea > 0.0) || !(eb > 0.0) || lh == 0.0) return std::nan("");
      return std::log(ea / eb) / lh;
    };
    b.eoc = {{rate(a.H2, b.H2), rate(a.H1, b.H1), rate(a.L2, b.L2)}};
  }
}

std::vector<double> default_epsilon_schedule()
{
  return {1.0, 0.5, 0.25, 0.125, 0.05, 0.025, 0.0125, 0.005, 0.0025, 0.00125, 0.0005};
}

Mesh build_study_mesh(const ExperimentConfig& config, int size)
{
  if (config.mesh_family == "quad") {
    if (size > 80) throw std::runtime_error("quad meshes are capped at 80x80");
    return build_uniform_quad_mesh(size);
  }
  if (config.mesh_family == "voronoi") {
    if (size > 6400) throw std::runtime_error("voronoi meshes are capped at 6400 cells");
    return build_voronoi_mesh(size, config.seed, config.lloyd_iterations);
  }
  if (config.mesh_family == "file") return load_mesh(config.mesh_file);
  throw std::runtime_error("unknown mesh family '" + config.mesh_family + "'");
}

ProblemData make_problem(const ExperimentConfig& config, double eps)
{
  if (config.bc == "eps") {
    if (config.problem != "quadratic")
      throw std::runtime_error("the original boundary condition (psi = eps) is only set up "
                               "for the quadratic limit problem");
    return quadratic_limit_problem(eps);
  }
  if (config.bc != "exact") throw std::runtime_error("unknown bc mode '" + config.bc + "'");
  return manufactured(config.problem, eps);
}

namespace {

void validate(const ExperimentConfig& config)
{
  if (config.order < 2 || config.order > 4)
    throw std::runtime_error("order must be 2, 3, or 4");
  if (config.sizes.empty()) throw std::runtime_error("mesh size list must be non-empty");
}

std::string format_row(const std::array<double, 4>& vals)
{
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g %.12g\n", vals[0], vals[1], vals[2], vals[3]);
  return buf;
}

class DatWriter {
public:
  DatWriter(const std::string& path, const std::string& header)
  {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open output file " + path);
    out_ << header << '\n';
    out_.flush();
  }
  void row(const std::array<double, 4>& vals)
  {
    if (!out_.is_open()) return;
    out_ << format_row(vals);
    out_.flush();
  }

private:
  std::ofstream out_;
};

void log_stage(const ExperimentConfig& config, const char* tag, int size, double h, long dofs,
               double eps, const StageReport& rep, const ErrorRecord& rec)
{
  if (!config.log) return;
  std::printf("[%s] mesh=%s n=%d h=%.6g dofs=%ld eps=%.6g iters=%d residual=%.3e "
              "H2=%.6e H1=%.6e L2=%.6e%s\n",
              tag, config.mesh_family.c_str(), size, h, dofs, eps, rep.iterations,
              rep.final_residual, rec.H2, rec.H1, rec.L2, rep.converged ? "" : " (NOT CONVERGED)");
  std::fflush(stdout);
}

} // namespace

StudyResult run_convergence_study(const ExperimentConfig& config)
{
  validate(config);
  StudyResult result;
  DatWriter writer(config.output, "h H2 H1 L2");

  for (int size : config.sizes) {
    const Mesh mesh = build_study_mesh(config, size);
    const DofLayout layout(mesh, config.order);
    const AssemblyContext ctx = AssemblyContext::build(mesh, layout, {}, config.solver.exec);

    SolverConfig scfg = config.solver;
    scfg.epsilon_schedule = {config.epsilon};
    auto factory = [&](double eps) { return make_problem(config, eps); };
    const auto [u, report] = continuation_solve(ctx, factory, scfg);

    const ProblemData target = factory(config.epsilon);
    ErrorRecord rec = compute_errors(ctx, u, target.exact, config.solver.exec);
    const StageReport& last = report.stages.back();
    log_stage(config, "convergence", size, mesh.h_max, layout.n_free(), config.epsilon, last, rec);

    result.records.push_back(rec);
    writer.row({rec.h, rec.H2, rec.H1, rec.L2});
    if (!report.converged) {
      result.all_converged = false;
      result.failure = "mesh size " + std::to_string(size);
      break;
    }
  }
  compute_eoc(result.records);
  return result;
}

StudyResult run_epsilon_study(const ExperimentConfig& config)
{
  validate(config);
  StudyResult result;
  DatWriter writer(config.output, "Epsilon H2 H1 L2");

  const int size = config.sizes.front();
  const Mesh mesh = build_study_mesh(config, size);
  const DofLayout layout(mesh, config.order);
  const AssemblyContext ctx = AssemblyContext::build(mesh, layout, {}, config.solver.exec);

  SolverConfig scfg = config.solver;
  if (scfg.epsilon_schedule.empty()) scfg.epsilon_schedule = default_epsilon_schedule();
  auto factory = [&](double eps) { return make_problem(config, eps); };

  auto on_stage = [&](int, double eps, const Eigen::VectorXd& u, const StageReport& rep) {
    const ProblemData p = factory(eps);
    ErrorRecord rec = compute_errors(ctx, u, p.exact, config.solver.exec);
    log_stage(config, "epsilon", size, mesh.h_max, layout.n_free(), eps, rep, rec);
    result.records.push_back(rec);
    result.epsilons.push_back(eps);
    writer.row({eps, rec.H2, rec.H1, rec.L2});
  };

  const auto [u, report] = continuation_solve(ctx, factory, scfg, on_stage);
  (void)u;
  if (!report.converged) {
    result.all_converged = false;
    result.failure = "epsilon stage " + std::to_string(result.records.size());
  }
  return result;
}

} // namespace vem
