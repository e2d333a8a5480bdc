#include "vem/forms.hpp"

#include <stdexcept>

namespace vem {

namespace {

using Triplet = Eigen::Triplet<double>;

// Per-element contributions kept apart and merged in element order, so the
// assembled objects are bit-identical for any thread count.
struct ScatterBuffers {
  std::vector<std::vector<Triplet>> triplets;
  std::vector<std::vector<std::pair<long, double>>> vec;
  explicit ScatterBuffers(int n) : triplets(n), vec(n) {}

  Eigen::SparseMatrix<double> merge_matrix(long n_free) const
  {
    std::size_t total = 0;
    for (const auto& t : triplets) total += t.size();
    std::vector<Triplet> all;
    all.reserve(total);
    for (const auto& t : triplets) all.insert(all.end(), t.begin(), t.end());
    Eigen::SparseMatrix<double> A(n_free, n_free);
    A.setFromTriplets(all.begin(), all.end());
    return A;
  }

  Eigen::VectorXd merge_vector(long n_free) const
  {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_free);
    for (const auto& contrib : vec)
      for (const auto& [idx, val] : contrib) v[idx] += val;
    return v;
  }
};

void scatter_matrix(const DofLayout& layout, int elem, const Eigen::MatrixXd& A_loc,
                    const Eigen::VectorXd* lift_loc, std::vector<Triplet>& out,
                    std::vector<std::pair<long, double>>& rhs_out)
{
  const auto dofs = layout.local_dofs(elem);
  Eigen::VectorXd corr;
  if (lift_loc) corr = A_loc * (*lift_loc);
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const long fi = layout.free_index(dofs[i].global);
    if (fi < 0) continue;
    for (std::size_t j = 0; j < dofs.size(); ++j) {
      const long fj = layout.free_index(dofs[j].global);
      if (fj < 0) continue;
      out.emplace_back(fi, fj, dofs[i].sign * dofs[j].sign * A_loc(i, j));
    }
    if (lift_loc) rhs_out.emplace_back(fi, -dofs[i].sign * corr[i]);
  }
}

void scatter_vector(const DofLayout& layout, int elem, const Eigen::VectorXd& r_loc,
                    std::vector<std::pair<long, double>>& out)
{
  const auto dofs = layout.local_dofs(elem);
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const long fi = layout.free_index(dofs[i].global);
    if (fi >= 0) out.emplace_back(fi, dofs[i].sign * r_loc[i]);
  }
}

std::array<Eigen::VectorXd, 4> hessian_coeffs(const ElementOperators& ops,
                                              const Eigen::VectorXd& u_loc)
{
  return {ops.P2[0] * u_loc, ops.P2[1] * u_loc, ops.P2[2] * u_loc, ops.P2[3] * u_loc};
}

// Tangential second derivative of g along a (straight) boundary edge, by a
// 4th-order difference when no analytic Hessian is supplied.
double g_tangential_dd(const ProblemData& problem, const Vec2& x, const Vec2& t, double h_e)
{
  if (problem.g_hess) {
    const Mat2 H = problem.g_hess(x);
    return t.dot(H * t);
  }
  const double h = h_e / 64.0;
  auto g = [&](double s) { return problem.g(x + s * t); };
  return (-g(2 * h) + 16 * g(h) - 30 * g(0) + 16 * g(-h) - g(-2 * h)) / (12 * h * h);
}

} // namespace

AssemblyContext AssemblyContext::build(const Mesh& mesh, const DofLayout& layout,
                                       const ElementOpsOptions& opts, Exec exec)
{
  AssemblyContext ctx;
  ctx.mesh = &mesh;
  ctx.layout = &layout;
  ctx.ops = build_all_element_operators(mesh, layout, opts, exec);
  return ctx;
}

PhiField identity_phi()
{
  return [](int, const std::vector<Vec2>& pts, std::vector<Mat2>& out) {
    out.assign(pts.size(), Mat2::Identity());
  };
}

PhiField frozen_cofactor_phi(const AssemblyContext& ctx, const Eigen::VectorXd& u_full)
{
  const AssemblyContext* pctx = &ctx;
  // The iterate is copied: the field must stay valid while the caller updates u.
  return [pctx, u = u_full](int elem, const std::vector<Vec2>& pts, std::vector<Mat2>& out) {
    const ElementOperators& ops = pctx->ops[elem];
    const Eigen::VectorXd u_loc = gather_local(*pctx->layout, elem, u);
    const auto hc = hessian_coeffs(ops, u_loc);
    const int n2 = poly_dim(ops.order - 2);
    out.resize(pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Eigen::RowVectorXd m2 = ops.basis.values(pts[q]).head(n2);
      Mat2 H = ops.hessian_at(m2, hc);
      H = 0.5 * (H + H.transpose()).eval();
      out[q] = cofactor(H);
    }
  };
}

const Eigen::MatrixXd& local_stab_matrix(const ElementOperators& ops) { return ops.Mstab; }

double stab_coefficient_b(const ElementOperators& ops, const StabilizationSpec& stab,
                          const std::array<Eigen::VectorXd, 4>& hess_coeffs)
{
  if (stab.mode == StabMode::Constant) return stab.constant;
  const int n2 = poly_dim(ops.order - 2);
  Mat2 avg;
  for (int c = 0; c < 4; ++c)
    avg(c / 2, c % 2) = ops.G.row(0).head(n2).dot(hess_coeffs[c]) / ops.area;
  avg = 0.5 * (avg + avg.transpose()).eval();
  return cofactor(avg).norm();
}

GlobalSystem assemble_linearized(const AssemblyContext& ctx, const PhiField& phi, double eps,
                                 const StabilizationSpec& stab, const Eigen::VectorXd* lift,
                                 Exec exec)
{
  const DofLayout& layout = *ctx.layout;
  ScatterBuffers buf(ctx.mesh->n_elements());

  parallel_for(ctx.mesh->n_elements(), exec, [&](std::ptrdiff_t k) {
    const ElementOperators& ops = ctx.ops[k];
    const int n1 = poly_dim(ops.order - 1);

    std::vector<Mat2> phivals;
    phi(static_cast<int>(k), ops.asm_pts, phivals);

    Eigen::MatrixXd G00 = Eigen::MatrixXd::Zero(n1, n1);
    Eigen::MatrixXd G01 = Eigen::MatrixXd::Zero(n1, n1);
    Eigen::MatrixXd G11 = Eigen::MatrixXd::Zero(n1, n1);
    double sup_phi = 0.0;
    for (std::size_t q = 0; q < ops.asm_pts.size(); ++q) {
      const Eigen::RowVectorXd m1 = ops.basis.values(ops.asm_pts[q]).head(n1);
      const double w = ops.asm_w[q];
      const Mat2& P = phivals[q];
      G00.selfadjointView<Eigen::Lower>().rankUpdate(m1.transpose(), w * P(0, 0));
      G11.selfadjointView<Eigen::Lower>().rankUpdate(m1.transpose(), w * P(1, 1));
      G01 += (w * 0.5 * (P(0, 1) + P(1, 0))) * m1.transpose() * m1;
      sup_phi = std::max(sup_phi, P.norm());
    }
    G00.triangularView<Eigen::StrictlyUpper>() = G00.transpose();
    G11.triangularView<Eigen::StrictlyUpper>() = G11.transpose();

    Eigen::MatrixXd A = eps * ops.K2;
    A += ops.P1[0].transpose() * G00 * ops.P1[0];
    A += ops.P1[0].transpose() * G01 * ops.P1[1];
    A += ops.P1[1].transpose() * G01.transpose() * ops.P1[0];
    A += ops.P1[1].transpose() * G11 * ops.P1[1];
    const double c_phi = stab.mode == StabMode::Constant ? stab.constant : sup_phi;
    A += (eps / (ops.h * ops.h) + c_phi) * ops.Mstab;
    A = (0.5 * (A + A.transpose())).eval();

    Eigen::VectorXd lift_loc;
    if (lift) lift_loc = gather_local(layout, static_cast<int>(k), *lift);
    scatter_matrix(layout, static_cast<int>(k), A, lift ? &lift_loc : nullptr,
                   buf.triplets[k], buf.vec[k]);
  });

  GlobalSystem sys;
  sys.A = buf.merge_matrix(layout.n_free());
  sys.rhs = buf.merge_vector(layout.n_free());
  sys.symmetric = true;
  return sys;
}

namespace {

Eigen::VectorXd boundary_term(const AssemblyContext& ctx, int elem,
                              const std::function<double(const Vec2&)>& weight_fn, double eps)
{
  const ElementOperators& ops = ctx.ops[elem];
  Eigen::VectorXd r = Eigen::VectorXd::Zero(ops.n_dof);
  for (std::size_t i = 0; i < ops.edges.size(); ++i) {
    const EdgeLocal& ed = ops.edges[i];
    if (!ctx.mesh->edges[ed.edge].is_boundary) continue;
    const EdgeQuadratureRule rule = edge_quadrature(*ctx.mesh, ed.edge, 2 * ops.order + 2);
    const EdgeBasis eb(ed.length, ops.order - 1);
    Eigen::VectorXd data = Eigen::VectorXd::Zero(ops.order);
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      data += rule.weights[q] * weight_fn(rule.points[q]) * eb.values(rule.s_hat[q]).transpose();
    r += eps * ops.EN[i].transpose() * data;
  }
  return r;
}

} // namespace

Eigen::VectorXd assemble_rhs(const AssemblyContext& ctx, const ProblemData& problem, Exec exec)
{
  const DofLayout& layout = *ctx.layout;
  ScatterBuffers buf(ctx.mesh->n_elements());
  parallel_for(ctx.mesh->n_elements(), exec, [&](std::ptrdiff_t k) {
    const ElementOperators& ops = ctx.ops[k];
    const int n0 = poly_dim(ops.order);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n0);
    for (std::size_t q = 0; q < ops.asm_pts.size(); ++q)
      load += ops.asm_w[q] * problem.f(ops.asm_pts[q]) *
              ops.basis.values(ops.asm_pts[q]).transpose();
    Eigen::VectorXd r = ops.P0.transpose() * load;

    bool has_boundary = false;
    for (const EdgeLocal& ed : ops.edges)
      has_boundary = has_boundary || ctx.mesh->edges[ed.edge].is_boundary;
    if (has_boundary) {
      // locate the tangent of each boundary edge for the g_tt data
      for (std::size_t i = 0; i < ops.edges.size(); ++i) {
        const EdgeLocal& ed = ops.edges[i];
        const Edge& e = ctx.mesh->edges[ed.edge];
        if (!e.is_boundary) continue;
        const EdgeQuadratureRule rule = edge_quadrature(*ctx.mesh, ed.edge, 2 * ops.order + 2);
        const EdgeBasis eb(ed.length, ops.order - 1);
        Eigen::VectorXd data = Eigen::VectorXd::Zero(ops.order);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const double w = g_tangential_dd(problem, rule.points[q], e.tangent, e.length) -
                           problem.psi(rule.points[q]);
          data += rule.weights[q] * w * eb.values(rule.s_hat[q]).transpose();
        }
        r += problem.epsilon * ops.EN[i].transpose() * data;
      }
    }
    scatter_vector(layout, static_cast<int>(k), r, buf.vec[k]);
  });
  return buf.merge_vector(layout.n_free());
}

Eigen::VectorXd assemble_linear_rhs(const AssemblyContext& ctx, const ScalarFn& phi_src,
                                    const ScalarFn& psi, double eps, Exec exec)
{
  const DofLayout& layout = *ctx.layout;
  ScatterBuffers buf(ctx.mesh->n_elements());
  parallel_for(ctx.mesh->n_elements(), exec, [&](std::ptrdiff_t k) {
    const ElementOperators& ops = ctx.ops[k];
    const int n0 = poly_dim(ops.order);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n0);
    for (std::size_t q = 0; q < ops.asm_pts.size(); ++q)
      load += ops.asm_w[q] * phi_src(ops.asm_pts[q]) *
              ops.basis.values(ops.asm_pts[q]).transpose();
    Eigen::VectorXd r = ops.P0.transpose() * load;
    r += boundary_term(ctx, static_cast<int>(k), psi, eps);
    scatter_vector(layout, static_cast<int>(k), r, buf.vec[k]);
  });
  return buf.merge_vector(layout.n_free());
}

Eigen::VectorXd assemble_residual(const AssemblyContext& ctx, const Eigen::VectorXd& u_full,
                                  const ProblemData& problem, const StabilizationSpec& stab,
                                  const Eigen::VectorXd* rhs_cached, Exec exec)
{
  const DofLayout& layout = *ctx.layout;
  const double eps = problem.epsilon;
  ScatterBuffers buf(ctx.mesh->n_elements());
  parallel_for(ctx.mesh->n_elements(), exec, [&](std::ptrdiff_t k) {
    const ElementOperators& ops = ctx.ops[k];
    const int n0 = poly_dim(ops.order);
    const int n2 = poly_dim(ops.order - 2);
    const Eigen::VectorXd u_loc = gather_local(layout, static_cast<int>(k), u_full);
    const auto hc = hessian_coeffs(ops, u_loc);

    Eigen::VectorXd qdet = Eigen::VectorXd::Zero(n0);
    for (std::size_t q = 0; q < ops.asm_pts.size(); ++q) {
      const Eigen::RowVectorXd m = ops.basis.values(ops.asm_pts[q]);
      const Mat2 H = ops.hessian_at(m.head(n2), hc);
      qdet += ops.asm_w[q] * det2(H) * m.transpose();
    }
    // S_a carries -eps h^-2; S_b carries -c_b so that the negated Jacobian
    // agrees with the linearized form on the projection kernel (the
    // fixed-point map stays contractive on coarse meshes).
    const double c_b = stab_coefficient_b(ops, stab, hc);
    Eigen::VectorXd r = -eps * (ops.K2 * u_loc);
    r += -(c_b + eps / (ops.h * ops.h)) * (ops.Mstab * u_loc);
    r += ops.P0.transpose() * qdet;
    scatter_vector(layout, static_cast<int>(k), r, buf.vec[k]);
  });
  Eigen::VectorXd F = buf.merge_vector(layout.n_free());
  if (rhs_cached) return F - *rhs_cached;
  return F - assemble_rhs(ctx, problem, exec);
}

Eigen::SparseMatrix<double> assemble_jacobian(const AssemblyContext& ctx,
                                              const Eigen::VectorXd& u_full,
                                              const ProblemData& problem,
                                              const StabilizationSpec& stab, Exec exec)
{
  const DofLayout& layout = *ctx.layout;
  const double eps = problem.epsilon;
  ScatterBuffers buf(ctx.mesh->n_elements());
  parallel_for(ctx.mesh->n_elements(), exec, [&](std::ptrdiff_t k) {
    const ElementOperators& ops = ctx.ops[k];
    const int n2 = poly_dim(ops.order - 2);
    const Eigen::VectorXd u_loc = gather_local(layout, static_cast<int>(k), u_full);
    const auto hc = hessian_coeffs(ops, u_loc);

    const double c_b = stab_coefficient_b(ops, stab, hc); // frozen in Paper mode
    Eigen::MatrixXd J = -eps * ops.K2 - (c_b + eps / (ops.h * ops.h)) * ops.Mstab;
    for (std::size_t q = 0; q < ops.asm_pts.size(); ++q) {
      const Eigen::RowVectorXd m = ops.basis.values(ops.asm_pts[q]);
      const Mat2 C = cofactor(ops.hessian_at(m.head(n2), hc));
      const Eigen::VectorXd a = ops.P0.transpose() * m.transpose();
      Eigen::VectorXd b = Eigen::VectorXd::Zero(ops.n_dof);
      for (int c = 0; c < 4; ++c)
        b += C(c / 2, c % 2) * (ops.P2[c].transpose() * m.head(n2).transpose());
      J += ops.asm_w[q] * a * b.transpose();
    }
    scatter_matrix(layout, static_cast<int>(k), J, nullptr, buf.triplets[k], buf.vec[k]);
  });
  return buf.merge_matrix(layout.n_free());
}

} // namespace vem
