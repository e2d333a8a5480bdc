#ifndef VEM_FORMS_HPP
#define VEM_FORMS_HPP

#include <Eigen/Sparse>

#include "vem/element_ops.hpp"
#include "vem/problem_data.hpp"

namespace vem {

inline Mat2 cofactor(const Mat2& h)
{
  Mat2 c;
  c << h(1, 1), -h(1, 0), -h(0, 1), h(0, 0);
  return c;
}

inline double det2(const Mat2& h) { return h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0); }

enum class StabMode {
  Constant, // the global-constant variant, C replacing the cofactor sup norms
  Paper     // coefficient sup norms (cof of the constant Hessian projection)
};

struct StabilizationSpec {
  StabMode mode = StabMode::Constant;
  double constant = 1.0;
};

/// Mesh + layout + per-element operators, built once per discretisation.
struct AssemblyContext {
  const Mesh* mesh = nullptr;
  const DofLayout* layout = nullptr;
  std::vector<ElementOperators> ops;

  static AssemblyContext build(const Mesh& mesh, const DofLayout& layout,
                               const ElementOpsOptions& opts = {}, Exec exec = Exec::OpenMP);
};

/// Batch evaluation of a symmetric 2x2 coefficient field on one element.
using PhiField = std::function<void(int elem, const std::vector<Vec2>& pts, std::vector<Mat2>& out)>;

PhiField identity_phi();
/// cof(sym(P2 u)) at the evaluation points, frozen at the given iterate.
PhiField frozen_cofactor_phi(const AssemblyContext& ctx, const Eigen::VectorXd& u_full);

struct GlobalSystem {
  Eigen::SparseMatrix<double> A; // over free dofs
  Eigen::VectorXd rhs;           // free dofs; holds -A_fc u_c when a lift is passed
  bool symmetric = false;
};

/// A_L,h over the free dofs: sum_K [eps P2' M2 P2 + P1' M_Phi P1 +
/// (eps h^-2 + c_Phi) M_stab]. With a lift, the Dirichlet columns are
/// eliminated into rhs.
GlobalSystem assemble_linearized(const AssemblyContext& ctx, const PhiField& phi, double eps,
                                 const StabilizationSpec& stab,
                                 const Eigen::VectorXd* lift = nullptr,
                                 Exec exec = Exec::OpenMP);

/// Data vector of the nonlinear problem over free dofs: the load tested
/// against P0 w plus the boundary term eps * int_e (g_tt - psi) EN w.
Eigen::VectorXd assemble_rhs(const AssemblyContext& ctx, const ProblemData& problem,
                             Exec exec = Exec::OpenMP);

/// Data vector of the linearised problem: (phi_src, P0 w) + eps int_e psi EN w.
Eigen::VectorXd assemble_linear_rhs(const AssemblyContext& ctx, const ScalarFn& phi_src,
                                    const ScalarFn& psi, double eps, Exec exec = Exec::OpenMP);

/// F(u)(w) = A_QL,h(u,w) - RHS(w) over free test dofs; u carries the lift.
/// rhs_cached skips re-assembling the data vector.
Eigen::VectorXd assemble_residual(const AssemblyContext& ctx, const Eigen::VectorXd& u_full,
                                  const ProblemData& problem, const StabilizationSpec& stab,
                                  const Eigen::VectorXd* rhs_cached = nullptr,
                                  Exec exec = Exec::OpenMP);

/// Exact Jacobian of the residual (det linearised through the cofactor);
/// generally nonsymmetric.
Eigen::SparseMatrix<double> assemble_jacobian(const AssemblyContext& ctx,
                                              const Eigen::VectorXd& u_full,
                                              const ProblemData& problem,
                                              const StabilizationSpec& stab,
                                              Exec exec = Exec::OpenMP);

/// Dofi-dofi stabilisation matrix (I - D P0)'(I - D P0); coefficient factors
/// are applied by the caller per form.
const Eigen::MatrixXd& local_stab_matrix(const ElementOperators& ops);

/// Stabilisation coefficient of the b-form at the current iterate:
/// |cof(Hessian projection onto constants)|_F in Paper mode.
double stab_coefficient_b(const ElementOperators& ops, const StabilizationSpec& stab,
                          const std::array<Eigen::VectorXd, 4>& hess_coeffs);

} // namespace vem

#endif
