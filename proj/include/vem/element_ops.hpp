#ifndef VEM_ELEMENT_OPS_HPP
#define VEM_ELEMENT_OPS_HPP

#include "vem/dof_layout.hpp"
#include "vem/parallel.hpp"

namespace vem {

struct ElementOpsOptions {
  /// Test hook: drop the least-squares completed coefficient of the edge
  /// normal projection (the Hessian projection must not depend on it).
  bool en_zero_completion = false;
};

/// Per-edge bookkeeping in the element-local (outward) convention.
struct EdgeLocal {
  int edge = -1;        // mesh edge index
  double sigma = 1.0;   // +1 if the element is K+ of the edge
  Vec2 n_out;           // outward normal = sigma * canonical normal
  double length = 0.0;
};

/// Dense projection operators of one element, all acting on local dof
/// vectors (vertices, edge moments, edge normal moments, interior moments).
/// Normal-moment entries follow the element-local outward convention; the
/// +/-1 orientation factor is applied when scattering to global dofs.
struct ElementOperators {
  int elem = -1;
  int order = 0;
  int n_dof = 0;
  double h = 1.0;    // element diameter
  double area = 0.0;

  MonomialBasis basis{Vec2::Zero(), 1.0, 0}; // degree l, shared scaling for all prefixes

  Eigen::MatrixXd D;                    // dof evaluation of monomials, N x dim P_l
  Eigen::MatrixXd P0;                   // value projection, dim P_l x N
  std::array<Eigen::MatrixXd, 2> P1;    // gradient components, dim P_{l-1} x N
  std::array<Eigen::MatrixXd, 4> P2;    // Hessian components (xx,xy,yx,yy), dim P_{l-2} x N
  std::vector<Eigen::MatrixXd> E0;      // per-edge value projection, (l+1) x N
  std::vector<Eigen::MatrixXd> EN;      // per-edge normal projection, l x N
  std::vector<EdgeLocal> edges;

  Eigen::MatrixXd G;                    // monomial Gram up to degree l (exact)
  Eigen::MatrixXd Mstab;                // (I - D P0)^T (I - D P0)
  Eigen::MatrixXd K2;                   // sum_rs P2_rs^T G2 P2_rs

  std::vector<Vec2> asm_pts;            // assembly rule, exactness max(3l, 2l+2)
  std::vector<double> asm_w;

  /// Hessian of the dof vector at a point, via the four projected components.
  Mat2 hessian_at(const Eigen::RowVectorXd& mono2_vals,
                  const std::array<Eigen::VectorXd, 4>& hess_coeffs) const
  {
    Mat2 H;
    H(0, 0) = mono2_vals.dot(hess_coeffs[0]);
    H(0, 1) = mono2_vals.dot(hess_coeffs[1]);
    H(1, 0) = mono2_vals.dot(hess_coeffs[2]);
    H(1, 1) = mono2_vals.dot(hess_coeffs[3]);
    return H;
  }
};

ElementOperators build_element_operators(const Mesh& mesh, const DofLayout& layout, int elem,
                                         const ElementOpsOptions& opts = {});

std::vector<ElementOperators> build_all_element_operators(const Mesh& mesh, const DofLayout& layout,
                                                          const ElementOpsOptions& opts = {},
                                                          Exec exec = Exec::OpenMP);

/// Per-edge value projection matrix (endpoint values plus moments against
/// P_{l-2}; square, uniquely solvable). local_edge indexes the element edges.
Eigen::MatrixXd compute_edge_value_projection(const Mesh& mesh, const DofLayout& layout, int elem,
                                              int local_edge);

/// Per-edge normal projection: P_{l-2} moments are hard constraints (the D3
/// dofs); the remaining coefficient is a least-squares fit against the edge
/// trace of grad(P0 v) . n.
Eigen::MatrixXd compute_edge_normal_projection(const Mesh& mesh, const DofLayout& layout, int elem,
                                               int local_edge);

/// Gather the element-local dof values (orientation signs applied).
Eigen::VectorXd gather_local(const DofLayout& layout, int elem, const Eigen::VectorXd& global);

} // namespace vem

#endif
