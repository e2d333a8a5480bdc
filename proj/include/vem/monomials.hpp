#ifndef VEM_MONOMIALS_HPP
#define VEM_MONOMIALS_HPP

#include <functional>

#include "vem/quadrature.hpp"

namespace vem {

/// dim P_k in 2D; zero for negative k.
inline int poly_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

/// Exponent pairs (a,b) of the scaled monomial basis, ordered by total degree
/// then descending x-power: 1, x, y, x^2, xy, y^2, ... The basis of P_{k-1}
/// is a prefix of the basis of P_k.
std::vector<std::pair<int, int>> monomial_exponents(int degree);

inline int monomial_index(int a, int b)
{
  const int d = a + b;
  return d * (d + 1) / 2 + b;
}

/// Scaled monomial basis m_alpha(x) = ((x - x_K)/h_K)^alpha on one element.
class MonomialBasis {
public:
  MonomialBasis(Vec2 center, double scale, int degree);

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  const Vec2& center() const { return center_; }
  double scale() const { return scale_; }

  /// Row vector of all basis values at x.
  Eigen::RowVectorXd values(const Vec2& x) const;
  /// Rows = points, cols = basis functions, truncated to dim P_sub.
  Eigen::MatrixXd values_at(const std::vector<Vec2>& pts, int sub_degree) const;

  /// Exact differentiation matrices: coefficients in P_degree to coefficients
  /// in P_{degree-1}; entries carry the 1/h_K factor.
  Eigen::MatrixXd derivative_x() const { return deriv_matrix(0); }
  Eigen::MatrixXd derivative_y() const { return deriv_matrix(1); }

  /// Gram matrix of the P_sub prefix blocks computed with the given rule
  /// (exact when rule degree >= 2*sub_degree). Result is exactly symmetric.
  Eigen::MatrixXd gram(const QuadratureRule& rule, int sub_degree) const;

private:
  Eigen::MatrixXd deriv_matrix(int dir) const;

  Vec2 center_;
  double scale_;
  int degree_;
  int dim_;
  std::vector<std::pair<int, int>> exps_;
};

/// Basis p_j(s) = s_hat^j on an edge, in the canonical arclength coordinate
/// s_hat in [-1,1].
class EdgeBasis {
public:
  EdgeBasis(double length, int degree) : length_(length), degree_(degree) {}
  int degree() const { return degree_; }
  int dim() const { return degree_ + 1; }

  Eigen::RowVectorXd values(double s_hat) const;
  Eigen::MatrixXd values_at(const std::vector<double>& s_hat, int sub_degree) const;
  /// d/ds values (physical arclength derivative, factor 2/h_e).
  Eigen::MatrixXd deriv_values_at(const std::vector<double>& s_hat, int sub_degree) const;

  /// Exact Gram: integral over the edge of p_i p_j = h_e/(i+j+1) for even i+j.
  Eigen::MatrixXd gram(int rows, int cols) const;

private:
  double length_;
  int degree_;
};

/// Coefficients, in the edge basis, of the trace of each element monomial of
/// degree <= sub_degree along the given edge. Exact (binomial expansion).
/// Result is dim P_sub x (sub_degree+1).
Eigen::MatrixXd monomial_edge_trace(const Mesh& mesh, int elem, int edge, int sub_degree);

/// L2 projection of f onto P_k(K): solves the Gram system M c = b. Throws if
/// the Gram matrix condition exceeds 1e14 (degenerate geometry), naming the
/// element. quad_degree < 0 selects 2k+4.
Eigen::VectorXd l2_project_element(const std::function<double(const Vec2&)>& f,
                                   const Mesh& mesh, int elem, int k, int quad_degree = -1);

/// Factorization helper for small SPD Gram systems with condition monitoring.
class GramSolver {
public:
  GramSolver() = default;
  /// Throws when cond > 1e14, reporting the element id.
  GramSolver(Eigen::MatrixXd gram, int elem_id);
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  double condition() const { return cond_; }

private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd fallback_; // pivoted factor input kept when LLT fails
  bool use_llt_ = true;
  double cond_ = 0.0;
};

} // namespace vem

#endif
