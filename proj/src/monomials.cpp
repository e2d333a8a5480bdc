#include "vem/monomials.hpp"

#include <cmath>
#include <stdexcept>

namespace vem {

std::vector<std::pair<int, int>> monomial_exponents(int degree)
{
  std::vector<std::pair<int, int>> exps;
  exps.reserve(poly_dim(degree));
  for (int d = 0; d <= degree; ++d)
    for (int b = 0; b <= d; ++b)
      exps.emplace_back(d - b, b);
  return exps;
}

MonomialBasis::MonomialBasis(Vec2 center, double scale, int degree)
    : center_(center), scale_(scale), degree_(degree), dim_(poly_dim(degree)),
      exps_(monomial_exponents(degree))
{
}

Eigen::RowVectorXd MonomialBasis::values(const Vec2& x) const
{
  const double xi = (x.x() - center_.x()) / scale_;
  const double eta = (x.y() - center_.y()) / scale_;
  Eigen::RowVectorXd v(dim_);
  // powers by recurrence
  std::vector<double> px(degree_ + 1, 1.0), py(degree_ + 1, 1.0);
  for (int k = 1; k <= degree_; ++k) {
    px[k] = px[k - 1] * xi;
    py[k] = py[k - 1] * eta;
  }
  for (int i = 0; i < dim_; ++i) v[i] = px[exps_[i].first] * py[exps_[i].second];
  return v;
}

Eigen::MatrixXd MonomialBasis::values_at(const std::vector<Vec2>& pts, int sub_degree) const
{
  const int m = poly_dim(std::min(sub_degree, degree_));
  Eigen::MatrixXd V(pts.size(), m);
  for (std::size_t q = 0; q < pts.size(); ++q)
    V.row(q) = values(pts[q]).head(m);
  return V;
}

Eigen::MatrixXd MonomialBasis::deriv_matrix(int dir) const
{
  const int rows = poly_dim(degree_ - 1);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows, dim_);
  for (int i = 0; i < dim_; ++i) {
    const auto [a, b] = exps_[i];
    if (dir == 0 && a > 0) D(monomial_index(a - 1, b), i) = a / scale_;
    if (dir == 1 && b > 0) D(monomial_index(a, b - 1), i) = b / scale_;
  }
  return D;
}

Eigen::MatrixXd MonomialBasis::gram(const QuadratureRule& rule, int sub_degree) const
{
  const int m = poly_dim(std::min(sub_degree, degree_));
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::RowVectorXd v = values(rule.points[q]).head(m);
    G.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), rule.weights[q]);
  }
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  return G;
}

Eigen::RowVectorXd EdgeBasis::values(double s) const
{
  Eigen::RowVectorXd v(degree_ + 1);
  v[0] = 1.0;
  for (int j = 1; j <= degree_; ++j) v[j] = v[j - 1] * s;
  return v;
}

Eigen::MatrixXd EdgeBasis::values_at(const std::vector<double>& s, int sub_degree) const
{
  const int m = std::min(sub_degree, degree_) + 1;
  Eigen::MatrixXd V(s.size(), m);
  for (std::size_t q = 0; q < s.size(); ++q) V.row(q) = values(s[q]).head(m);
  return V;
}

Eigen::MatrixXd EdgeBasis::deriv_values_at(const std::vector<double>& s, int sub_degree) const
{
  const int m = std::min(sub_degree, degree_) + 1;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(s.size(), m);
  const double jac = 2.0 / length_; // d s_hat / d s
  for (std::size_t q = 0; q < s.size(); ++q) {
    double p = 1.0;
    for (int j = 1; j < m; ++j) {
      V(q, j) = j * p * jac;
      p *= s[q];
    }
  }
  return V;
}

Eigen::MatrixXd EdgeBasis::gram(int rows, int cols) const
{
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if ((i + j) % 2 == 0) G(i, j) = length_ / (i + j + 1);
  return G;
}

Eigen::MatrixXd monomial_edge_trace(const Mesh& mesh, int elem, int edge, int sub_degree)
{
  const Element& el = mesh.elements[elem];
  const Edge& e = mesh.edges[edge];
  const Vec2 a = mesh.vertices[e.endpoints[0]];
  const Vec2 b = mesh.vertices[e.endpoints[1]];
  // xi(s) = c + d s on the edge, in scaled element coordinates
  const Vec2 c = (0.5 * (a + b) - el.centroid) / el.diameter;
  const Vec2 d = 0.5 * (b - a) / el.diameter;

  const int n = sub_degree + 1;
  const auto exps = monomial_exponents(sub_degree);
  // 1D coefficient rows of (c + d s)^k for each coordinate
  auto powers = [n](double c0, double d0) {
    std::vector<Eigen::RowVectorXd> pw(n);
    pw[0] = Eigen::RowVectorXd::Zero(n);
    pw[0][0] = 1.0;
    for (int k = 1; k < n; ++k) {
      pw[k] = Eigen::RowVectorXd::Zero(n);
      for (int j = 0; j < k; ++j) {
        pw[k][j] += c0 * pw[k - 1][j];
        pw[k][j + 1] += d0 * pw[k - 1][j];
      }
    }
    return pw;
  };
  const auto pwx = powers(c.x(), d.x());
  const auto pwy = powers(c.y(), d.y());

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(poly_dim(sub_degree), n);
  for (std::size_t i = 0; i < exps.size(); ++i) {
    const auto [p, q] = exps[i];
    for (int j = 0; j <= p; ++j)
      for (int k = 0; k <= q && j + k < n; ++k)
        T(i, j + k) += pwx[p][j] * pwy[q][k];
  }
  return T;
}

GramSolver::GramSolver(Eigen::MatrixXd gram, int elem_id)
{
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  cond_ = (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(cond_ < 1e14))
    throw std::runtime_error("Gram matrix numerically singular on element " +
                             std::to_string(elem_id) + " (cond " + std::to_string(cond_) + ")");
  llt_.compute(gram);
  if (llt_.info() != Eigen::Success) {
    use_llt_ = false;
    fallback_ = std::move(gram);
  }
}

Eigen::MatrixXd GramSolver::solve(const Eigen::MatrixXd& rhs) const
{
  if (use_llt_) return llt_.solve(rhs);
  return fallback_.fullPivLu().solve(rhs);
}

Eigen::VectorXd l2_project_element(const std::function<double(const Vec2&)>& f,
                                   const Mesh& mesh, int elem, int k, int quad_degree)
{
  if (quad_degree < 0) quad_degree = 2 * k + 4;
  const Element& el = mesh.elements[elem];
  MonomialBasis basis(el.centroid, el.diameter, k);
  const QuadratureRule rule = polygon_quadrature(mesh, elem, std::max(quad_degree, 2 * k));
  GramSolver gram(basis.gram(rule, k), elem);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(basis.dim());
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    b += rule.weights[q] * f(rule.points[q]) * basis.values(rule.points[q]).transpose();
  return gram.solve(b);
}

} // namespace vem
