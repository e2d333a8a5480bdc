#include "vem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace vem {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pn1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule polygon_quadrature(const Mesh& mesh, int elem, int degree)
{
  if (degree < 0) degree = 0;
  if (!element_is_convex(mesh, elem))
    throw std::runtime_error("polygon_quadrature: element " + std::to_string(elem) +
                             " is not convex (fan triangulation invalid)");

  const auto& el = mesh.elements[elem];
  const int nv = static_cast<int>(el.vertex_indices.size());

  // Collapsed tensor Gauss on each fan triangle; the Jacobian adds one degree
  // in the collapsed direction, hence the +2.
  const int n1 = (degree + 2 + 1) / 2;
  std::vector<double> gx, gw;
  gauss_legendre(n1, gx, gw);

  QuadratureRule rule;
  rule.exactness_degree = degree;
  rule.points.reserve(nv * n1 * n1);
  rule.weights.reserve(nv * n1 * n1);

  for (int i = 0; i < nv; ++i) {
    const Vec2 p0 = el.centroid;
    const Vec2 p1 = mesh.vertices[el.vertex_indices[i]];
    const Vec2 p2 = mesh.vertices[el.vertex_indices[(i + 1) % nv]];
    const double a2 = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    for (int a = 0; a < n1; ++a) {
      const double u = 0.5 * (gx[a] + 1.0);
      const double wu = 0.5 * gw[a];
      for (int b = 0; b < n1; ++b) {
        const double v = 0.5 * (gx[b] + 1.0);
        const double wv = 0.5 * gw[b];
        // x = p0(1-u) + u[(1-v) p1 + v p2], |J| = u * a2
        rule.points.push_back(p0 * (1.0 - u) + u * ((1.0 - v) * p1 + v * p2));
        rule.weights.push_back(wu * wv * u * a2);
      }
    }
  }
  return rule;
}

EdgeQuadratureRule edge_quadrature(const Mesh& mesh, int edge, int degree)
{
  if (degree < 0) degree = 0;
  const Edge& e = mesh.edges[edge];
  const int n = (degree + 1 + 1) / 2; // ceil((degree+1)/2)
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);

  const Vec2 a = mesh.vertices[e.endpoints[0]];
  const Vec2 b = mesh.vertices[e.endpoints[1]];
  EdgeQuadratureRule rule;
  rule.exactness_degree = 2 * n - 1;
  rule.points.resize(n);
  rule.s_hat.resize(n);
  rule.weights.resize(n);
  for (int q = 0; q < n; ++q) {
    rule.s_hat[q] = gx[q];
    rule.points[q] = 0.5 * (a + b) + 0.5 * gx[q] * (b - a);
    rule.weights[q] = 0.5 * e.length * gw[q];
  }
  return rule;
}

} // namespace vem
