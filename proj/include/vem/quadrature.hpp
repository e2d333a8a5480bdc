#ifndef VEM_QUADRATURE_HPP
#define VEM_QUADRATURE_HPP

#include "vem/mesh.hpp"

namespace vem {

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  double weight_sum() const
  {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Rule on an edge. Points are physical; s_hat are the matching reference
/// coordinates in [-1,1] with respect to the canonical edge orientation.
struct EdgeQuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> s_hat;
  std::vector<double> weights; // include the h_e/2 line measure
  int exactness_degree = 0;
};

/// Gauss-Legendre nodes/weights on [-1,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Exact for polynomials of total degree <= degree. Built by fan-triangulating
/// the (convex) element from its centroid with a collapsed tensor Gauss rule
/// per triangle. Throws for non-convex elements.
QuadratureRule polygon_quadrature(const Mesh& mesh, int elem, int degree);

/// Gauss-Legendre with ceil((degree+1)/2) points mapped to the edge.
EdgeQuadratureRule edge_quadrature(const Mesh& mesh, int edge, int degree);

} // namespace vem

#endif
