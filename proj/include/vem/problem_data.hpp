#ifndef VEM_PROBLEM_DATA_HPP
#define VEM_PROBLEM_DATA_HPP

#include <string>

#include "vem/dof_layout.hpp"

namespace vem {

using HessFn = std::function<Mat2(const Vec2&)>;

/// Closed-form solution with all derivatives needed to manufacture data for
/// -eps biharmonic(u) + det(hess u) = f. Construction validates every
/// derivative formula against finite differences.
struct ManufacturedSolution {
  std::string id;
  ScalarFn u;
  GradFn grad;
  HessFn hess;
  ScalarFn laplacian;
  ScalarFn biharmonic;
};

struct DerivativeReport {
  bool ok = true;
  std::string failure; // names the failing derivative and point
  double max_rel_error = 0.0;
};

/// Compares grad, hess, and biharmonic against high-order central finite
/// differences at 100 quasi-random points.
DerivativeReport validate_derivatives(const ManufacturedSolution& sol);

struct ProblemData {
  double epsilon = 0.0;
  ScalarFn f;         // forcing
  ScalarFn g;         // Dirichlet data
  HessFn g_hess;      // second derivatives of g, when available analytically
  ScalarFn psi;       // boundary data for the Laplacian
  bool has_exact = false;
  ManufacturedSolution exact;
};

/// Manufactured problem with the consistent extra boundary condition
/// psi = laplacian(u) (the known-solution setup). Ids: quadratic, p1_quartic
/// (aliases p1), p2_exponential (p2), p3_trig (p3). The construction gate
/// checks f = -eps biharmonic(u) + det(hess u), g = u, psi = laplacian(u)
/// pointwise and the FD derivative report.
ProblemData manufactured(const std::string& id, double epsilon);

/// The viscosity-limit setup: f = 4, g = x^2 + y^2, original boundary
/// condition psi = eps. Errors are measured against the limit solution
/// u0 = x^2 + y^2 (which is not the exact solution at finite eps).
ProblemData quadratic_limit_problem(double epsilon);

/// det(hess u) > 0 and trace(hess u) > 0 at every volume quadrature point
/// a run at this order would use.
bool convex_on_mesh(const ManufacturedSolution& sol, const Mesh& mesh, int order);

} // namespace vem

#endif
