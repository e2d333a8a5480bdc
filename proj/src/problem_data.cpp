#include "vem/problem_data.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vem {

namespace {

double det2(const Mat2& h) { return h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0); }

// 4th-order central stencils. First/second derivatives use step hd; the
// biharmonic uses the larger step hb (fourth derivatives lose ~eps/h^4 to
// roundoff, which rules out very small steps).
constexpr double kStepDeriv = 1e-4;
constexpr double kStepBiharm = 1e-2;

template <typename F>
double fd1(const F& f, const Vec2& x, int dir, double h)
{
  Vec2 e = Vec2::Zero();
  e[dir] = 1.0;
  return (-f(x + 2 * h * e) + 8 * f(x + h * e) - 8 * f(x - h * e) + f(x - 2 * h * e)) / (12 * h);
}

template <typename F>
double fd2(const F& f, const Vec2& x, int dir, double h)
{
  Vec2 e = Vec2::Zero();
  e[dir] = 1.0;
  return (-f(x + 2 * h * e) + 16 * f(x + h * e) - 30 * f(x) + 16 * f(x - h * e) -
          f(x - 2 * h * e)) / (12 * h * h);
}

template <typename F>
double fd_mixed(const F& f, const Vec2& x, double h)
{
  auto fy = [&](const Vec2& p) { return fd1(f, p, 1, h); };
  return fd1(fy, x, 0, h);
}

template <typename F>
double fd_laplacian(const F& f, const Vec2& x, double h)
{
  return fd2(f, x, 0, h) + fd2(f, x, 1, h);
}

// Halton-style quasi-random points in [0.1, 0.9]^2.
std::vector<Vec2> sample_points(int n)
{
  auto halton = [](int i, int base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * (i % base);
      i /= base;
    }
    return r;
  };
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i)
    pts[i] = Vec2(0.1 + 0.8 * halton(i + 1, 2), 0.1 + 0.8 * halton(i + 1, 3));
  return pts;
}

} // namespace

DerivativeReport validate_derivatives(const ManufacturedSolution& sol)
{
  DerivativeReport rep;
  const auto pts = sample_points(100);
  auto check = [&](const std::string& name, const Vec2& x, double exact, double approx,
                   double scale) {
    const double err = std::abs(exact - approx) / std::max(1.0, std::abs(scale));
    rep.max_rel_error = std::max(rep.max_rel_error, err);
    if (err > 1e-6 && rep.ok) {
      rep.ok = false;
      std::ostringstream os;
      os << name << " mismatch at (" << x.x() << ", " << x.y() << "): closed form " << exact
         << " vs finite difference " << approx;
      rep.failure = os.str();
    }
  };
  for (const Vec2& x : pts) {
    const Vec2 g = sol.grad(x);
    check("du/dx", x, g.x(), fd1(sol.u, x, 0, kStepDeriv), g.norm());
    check("du/dy", x, g.y(), fd1(sol.u, x, 1, kStepDeriv), g.norm());
    const Mat2 H = sol.hess(x);
    check("d2u/dx2", x, H(0, 0), fd2(sol.u, x, 0, kStepDeriv), H.norm());
    check("d2u/dy2", x, H(1, 1), fd2(sol.u, x, 1, kStepDeriv), H.norm());
    check("d2u/dxdy", x, H(0, 1), fd_mixed(sol.u, x, kStepDeriv), H.norm());
    check("laplacian", x, sol.laplacian(x), H(0, 0) + H(1, 1), sol.laplacian(x));
    auto lap = [&](const Vec2& p) { return fd_laplacian(sol.u, p, kStepBiharm); };
    check("biharmonic", x, sol.biharmonic(x), fd_laplacian(lap, x, kStepBiharm),
          sol.biharmonic(x));
  }
  return rep;
}

namespace {

ManufacturedSolution make_solution(const std::string& id)
{
  ManufacturedSolution s;
  s.id = id;
  if (id == "quadratic") {
    s.u = [](const Vec2& x) { return x.squaredNorm(); };
    s.grad = [](const Vec2& x) { return Vec2(2 * x.x(), 2 * x.y()); };
    s.hess = [](const Vec2&) { return 2.0 * Mat2::Identity(); };
    s.laplacian = [](const Vec2&) { return 4.0; };
    s.biharmonic = [](const Vec2&) { return 0.0; };
  } else if (id == "p1_quartic") {
    s.u = [](const Vec2& x) { return (std::pow(x.x(), 4) + std::pow(x.y(), 4)) / 12.0; };
    s.grad = [](const Vec2& x) {
      return Vec2(std::pow(x.x(), 3) / 3.0, std::pow(x.y(), 3) / 3.0);
    };
    s.hess = [](const Vec2& x) {
      Mat2 h = Mat2::Zero();
      h(0, 0) = x.x() * x.x();
      h(1, 1) = x.y() * x.y();
      return h;
    };
    s.laplacian = [](const Vec2& x) { return x.squaredNorm(); };
    s.biharmonic = [](const Vec2&) { return 4.0; };
  } else if (id == "p2_exponential") {
    auto E = [](const Vec2& x) { return std::exp(0.5 * x.squaredNorm()); };
    s.u = E;
    s.grad = [E](const Vec2& x) { return Vec2(x.x() * E(x), x.y() * E(x)); };
    s.hess = [E](const Vec2& x) {
      Mat2 h;
      const double e = E(x);
      h(0, 0) = (1 + x.x() * x.x()) * e;
      h(1, 1) = (1 + x.y() * x.y()) * e;
      h(0, 1) = h(1, 0) = x.x() * x.y() * e;
      return h;
    };
    s.laplacian = [E](const Vec2& x) { return (2 + x.squaredNorm()) * E(x); };
    s.biharmonic = [E](const Vec2& x) {
      const double r2 = x.squaredNorm();
      return (8 + 8 * r2 + r2 * r2) * E(x);
    };
  } else if (id == "p3_trig") {
    s.u = [](const Vec2& x) {
      return x.x() * std::sin(x.x()) + x.y() * std::sin(x.y());
    };
    s.grad = [](const Vec2& x) {
      return Vec2(std::sin(x.x()) + x.x() * std::cos(x.x()),
                  std::sin(x.y()) + x.y() * std::cos(x.y()));
    };
    s.hess = [](const Vec2& x) {
      Mat2 h = Mat2::Zero();
      h(0, 0) = 2 * std::cos(x.x()) - x.x() * std::sin(x.x());
      h(1, 1) = 2 * std::cos(x.y()) - x.y() * std::sin(x.y());
      return h;
    };
    s.laplacian = [&s](const Vec2& x) {
      return 2 * std::cos(x.x()) - x.x() * std::sin(x.x()) + 2 * std::cos(x.y()) -
             x.y() * std::sin(x.y());
    };
    s.biharmonic = [](const Vec2& x) {
      return x.x() * std::sin(x.x()) - 4 * std::cos(x.x()) + x.y() * std::sin(x.y()) -
             4 * std::cos(x.y());
    };
  } else {
    throw std::runtime_error("manufactured: unknown identifier '" + id + "'");
  }
  return s;
}

std::string canonical_id(const std::string& id)
{
  if (id == "p1") return "p1_quartic";
  if (id == "p2") return "p2_exponential";
  if (id == "p3") return "p3_trig";
  return id;
}

void self_consistency_gate(const ProblemData& p)
{
  const ManufacturedSolution& s = p.exact;
  for (const Vec2& x : sample_points(100)) {
    const double f_expected = -p.epsilon * s.biharmonic(x) + det2(s.hess(x));
    if (std::abs(p.f(x) - f_expected) > 1e-9 * std::max(1.0, std::abs(f_expected)))
      throw std::runtime_error("manufactured(" + s.id + "): forcing inconsistent with solution");
    if (std::abs(p.g(x) - s.u(x)) > 1e-9)
      throw std::runtime_error("manufactured(" + s.id + "): Dirichlet data inconsistent");
    if (std::abs(p.psi(x) - s.laplacian(x)) > 1e-9 * std::max(1.0, std::abs(s.laplacian(x))))
      throw std::runtime_error("manufactured(" + s.id + "): boundary Laplacian data inconsistent");
  }
}

} // namespace

ProblemData manufactured(const std::string& id, double epsilon)
{
  if (!(epsilon > 0.0)) throw std::runtime_error("manufactured: epsilon must be positive");
  ManufacturedSolution s = make_solution(canonical_id(id));
  const DerivativeReport rep = validate_derivatives(s);
  if (!rep.ok)
    throw std::runtime_error("manufactured(" + s.id + "): derivative validation failed: " + rep.failure);

  ProblemData p;
  p.epsilon = epsilon;
  p.exact = s;
  p.has_exact = true;
  p.f = [s, epsilon](const Vec2& x) { return -epsilon * s.biharmonic(x) + det2(s.hess(x)); };
  p.g = s.u;
  p.g_hess = s.hess;
  p.psi = s.laplacian;
  self_consistency_gate(p);
  return p;
}

ProblemData quadratic_limit_problem(double epsilon)
{
  if (!(epsilon > 0.0)) throw std::runtime_error("quadratic_limit_problem: epsilon must be positive");
  ProblemData p;
  p.epsilon = epsilon;
  p.exact = make_solution("quadratic");
  p.has_exact = true;
  p.f = [](const Vec2&) { return 4.0; };
  p.g = p.exact.u;
  p.g_hess = p.exact.hess;
  p.psi = [epsilon](const Vec2&) { return epsilon; };
  return p;
}

bool convex_on_mesh(const ManufacturedSolution& sol, const Mesh& mesh, int order)
{
  const int degree = std::max(3 * order, 2 * order + 2);
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const QuadratureRule rule = polygon_quadrature(mesh, k, degree);
    for (const Vec2& x : rule.points) {
      const Mat2 h = sol.hess(x);
      if (!(det2(h) > 0.0) || !(h.trace() > 0.0)) return false;
    }
  }
  return true;
}

} // namespace vem
