#include "vem/element_ops.hpp"

#include <stdexcept>

namespace vem {

namespace {

struct EdgeScratch {
  EdgeLocal info;
  int a0_local = 0, a1_local = 0;        // local vertices at the canonical endpoints
  EdgeQuadratureRule rule;               // canonical orientation
  Eigen::MatrixXd mono_vals;             // monomials (degree l) at edge points
  Eigen::MatrixXd edge_vals;             // edge basis (degree l) at edge points
  Eigen::MatrixXd edge_dvals;            // d/ds of edge basis at edge points
};

// Least squares of B c ~ rhsB subject to C c = rhsC via the null-space method.
Eigen::MatrixXd constrained_ls(const Eigen::MatrixXd& B, const Eigen::MatrixXd& rhsB,
                               const Eigen::MatrixXd& C, const Eigen::MatrixXd& rhsC)
{
  const auto n = B.cols();
  const auto m = C.rows();
  if (m == 0) return B.colPivHouseholderQr().solve(rhsB);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd y1 = R.transpose().triangularView<Eigen::Lower>().solve(rhsC);
  const Eigen::MatrixXd Q1 = Q.leftCols(m);
  const Eigen::MatrixXd Q2 = Q.rightCols(n - m);
  const Eigen::MatrixXd y2 =
      (B * Q2).colPivHouseholderQr().solve(rhsB - B * Q1 * y1);
  return Q1 * y1 + Q2 * y2;
}

void symmetrize(Eigen::MatrixXd& M) { M = (0.5 * (M + M.transpose())).eval(); }

} // namespace

Eigen::VectorXd gather_local(const DofLayout& layout, int elem, const Eigen::VectorXd& global)
{
  const auto dofs = layout.local_dofs(elem);
  Eigen::VectorXd local(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) local[i] = dofs[i].sign * global[dofs[i].global];
  return local;
}

ElementOperators build_element_operators(const Mesh& mesh, const DofLayout& layout, int elem,
                                         const ElementOpsOptions& opts)
{
  const Element& el = mesh.elements[elem];
  const int l = layout.order();
  const int nv = static_cast<int>(el.vertex_indices.size());
  const int nm = layout.edge_moments();       // l-1
  const int n0 = poly_dim(l);
  const int n1 = poly_dim(l - 1);
  const int n2 = poly_dim(l - 2);
  const int n3 = poly_dim(l - 3);
  const int n4 = poly_dim(l - 4);
  const int N = layout.local_count(elem);
  const int nb = nv + 2 * nv * nm;            // boundary dofs (D1, D2, D3)

  ElementOperators ops;
  ops.elem = elem;
  ops.order = l;
  ops.n_dof = N;
  ops.h = el.diameter;
  ops.area = el.area;
  ops.basis = MonomialBasis(el.centroid, el.diameter, l);

  // local dof offsets
  const int off_d2 = nv;
  const int off_d3 = nv + nv * nm;
  const int off_d4 = nv + 2 * nv * nm;

  const QuadratureRule vol = polygon_quadrature(mesh, elem, 2 * l);
  ops.G = ops.basis.gram(vol, l);

  const Eigen::MatrixXd Dx = ops.basis.derivative_x(); // n1 x n0
  const Eigen::MatrixXd Dy = ops.basis.derivative_y();

  std::vector<EdgeScratch> edges(nv);
  for (int i = 0; i < nv; ++i) {
    EdgeScratch& es = edges[i];
    const int e = el.edge_indices[i];
    es.info.edge = e;
    es.info.sigma = mesh.edge_orientation(elem, e);
    es.info.n_out = es.info.sigma * mesh.edges[e].normal;
    es.info.length = mesh.edges[e].length;
    es.a0_local = es.info.sigma > 0 ? i : (i + 1) % nv;
    es.a1_local = es.info.sigma > 0 ? (i + 1) % nv : i;
    es.rule = edge_quadrature(mesh, e, 2 * l);
    es.mono_vals = ops.basis.values_at(es.rule.points, l);
    const EdgeBasis eb(es.info.length, l);
    es.edge_vals = eb.values_at(es.rule.s_hat, l);
    es.edge_dvals = eb.deriv_values_at(es.rule.s_hat, l);
    ops.edges.push_back(es.info);
  }

  // --- dof evaluation matrix D ---
  ops.D.resize(N, n0);
  for (int i = 0; i < nv; ++i)
    ops.D.row(i) = ops.basis.values(mesh.vertices[el.vertex_indices[i]]);
  for (int i = 0; i < nv; ++i) {
    const EdgeScratch& es = edges[i];
    const Eigen::MatrixXd gx = es.mono_vals.leftCols(n1) * Dx; // grad values at edge pts
    const Eigen::MatrixXd gy = es.mono_vals.leftCols(n1) * Dy;
    const Eigen::MatrixXd gn = es.info.n_out.x() * gx + es.info.n_out.y() * gy;
    for (int j = 0; j < nm; ++j) {
      Eigen::RowVectorXd d2 = Eigen::RowVectorXd::Zero(n0);
      Eigen::RowVectorXd d3 = Eigen::RowVectorXd::Zero(n0);
      for (std::size_t q = 0; q < es.rule.points.size(); ++q) {
        const double wp = es.rule.weights[q] * es.edge_vals(q, j);
        d2 += wp * es.mono_vals.row(q);
        d3 += wp * gn.row(q);
      }
      ops.D.row(off_d2 + i * nm + j) = d2 / es.info.length;
      ops.D.row(off_d3 + i * nm + j) = d3;
    }
  }
  for (int j = 0; j < n4; ++j)
    ops.D.row(off_d4 + j) = ops.G.row(j) / el.area;

  // --- edge value projections E0 ---
  ops.E0.resize(nv);
  for (int i = 0; i < nv; ++i) {
    const EdgeScratch& es = edges[i];
    const EdgeBasis eb(es.info.length, l);
    Eigen::MatrixXd A(l + 1, l + 1);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(l + 1, N);
    A.row(0) = eb.values(-1.0);
    A.row(1) = eb.values(1.0);
    S(0, es.a0_local) = 1.0;
    S(1, es.a1_local) = 1.0;
    A.bottomRows(nm) = eb.gram(nm, l + 1);
    for (int j = 0; j < nm; ++j) S(2 + j, off_d2 + i * nm + j) = es.info.length;
    ops.E0[i] = A.partialPivLu().solve(S);
  }

  // --- value projection P0 (boundary-dof least squares, D4 hard constraints) ---
  {
    const Eigen::MatrixXd B = ops.D.topRows(nb);
    Eigen::MatrixXd Sb = Eigen::MatrixXd::Zero(nb, N);
    Sb.leftCols(nb).setIdentity();
    const Eigen::MatrixXd C = ops.G.topRows(n4);
    Eigen::MatrixXd Sc = Eigen::MatrixXd::Zero(n4, N);
    for (int j = 0; j < n4; ++j) Sc(j, off_d4 + j) = el.area;
    ops.P0 = constrained_ls(B, Sb, C, Sc);
  }

  // --- edge normal projections EN ---
  ops.EN.resize(nv);
  for (int i = 0; i < nv; ++i) {
    const EdgeScratch& es = edges[i];
    const EdgeBasis eb(es.info.length, l);
    const Eigen::MatrixXd Mc = eb.gram(nm, l); // moments of P_{l-1} against P_{l-2}
    Eigen::MatrixXd S3 = Eigen::MatrixXd::Zero(nm, N);
    for (int j = 0; j < nm; ++j) S3(j, off_d3 + i * nm + j) = 1.0;

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Mc.transpose());
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().topRows(nm).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd base =
        Q.leftCols(nm) * R.transpose().triangularView<Eigen::Lower>().solve(S3);
    if (opts.en_zero_completion) {
      ops.EN[i] = base;
      continue;
    }
    const Eigen::VectorXd z = Q.col(l - 1);
    // target: edge trace of grad(P0 v) . n_out at the quadrature points
    const Eigen::MatrixXd gx = es.mono_vals.leftCols(n1) * Dx * ops.P0;
    const Eigen::MatrixXd gy = es.mono_vals.leftCols(n1) * Dy * ops.P0;
    const Eigen::MatrixXd T = es.info.n_out.x() * gx + es.info.n_out.y() * gy;
    const Eigen::MatrixXd V = es.edge_vals.leftCols(l);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(es.rule.weights.data(),
                                                                es.rule.weights.size());
    const Eigen::VectorXd Bz = V * z;
    const double denom = (w.array() * Bz.array().square()).sum();
    const Eigen::RowVectorXd alpha =
        (Bz.array() * w.array()).matrix().transpose() * (T - V * base) / denom;
    ops.EN[i] = base + z * alpha;
  }

  // --- gradient projection P1 ---
  {
    const GramSolver g1(ops.G.topLeftCorner(n1, n1), elem);
    const MonomialBasis basis1(el.centroid, el.diameter, l - 1);
    const std::array<Eigen::MatrixXd, 2> D1 = {basis1.derivative_x(), basis1.derivative_y()};
    for (int r = 0; r < 2; ++r) {
      Eigen::MatrixXd rhs = -D1[r].transpose() * ops.G.block(0, 0, n2, n0) * ops.P0;
      for (int i = 0; i < nv; ++i) {
        const EdgeScratch& es = edges[i];
        const Eigen::MatrixXd vals = es.edge_vals * ops.E0[i]; // P0^e v at edge pts
        Eigen::MatrixXd wvals = vals;
        for (std::size_t q = 0; q < es.rule.weights.size(); ++q)
          wvals.row(q) *= es.rule.weights[q];
        rhs += es.info.n_out[r] * es.mono_vals.leftCols(n1).transpose() * wvals;
      }
      ops.P1[r] = g1.solve(rhs);
    }
  }

  // --- Hessian projection P2 ---
  {
    const GramSolver g2(ops.G.topLeftCorner(n2, n2), elem);
    const MonomialBasis basis2(el.centroid, el.diameter, l - 2);
    const std::array<Eigen::MatrixXd, 2> D2m = {basis2.derivative_x(), basis2.derivative_y()};
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n2, N);
        if (n3 > 0)
          rhs = -D2m[s].transpose() * ops.G.block(0, 0, n3, n1) * ops.P1[r];
        for (int i = 0; i < nv; ++i) {
          const EdgeScratch& es = edges[i];
          const Edge& e = mesh.edges[es.info.edge];
          // normal part pairs the P_{l-2} edge trace with the D3 moments
          // directly; it never reads the completed coefficient of EN.
          const Eigen::MatrixXd tau = monomial_edge_trace(mesh, elem, es.info.edge, l - 2);
          Eigen::MatrixXd S3 = Eigen::MatrixXd::Zero(nm, N);
          for (int j = 0; j < nm; ++j) S3(j, off_d3 + i * nm + j) = 1.0;
          rhs += es.info.n_out[r] * es.info.n_out[s] * tau * S3;
          // tangential part: sigma t_r n_s d/ds (P0^e v) in canonical terms
          const Eigen::MatrixXd dvals = es.edge_dvals * ops.E0[i];
          Eigen::MatrixXd wdvals = dvals;
          for (std::size_t q = 0; q < es.rule.weights.size(); ++q)
            wdvals.row(q) *= es.rule.weights[q];
          rhs += es.info.sigma * e.tangent[r] * e.normal[s] *
                 es.mono_vals.leftCols(n2).transpose() * wdvals;
        }
        ops.P2[2 * r + s] = g2.solve(rhs);
      }
    }
    ops.K2 = Eigen::MatrixXd::Zero(N, N);
    const Eigen::MatrixXd G2 = ops.G.topLeftCorner(n2, n2);
    for (int c = 0; c < 4; ++c) ops.K2 += ops.P2[c].transpose() * G2 * ops.P2[c];
    symmetrize(ops.K2);
  }

  {
    const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(N, N) - ops.D * ops.P0;
    ops.Mstab = R.transpose() * R;
    symmetrize(ops.Mstab);
  }

  const QuadratureRule asm_rule = polygon_quadrature(mesh, elem, std::max(3 * l, 2 * l + 2));
  ops.asm_pts = asm_rule.points;
  ops.asm_w = asm_rule.weights;
  return ops;
}

std::vector<ElementOperators> build_all_element_operators(const Mesh& mesh, const DofLayout& layout,
                                                          const ElementOpsOptions& opts, Exec exec)
{
  std::vector<ElementOperators> all(mesh.n_elements());
  parallel_for(mesh.n_elements(), exec,
               [&](std::ptrdiff_t k) { all[k] = build_element_operators(mesh, layout, static_cast<int>(k), opts); });
  return all;
}

Eigen::MatrixXd compute_edge_value_projection(const Mesh& mesh, const DofLayout& layout, int elem,
                                              int local_edge)
{
  const auto ops = build_element_operators(mesh, layout, elem);
  return ops.E0.at(local_edge);
}

Eigen::MatrixXd compute_edge_normal_projection(const Mesh& mesh, const DofLayout& layout, int elem,
                                               int local_edge)
{
  const auto ops = build_element_operators(mesh, layout, elem);
  return ops.EN.at(local_edge);
}

} // namespace vem
