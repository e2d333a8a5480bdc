#include "vem/dof_layout.hpp"

#include <stdexcept>

namespace vem {

DofLayout::DofLayout(const Mesh& mesh, int order) : mesh_(&mesh), order_(order)
{
  if (order < 2) throw std::runtime_error("DofLayout: unsupported order (require l >= 2)");
  const long nv = mesh.n_vertices();
  const long ne = mesh.n_edges();
  const long nk = mesh.n_elements();
  base_d2_ = nv;
  base_d3_ = base_d2_ + ne * edge_moments();
  base_d4_ = base_d3_ + ne * edge_moments();
  total_ = base_d4_ + nk * interior_moments();

  boundary_vertex_.assign(nv, 0);
  constrained_.assign(total_, 0);
  for (int e = 0; e < ne; ++e) {
    if (!mesh.edges[e].is_boundary) continue;
    boundary_vertex_[mesh.edges[e].endpoints[0]] = 1;
    boundary_vertex_[mesh.edges[e].endpoints[1]] = 1;
    for (int j = 0; j < edge_moments(); ++j) constrained_[edge_moment_dof(e, j)] = 1;
  }
  for (long v = 0; v < nv; ++v)
    if (boundary_vertex_[v]) constrained_[v] = 1;

  free_index_.assign(total_, -1);
  for (long i = 0; i < total_; ++i)
    if (!constrained_[i]) {
      free_index_[i] = n_free_++;
      free_list_.push_back(i);
    }
}

int DofLayout::local_count(int elem) const
{
  const int nv = static_cast<int>(mesh_->elements[elem].vertex_indices.size());
  return nv + 2 * nv * edge_moments() + interior_moments();
}

std::vector<DofLayout::LocalDof> DofLayout::local_dofs(int elem) const
{
  const Element& el = mesh_->elements[elem];
  const int nv = static_cast<int>(el.vertex_indices.size());
  std::vector<LocalDof> dofs;
  dofs.reserve(local_count(elem));
  for (int i = 0; i < nv; ++i)
    dofs.push_back({vertex_dof(el.vertex_indices[i]), 1.0, DofKind::VertexValue, i});
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < edge_moments(); ++j)
      dofs.push_back({edge_moment_dof(el.edge_indices[i], j), 1.0, DofKind::EdgeMoment, i});
  for (int i = 0; i < nv; ++i) {
    const double sign = mesh_->edge_orientation(elem, el.edge_indices[i]);
    for (int j = 0; j < edge_moments(); ++j)
      dofs.push_back({edge_normal_dof(el.edge_indices[i], j), sign, DofKind::EdgeNormalMoment, i});
  }
  for (int j = 0; j < interior_moments(); ++j)
    dofs.push_back({interior_dof(elem, j), 1.0, DofKind::InteriorMoment, -1});
  return dofs;
}

namespace {

Eigen::VectorXd edge_value_moments(const ScalarFn& u, const Mesh& mesh, int edge, int order)
{
  const EdgeQuadratureRule rule = edge_quadrature(mesh, edge, 2 * order + 2);
  const EdgeBasis basis(mesh.edges[edge].length, order - 2);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(order - 1);
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    m += rule.weights[q] * u(rule.points[q]) * basis.values(rule.s_hat[q]).transpose();
  return m / mesh.edges[edge].length;
}

Eigen::VectorXd edge_normal_moments(const GradFn& grad_u, const Mesh& mesh, int edge,
                                    const Vec2& normal, int order)
{
  const EdgeQuadratureRule rule = edge_quadrature(mesh, edge, 2 * order + 2);
  const EdgeBasis basis(mesh.edges[edge].length, order - 2);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(order - 1);
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    m += rule.weights[q] * grad_u(rule.points[q]).dot(normal) * basis.values(rule.s_hat[q]).transpose();
  return m;
}

Eigen::VectorXd interior_value_moments(const ScalarFn& u, const Mesh& mesh, int elem, int order)
{
  const Element& el = mesh.elements[elem];
  const QuadratureRule rule = polygon_quadrature(mesh, elem, 2 * order + 2);
  const MonomialBasis basis(el.centroid, el.diameter, order - 4);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(basis.dim());
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    m += rule.weights[q] * u(rule.points[q]) * basis.values(rule.points[q]).transpose();
  return m / el.area;
}

} // namespace

Eigen::VectorXd dof_evaluate(const ScalarFn& u, const GradFn& grad_u,
                             const Mesh& mesh, int elem, const DofLayout& layout)
{
  const Element& el = mesh.elements[elem];
  const int nv = static_cast<int>(el.vertex_indices.size());
  const int nm = layout.edge_moments();
  Eigen::VectorXd dofs(layout.local_count(elem));
  int pos = 0;
  for (int i = 0; i < nv; ++i) dofs[pos++] = u(mesh.vertices[el.vertex_indices[i]]);
  for (int i = 0; i < nv; ++i)
    dofs.segment(pos + i * nm, nm) = edge_value_moments(u, mesh, el.edge_indices[i], layout.order());
  pos += nv * nm;
  for (int i = 0; i < nv; ++i) {
    const int e = el.edge_indices[i];
    const Vec2 n_out = mesh.edge_orientation(elem, e) * mesh.edges[e].normal;
    dofs.segment(pos + i * nm, nm) = edge_normal_moments(grad_u, mesh, e, n_out, layout.order());
  }
  pos += nv * nm;
  if (layout.interior_moments() > 0)
    dofs.segment(pos, layout.interior_moments()) =
        interior_value_moments(u, mesh, elem, layout.order());
  return dofs;
}

Eigen::VectorXd interpolate(const ScalarFn& u, const GradFn& grad_u, const DofLayout& layout)
{
  const Mesh& mesh = layout.mesh();
  Eigen::VectorXd dofs(layout.total());
  for (int v = 0; v < mesh.n_vertices(); ++v) dofs[layout.vertex_dof(v)] = u(mesh.vertices[v]);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Eigen::VectorXd d2 = edge_value_moments(u, mesh, e, layout.order());
    const Eigen::VectorXd d3 = edge_normal_moments(grad_u, mesh, e, mesh.edges[e].normal, layout.order());
    for (int j = 0; j < layout.edge_moments(); ++j) {
      dofs[layout.edge_moment_dof(e, j)] = d2[j];
      dofs[layout.edge_normal_dof(e, j)] = d3[j];
    }
  }
  if (layout.interior_moments() > 0)
    for (int k = 0; k < mesh.n_elements(); ++k) {
      const Eigen::VectorXd d4 = interior_value_moments(u, mesh, k, layout.order());
      for (int j = 0; j < layout.interior_moments(); ++j) dofs[layout.interior_dof(k, j)] = d4[j];
    }
  return dofs;
}

Eigen::VectorXd dirichlet_values(const DofLayout& layout, const ScalarFn& g)
{
  const Mesh& mesh = layout.mesh();
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(layout.total());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (layout.vertex_on_boundary(v)) vals[layout.vertex_dof(v)] = g(mesh.vertices[v]);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (!mesh.edges[e].is_boundary) continue;
    const Eigen::VectorXd d2 = edge_value_moments(g, mesh, e, layout.order());
    for (int j = 0; j < layout.edge_moments(); ++j) vals[layout.edge_moment_dof(e, j)] = d2[j];
  }
  return vals;
}

Eigen::VectorXd expand_free(const DofLayout& layout, const Eigen::VectorXd& free_part,
                            const Eigen::VectorXd& lift)
{
  Eigen::VectorXd full = lift;
  const auto& free_list = layout.free_dofs();
  for (long i = 0; i < layout.n_free(); ++i) full[free_list[i]] += free_part[i];
  return full;
}

Eigen::VectorXd restrict_free(const DofLayout& layout, const Eigen::VectorXd& full)
{
  Eigen::VectorXd out(layout.n_free());
  const auto& free_list = layout.free_dofs();
  for (long i = 0; i < layout.n_free(); ++i) out[i] = full[free_list[i]];
  return out;
}

} // namespace vem
