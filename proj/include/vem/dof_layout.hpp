#ifndef VEM_DOF_LAYOUT_HPP
#define VEM_DOF_LAYOUT_HPP

#include <functional>

#include "vem/monomials.hpp"

namespace vem {

using ScalarFn = std::function<double(const Vec2&)>;
using GradFn = std::function<Vec2(const Vec2&)>;

enum class DofKind { VertexValue, EdgeMoment, EdgeNormalMoment, InteriorMoment };

/// Degrees of freedom of the order-l space, dof tuple (0,-1,l-2,l-2,l-4):
/// vertex values, l-1 edge moments and l-1 normal moments per edge, and
/// dim P_{l-4} interior moments per element. Global numbering is vertices,
/// then per-edge moments, then per-edge normal moments, then interior
/// moments; all deterministic.
///
/// Edge moments are taken in the canonical edge orientation. Normal-moment
/// dofs are stored with respect to the K+ normal; an element seeing the edge
/// as K- reads the shared dof with a -1 sign factor.
class DofLayout {
public:
  DofLayout(const Mesh& mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int edge_moments() const { return order_ - 1; }       // per edge, each family
  int interior_moments() const { return poly_dim(order_ - 4); }
  long total() const { return total_; }

  long vertex_dof(int v) const { return v; }
  long edge_moment_dof(int e, int j) const { return base_d2_ + static_cast<long>(e) * edge_moments() + j; }
  long edge_normal_dof(int e, int j) const { return base_d3_ + static_cast<long>(e) * edge_moments() + j; }
  long interior_dof(int k, int j) const { return base_d4_ + static_cast<long>(k) * interior_moments() + j; }

  int local_count(int elem) const;

  /// Global index and sign of every local dof of one element, local order:
  /// vertices, per-edge moments, per-edge normal moments, interior moments.
  struct LocalDof {
    long global;
    double sign;
    DofKind kind;
    int entity; // local edge / vertex index; -1 for interior
  };
  std::vector<LocalDof> local_dofs(int elem) const;

  bool is_constrained(long dof) const { return constrained_[dof]; }
  const std::vector<char>& constrained_mask() const { return constrained_; }
  long n_free() const { return n_free_; }
  /// Compressed index of a free dof, -1 for constrained ones.
  long free_index(long dof) const { return free_index_[dof]; }
  const std::vector<long>& free_dofs() const { return free_list_; }

  bool vertex_on_boundary(int v) const { return boundary_vertex_[v]; }

private:
  const Mesh* mesh_;
  int order_;
  long base_d2_, base_d3_, base_d4_, total_;
  std::vector<char> constrained_;
  std::vector<char> boundary_vertex_;
  std::vector<long> free_index_;
  std::vector<long> free_list_;
  long n_free_ = 0;
};

/// Element-local dof evaluation of a smooth function (normal moments use the
/// element's outward normal). Quadrature exactness >= 2l.
Eigen::VectorXd dof_evaluate(const ScalarFn& u, const GradFn& grad_u,
                             const Mesh& mesh, int elem, const DofLayout& layout);

/// Global dof interpolation (canonical edge orientation for shared dofs).
Eigen::VectorXd interpolate(const ScalarFn& u, const GradFn& grad_u, const DofLayout& layout);

/// Values of the Dirichlet-constrained dofs of g: vertex values and boundary
/// edge moments. Entries at free dofs are zero.
Eigen::VectorXd dirichlet_values(const DofLayout& layout, const ScalarFn& g);

/// Expand a free-dof vector into a full dof vector on top of the given lift.
Eigen::VectorXd expand_free(const DofLayout& layout, const Eigen::VectorXd& free_part,
                            const Eigen::VectorXd& lift);
/// Restrict a full dof vector to its free components.
Eigen::VectorXd restrict_free(const DofLayout& layout, const Eigen::VectorXd& full);

} // namespace vem

#endif
