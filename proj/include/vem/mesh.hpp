#ifndef VEM_MESH_HPP
#define VEM_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace vem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Element {
  std::vector<int> vertex_indices; // CCW
  std::vector<int> edge_indices;   // edge_indices[i] joins vertex i and i+1 (mod n)
  Vec2 centroid;                   // area centroid
  double diameter = 0.0;           // max pairwise vertex distance
  double area = 0.0;
};

struct Edge {
  std::array<int, 2> endpoints{-1, -1};  // canonical orientation (traversal of K+)
  double length = 0.0;
  Vec2 tangent;                          // (p1 - p0) / length
  Vec2 normal;                           // unit, outward w.r.t. K+
  std::array<int, 2> adjacent{-1, -1};   // [K+, K-]; K- = -1 on the boundary
  bool is_boundary = false;
};

/// Immutable after construction; safe to share across threads.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<Element> elements;
  std::vector<Edge> edges;
  double h_max = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  /// +1 if element k traverses edge e in its canonical orientation (k is K+),
  /// -1 otherwise.
  double edge_orientation(int elem, int edge) const
  {
    return edges[edge].adjacent[0] == elem ? 1.0 : -1.0;
  }
};

struct RegularityReport {
  double rho_min = 0.0;          // min over (K, e in dK) of h_e / h_K
  int max_edge_count = 0;
  double star_radius_ratio = 0.0; // min over K of inradius(centroid) / h_K
  bool star_shaped_ok = false;
  bool all_convex = false;
  bool shape_regular_ok = false;  // rho_min >= threshold
};

/// Assemble a mesh from a point cloud and CCW cell index lists. Vertices
/// closer than dedup_tol are merged (first occurrence in lexicographic order
/// wins). Cell orientation is normalized to CCW.
Mesh build_from_polygons(const std::vector<Vec2>& points,
                         const std::vector<std::vector<int>>& cells,
                         double dedup_tol = 1e-12);

/// n x n axis-aligned squares tiling [0,1]^2. h_max = sqrt(2)/n.
Mesh build_uniform_quad_mesh(int n);

/// Voronoi diagram of the given seeds clipped to [0,1]^2, relaxed by Lloyd
/// (centroid) iterations. Coincident seeds are perturbed deterministically; if
/// the degeneracy persists an exception is thrown.
Mesh build_voronoi_mesh_from_seeds(std::vector<Vec2> seeds, int lloyd_iterations);

/// Same, with seeds drawn uniformly from a deterministic generator.
Mesh build_voronoi_mesh(int n_cells, std::uint64_t rng_seed, int lloyd_iterations = 100);

RegularityReport check_mesh_regularity(const Mesh& mesh, double rho_threshold = 0.1);

/// Plain text format: first line "NV NE", then NV lines "x y", then NE lines
/// "k i1 ... ik" (0-based, CCW).
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

/// Signed area of a CCW polygon given by point indices.
double polygon_signed_area(const std::vector<Vec2>& pts, const std::vector<int>& poly);

/// Uniform non-negativity of the cross products of consecutive edge vectors.
bool element_is_convex(const Mesh& mesh, int elem, double tol = 1e-13);

} // namespace vem

#endif
