#include "vem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vem {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Union-find with path halving.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i)
  {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b)
  {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b); // lowest index is the representative
    parent[b] = a;
  }
};

struct PolyGeometry {
  double area;
  Vec2 centroid;
  double diameter;
};

PolyGeometry polygon_geometry(const std::vector<Vec2>& pts, const std::vector<int>& poly)
{
  const int n = static_cast<int>(poly.size());
  double a2 = 0.0;
  Vec2 c = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec2& p = pts[poly[i]];
    const Vec2& q = pts[poly[(i + 1) % n]];
    const double w = cross2(p, q);
    a2 += w;
    c += w * (p + q);
  }
  PolyGeometry g;
  g.area = 0.5 * a2;
  g.centroid = c / (3.0 * a2);
  g.diameter = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      g.diameter = std::max(g.diameter, (pts[poly[i]] - pts[poly[j]]).norm());
  return g;
}

} // namespace

double polygon_signed_area(const std::vector<Vec2>& pts, const std::vector<int>& poly)
{
  double a2 = 0.0;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i)
    a2 += cross2(pts[poly[i]], pts[poly[(i + 1) % n]]);
  return 0.5 * a2;
}

bool element_is_convex(const Mesh& mesh, int elem, double tol)
{
  const auto& vi = mesh.elements[elem].vertex_indices;
  const int n = static_cast<int>(vi.size());
  const double scale = mesh.elements[elem].diameter * mesh.elements[elem].diameter;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = mesh.vertices[vi[(i + 1) % n]] - mesh.vertices[vi[i]];
    const Vec2 b = mesh.vertices[vi[(i + 2) % n]] - mesh.vertices[vi[(i + 1) % n]];
    if (cross2(a, b) < -tol * scale) return false;
  }
  return true;
}

Mesh build_from_polygons(const std::vector<Vec2>& points,
                         const std::vector<std::vector<int>>& cells,
                         double dedup_tol)
{
  const int np = static_cast<int>(points.size());

  // Merge near-duplicate points via a lexicographic sweep.
  std::vector<int> order(np);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (points[a].x() != points[b].x()) return points[a].x() < points[b].x();
    if (points[a].y() != points[b].y()) return points[a].y() < points[b].y();
    return a < b;
  });
  UnionFind uf(np);
  for (int i = 0; i < np; ++i) {
    for (int j = i + 1; j < np; ++j) {
      const Vec2& p = points[order[i]];
      const Vec2& q = points[order[j]];
      if (q.x() - p.x() > dedup_tol) break;
      if (std::abs(q.y() - p.y()) <= dedup_tol && (q - p).norm() <= dedup_tol)
        uf.unite(order[i], order[j]);
    }
  }

  Mesh mesh;
  std::vector<int> remap(np, -1);
  for (int i : order) { // representatives appear in deterministic order
    const int r = uf.find(i);
    if (remap[r] < 0) {
      remap[r] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(points[r]);
    }
  }
  for (int i = 0; i < np; ++i) remap[i] = remap[uf.find(i)];

  // Normalize cells: deduped indices, drop repeats, enforce CCW.
  for (const auto& cell : cells) {
    std::vector<int> poly;
    poly.reserve(cell.size());
    for (int raw : cell) {
      if (raw < 0 || raw >= np) throw std::runtime_error("build_from_polygons: vertex index out of range");
      const int v = remap[raw];
      if (poly.empty() || poly.back() != v) poly.push_back(v);
    }
    while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
    if (poly.size() < 3) throw std::runtime_error("build_from_polygons: degenerate cell (fewer than 3 distinct vertices)");
    if (polygon_signed_area(mesh.vertices, poly) < 0.0) std::reverse(poly.begin(), poly.end());
    if (polygon_signed_area(mesh.vertices, poly) <= 0.0)
      throw std::runtime_error("build_from_polygons: cell with non-positive area");

    Element el;
    el.vertex_indices = std::move(poly);
    const auto g = polygon_geometry(mesh.vertices, el.vertex_indices);
    el.area = g.area;
    el.centroid = g.centroid;
    el.diameter = g.diameter;
    mesh.elements.push_back(std::move(el));
  }

  // Edge identification; the first visitor fixes the canonical orientation.
  std::map<std::pair<int, int>, int> edge_of;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    auto& el = mesh.elements[k];
    const int n = static_cast<int>(el.vertex_indices.size());
    el.edge_indices.resize(n);
    for (int i = 0; i < n; ++i) {
      const int a = el.vertex_indices[i];
      const int b = el.vertex_indices[(i + 1) % n];
      const auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Edge e;
        e.endpoints = {a, b};
        e.adjacent = {k, -1};
        const int id = mesh.n_edges();
        edge_of.emplace(key, id);
        mesh.edges.push_back(e);
        el.edge_indices[i] = id;
      } else {
        Edge& e = mesh.edges[it->second];
        if (e.adjacent[1] != -1)
          throw std::runtime_error("build_from_polygons: edge shared by more than two elements");
        if (e.endpoints[0] != b || e.endpoints[1] != a)
          throw std::runtime_error("build_from_polygons: inconsistent edge traversal between neighbours");
        e.adjacent[1] = k;
        el.edge_indices[i] = it->second;
      }
    }
  }

  mesh.h_max = 0.0;
  for (const auto& el : mesh.elements) mesh.h_max = std::max(mesh.h_max, el.diameter);

  for (auto& e : mesh.edges) {
    const Vec2 p = mesh.vertices[e.endpoints[0]];
    const Vec2 q = mesh.vertices[e.endpoints[1]];
    e.length = (q - p).norm();
    if (e.length <= dedup_tol) throw std::runtime_error("build_from_polygons: zero-length edge");
    e.tangent = (q - p) / e.length;
    e.normal = Vec2(e.tangent.y(), -e.tangent.x()); // outward for a CCW K+
    e.is_boundary = (e.adjacent[1] < 0);
  }
  return mesh;
}

Mesh build_uniform_quad_mesh(int n)
{
  if (n < 1) throw std::runtime_error("build_uniform_quad_mesh: n must be >= 1");
  std::vector<Vec2> pts;
  pts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      pts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  return build_from_polygons(pts, cells, 0.0);
}

namespace {

// Clip a convex CCW polygon against the half-plane n.x <= c (Sutherland-Hodgman).
void clip_halfplane(std::vector<Vec2>& poly, const Vec2& n, double c, std::vector<Vec2>& scratch)
{
  scratch.clear();
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % m];
    const double sa = n.dot(a) - c;
    const double sb = n.dot(b) - c;
    if (sa <= 0.0) {
      scratch.push_back(a);
      if (sb > 0.0) scratch.push_back(a + (sa / (sa - sb)) * (b - a));
    } else if (sb <= 0.0) {
      scratch.push_back(a + (sa / (sa - sb)) * (b - a));
    }
  }
  poly.swap(scratch);
}

// Voronoi cell of seed s among all seeds, clipped to [0,1]^2. Candidates are
// examined nearest-first through a uniform grid; a bisector at distance d can
// only cut the cell while d <= 2 * max|corner - s|.
std::vector<Vec2> voronoi_cell(const std::vector<Vec2>& seeds, int self,
                               const std::vector<std::vector<int>>& bins, int nbin)
{
  const Vec2 s = seeds[self];
  std::vector<Vec2> poly = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Vec2> scratch;
  scratch.reserve(16);

  auto max_radius = [&]() {
    double r = 0.0;
    for (const Vec2& p : poly) r = std::max(r, (p - s).norm());
    return r;
  };
  double R = max_radius();

  const int bx = std::min(nbin - 1, static_cast<int>(s.x() * nbin));
  const int by = std::min(nbin - 1, static_cast<int>(s.y() * nbin));

  std::vector<std::pair<double, int>> ring; // (squared distance, seed index)
  for (int r = 0; r < 2 * nbin; ++r) {
    if (r >= 1 && static_cast<double>(r - 1) / nbin > 2.0 * R) break;
    ring.clear();
    for (int j = std::max(0, by - r); j <= std::min(nbin - 1, by + r); ++j) {
      for (int i = std::max(0, bx - r); i <= std::min(nbin - 1, bx + r); ++i) {
        if (std::max(std::abs(i - bx), std::abs(j - by)) != r) continue;
        for (int cand : bins[j * nbin + i]) {
          if (cand == self) continue;
          ring.emplace_back((seeds[cand] - s).squaredNorm(), cand);
        }
      }
    }
    std::sort(ring.begin(), ring.end());
    for (const auto& [d2, cand] : ring) {
      const double d = std::sqrt(d2);
      if (d > 2.0 * R) break; // R only shrinks: the rest of the ring is safe
      const Vec2 q = seeds[cand];
      const Vec2 dir = q - s;
      clip_halfplane(poly, dir, dir.dot(0.5 * (s + q)), scratch);
      if (poly.size() < 3) throw std::runtime_error("voronoi_cell: cell collapsed");
      R = max_radius();
    }
  }
  return poly;
}

std::vector<std::vector<Vec2>> voronoi_cells(const std::vector<Vec2>& seeds)
{
  const int n = static_cast<int>(seeds.size());
  const int nbin = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
  std::vector<std::vector<int>> bins(nbin * nbin);
  for (int i = 0; i < n; ++i) {
    const int bx = std::min(nbin - 1, static_cast<int>(seeds[i].x() * nbin));
    const int by = std::min(nbin - 1, static_cast<int>(seeds[i].y() * nbin));
    bins[by * nbin + bx].push_back(i);
  }
  std::vector<std::vector<Vec2>> cells(n);
  for (int i = 0; i < n; ++i) cells[i] = voronoi_cell(seeds, i, bins, nbin);
  return cells;
}

Vec2 cell_centroid(const std::vector<Vec2>& poly)
{
  double a2 = 0.0;
  Vec2 c = Vec2::Zero();
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const double w = cross2(poly[i], poly[(i + 1) % n]);
    a2 += w;
    c += w * (poly[i] + poly[(i + 1) % n]);
  }
  return c / (3.0 * a2);
}

} // namespace

Mesh build_voronoi_mesh_from_seeds(std::vector<Vec2> seeds, int lloyd_iterations)
{
  const int n = static_cast<int>(seeds.size());
  if (n < 1) throw std::runtime_error("build_voronoi_mesh: need at least one seed");

  // Coincident seeds break the bisector construction; perturb deterministically.
  std::mt19937_64 jitter(0x9e3779b97f4a7c15ull);
  for (int attempt = 0;; ++attempt) {
    bool degenerate = false;
    for (int i = 0; i < n && !degenerate; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((seeds[i] - seeds[j]).norm() < 1e-12) {
          degenerate = true;
          const double ax = (static_cast<double>(jitter() >> 11) * 0x1.0p-53 - 0.5) * 1e-9;
          const double ay = (static_cast<double>(jitter() >> 11) * 0x1.0p-53 - 0.5) * 1e-9;
          seeds[j] += Vec2(ax, ay);
          seeds[j].x() = std::clamp(seeds[j].x(), 0.0, 1.0);
          seeds[j].y() = std::clamp(seeds[j].y(), 0.0, 1.0);
          break;
        }
    if (!degenerate) break;
    if (attempt >= 16) throw std::runtime_error("build_voronoi_mesh: persistent coincident seeds");
  }

  for (int it = 0; it < lloyd_iterations; ++it) {
    const auto cells = voronoi_cells(seeds);
    double moved = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec2 c = cell_centroid(cells[i]);
      moved = std::max(moved, (c - seeds[i]).norm());
      seeds[i] = c;
    }
    if (moved < 1e-8) break;
  }

  const auto cells = voronoi_cells(seeds);
  std::vector<Vec2> points;
  std::vector<std::vector<int>> polys;
  polys.reserve(n);
  for (const auto& cell : cells) {
    std::vector<int> poly;
    poly.reserve(cell.size());
    for (const Vec2& p : cell) {
      poly.push_back(static_cast<int>(points.size()));
      points.push_back(p);
    }
    polys.push_back(std::move(poly));
  }
  return build_from_polygons(points, polys, 1e-12);
}

Mesh build_voronoi_mesh(int n_cells, std::uint64_t rng_seed, int lloyd_iterations)
{
  if (n_cells < 1) throw std::runtime_error("build_voronoi_mesh: n_cells must be >= 1");
  std::mt19937_64 rng(rng_seed);
  auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Vec2> seeds(n_cells);
  for (auto& s : seeds) {
    const double x = u01();
    const double y = u01();
    s = Vec2(x, y);
  }
  return build_voronoi_mesh_from_seeds(std::move(seeds), lloyd_iterations);
}

RegularityReport check_mesh_regularity(const Mesh& mesh, double rho_threshold)
{
  RegularityReport rep;
  rep.rho_min = 1.0;
  rep.star_radius_ratio = 1.0;
  rep.all_convex = true;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& el = mesh.elements[k];
    rep.max_edge_count = std::max(rep.max_edge_count, static_cast<int>(el.edge_indices.size()));
    rep.all_convex = rep.all_convex && element_is_convex(mesh, k);
    const int n = static_cast<int>(el.vertex_indices.size());
    for (int i = 0; i < n; ++i) {
      const Edge& e = mesh.edges[el.edge_indices[i]];
      rep.rho_min = std::min(rep.rho_min, e.length / el.diameter);
      // inward distance of the centroid from the edge line
      const Vec2 a = mesh.vertices[el.vertex_indices[i]];
      const Vec2 b = mesh.vertices[el.vertex_indices[(i + 1) % n]];
      const Vec2 t = (b - a).normalized();
      const double d = cross2(t, el.centroid - a); // positive inside a CCW polygon
      rep.star_radius_ratio = std::min(rep.star_radius_ratio, d / el.diameter);
    }
  }
  rep.star_shaped_ok = rep.all_convex && rep.star_radius_ratio > 0.0;
  rep.shape_regular_ok = rep.rho_min >= rho_threshold;
  return rep;
}

void save_mesh(const Mesh& mesh, const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mesh: cannot open " + path);
  out.precision(17);
  out << mesh.n_vertices() << ' ' << mesh.n_elements() << '\n';
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& el : mesh.elements) {
    out << el.vertex_indices.size();
    for (int v : el.vertex_indices) out << ' ' << v;
    out << '\n';
  }
}

Mesh load_mesh(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mesh: cannot open " + path);
  int nv = 0, ne = 0;
  if (!(in >> nv >> ne) || nv < 3 || ne < 1) throw std::runtime_error("load_mesh: bad header");
  std::vector<Vec2> pts(nv);
  for (auto& p : pts)
    if (!(in >> p.x() >> p.y())) throw std::runtime_error("load_mesh: bad vertex line");
  std::vector<std::vector<int>> cells(ne);
  for (auto& c : cells) {
    int k = 0;
    if (!(in >> k) || k < 3) throw std::runtime_error("load_mesh: bad element line");
    c.resize(k);
    for (int& v : c)
      if (!(in >> v)) throw std::runtime_error("load_mesh: bad element line");
  }
  return build_from_polygons(pts, cells, 1e-12);
}

} // namespace vem
