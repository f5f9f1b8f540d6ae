#ifndef STOKESHAPE_MESH_HPP
#define STOKESHAPE_MESH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stokeshape {

using Vec2 = Eigen::Vector2d;

enum class BoundaryMarker { Inflow, Outflow, Wall, Obstacle };

inline const char* to_string(BoundaryMarker m) {
  switch (m) {
    case BoundaryMarker::Inflow: return "inflow";
    case BoundaryMarker::Outflow: return "outflow";
    case BoundaryMarker::Wall: return "wall";
    case BoundaryMarker::Obstacle: return "obstacle";
  }
  return "?";
}

struct BoundaryEdge {
  int a = -1;
  int b = -1;
  BoundaryMarker marker = BoundaryMarker::Wall;
};

namespace detail {
inline std::pair<int, int> sorted_pair(int a, int b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}
}  // namespace detail

/// Signed area of the polygon (v0, v1, ..., vn-1) by the shoelace formula.
/// Positive for counterclockwise orientation.
inline double polygon_signed_area(const std::vector<Vec2>& pts) {
  double s = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % n];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * s;
}

/// Centroid of a simple polygon (orientation independent).
inline Vec2 polygon_centroid(const std::vector<Vec2>& pts) {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % n];
    const double cross = p.x() * q.y() - q.x() * p.y();
    a += cross;
    c += cross * (p + q);
  }
  if (std::abs(a) < 1e-300) throw std::runtime_error("polygon_centroid: degenerate polygon");
  return c / (3.0 * a);
}

/// Conforming triangle mesh of the flow domain. Immutable after construction:
/// the constructor normalizes triangle orientation to counterclockwise and
/// validates all structural invariants.
class TriMesh {
 public:
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
          std::vector<BoundaryEdge> boundary_edges)
      : vertices_(std::move(vertices)),
        triangles_(std::move(triangles)),
        boundary_edges_(std::move(boundary_edges)) {
    normalize_orientation();
    validate();
  }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }

  double signed_area(int t) const {
    const auto& tri = triangles_[t];
    const Vec2& p0 = vertices_[tri[0]];
    const Vec2& p1 = vertices_[tri[1]];
    const Vec2& p2 = vertices_[tri[2]];
    return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                  (p2.x() - p0.x()) * (p1.y() - p0.y()));
  }

  double total_area() const {
    double a = 0.0;
    for (int t = 0; t < n_triangles(); ++t) a += signed_area(t);
    return a;
  }

  /// Marker of each vertex if it lies on the boundary. When a vertex is
  /// shared by edges of different markers, Inflow/Outflow win over Wall,
  /// which wins over Obstacle.
  std::vector<std::optional<BoundaryMarker>> vertex_markers() const {
    auto rank = [](BoundaryMarker m) {
      switch (m) {
        case BoundaryMarker::Inflow: return 3;
        case BoundaryMarker::Outflow: return 3;
        case BoundaryMarker::Wall: return 2;
        case BoundaryMarker::Obstacle: return 1;
      }
      return 0;
    };
    std::vector<std::optional<BoundaryMarker>> out(vertices_.size());
    for (const auto& e : boundary_edges_) {
      for (int v : {e.a, e.b}) {
        if (!out[v] || rank(e.marker) > rank(*out[v])) out[v] = e.marker;
      }
    }
    return out;
  }

  /// Mesh vertex indices that lie on boundary edges with any of the given markers.
  std::vector<int> marked_vertices(std::initializer_list<BoundaryMarker> markers) const {
    std::vector<char> flag(vertices_.size(), 0);
    for (const auto& e : boundary_edges_)
      for (BoundaryMarker m : markers)
        if (e.marker == m) flag[e.a] = flag[e.b] = 1;
    std::vector<int> out;
    for (int v = 0; v < n_vertices(); ++v)
      if (flag[v]) out.push_back(v);
    return out;
  }

  /// Map from the sorted vertex pair of each triangle edge to the adjacent
  /// triangle indices (1 for boundary edges, 2 for interior ones).
  std::map<std::pair<int, int>, std::vector<int>> edge_triangles() const {
    std::map<std::pair<int, int>, std::vector<int>> adj;
    for (int t = 0; t < n_triangles(); ++t) {
      const auto& tri = triangles_[t];
      for (int k = 0; k < 3; ++k)
        adj[detail::sorted_pair(tri[k], tri[(k + 1) % 3])].push_back(t);
    }
    return adj;
  }

 private:
  void normalize_orientation() {
    for (std::size_t t = 0; t < triangles_.size(); ++t)
      if (signed_area(static_cast<int>(t)) < 0.0)
        std::swap(triangles_[t][1], triangles_[t][2]);
  }

  void validate() const {
    const int nv = n_vertices();
    for (const auto& tri : triangles_)
      for (int v : tri)
        if (v < 0 || v >= nv) throw std::runtime_error("TriMesh: vertex index out of range");
    for (int t = 0; t < n_triangles(); ++t)
      if (!(signed_area(t) > 0.0))
        throw std::runtime_error("TriMesh: zero or negative area element (triangle " +
                                 std::to_string(t) + ")");

    auto adj = edge_triangles();
    std::map<std::pair<int, int>, BoundaryMarker> marked;
    for (const auto& e : boundary_edges_) {
      if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv || e.a == e.b)
        throw std::runtime_error("TriMesh: invalid boundary edge");
      if (!marked.emplace(detail::sorted_pair(e.a, e.b), e.marker).second)
        throw std::runtime_error("TriMesh: duplicate boundary edge");
    }
    for (const auto& [edge, tris] : adj) {
      if (tris.size() > 2) throw std::runtime_error("TriMesh: non-conforming edge");
      const bool on_boundary = marked.count(edge) > 0;
      if (tris.size() == 1 && !on_boundary)
        throw std::runtime_error("TriMesh: unmarked boundary edge (" +
                                 std::to_string(edge.first) + "," +
                                 std::to_string(edge.second) + ")");
      if (tris.size() == 2 && on_boundary)
        throw std::runtime_error("TriMesh: interior edge carries boundary marker");
    }
    for (const auto& [edge, marker] : marked) {
      auto it = adj.find(edge);
      if (it == adj.end() || it->second.size() != 1)
        throw std::runtime_error("TriMesh: boundary edge not on mesh boundary");
    }
  }

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
};

/// Ordered traversal of the obstacle boundary. Vertices run clockwise around
/// the obstacle interior; edge i connects points[i] to points[(i+1) % n].
/// Normals are unit vectors orthogonal to their edge, pointing out of the
/// obstacle into the fluid.
struct ObstacleLoop {
  std::vector<int> vertex_ids;     // mesh vertex index per loop vertex (-1 if synthetic)
  std::vector<Vec2> points;        // loop vertex coordinates
  std::vector<Vec2> normals;       // per edge
  std::vector<double> lengths;     // per edge
  std::vector<int> adj_triangle;   // fluid triangle adjacent to each edge (-1 if synthetic)
  bool closed = true;

  int n_vertices() const { return static_cast<int>(points.size()); }
  int n_edges() const { return static_cast<int>(normals.size()); }

  double perimeter() const {
    double s = 0.0;
    for (double l : lengths) s += l;
    return s;
  }

  const Vec2& edge_start(int e) const { return points[e]; }
  const Vec2& edge_end(int e) const { return points[(e + 1) % points.size()]; }
  Vec2 edge_midpoint(int e) const { return 0.5 * (edge_start(e) + edge_end(e)); }

  /// Builds a loop directly from a simple polygon (used by tests and
  /// geometry oracles). Orientation is normalized to the clockwise
  /// convention; normals point away from the enclosed region.
  static ObstacleLoop from_polygon(std::vector<Vec2> pts) {
    if (pts.size() < 3) throw std::invalid_argument("from_polygon: need at least 3 points");
    if (polygon_signed_area(pts) > 0.0) std::reverse(pts.begin(), pts.end());
    ObstacleLoop loop;
    const int n = static_cast<int>(pts.size());
    loop.points = std::move(pts);
    loop.vertex_ids.assign(n, -1);
    loop.adj_triangle.assign(n, -1);
    loop.normals.resize(n);
    loop.lengths.resize(n);
    for (int e = 0; e < n; ++e) {
      const Vec2 d = loop.points[(e + 1) % n] - loop.points[e];
      const double len = d.norm();
      if (len <= 0.0) throw std::invalid_argument("from_polygon: zero-length edge");
      loop.lengths[e] = len;
      // left normal of a clockwise traversal points out of the enclosed region
      loop.normals[e] = Vec2(-d.y(), d.x()) / len;
    }
    return loop;
  }
};

namespace detail {

/// Chains the edges with the given marker into an ordered path. Throws on
/// branching vertices or, for `require_closed`, on open or multiple loops.
inline ObstacleLoop extract_chain(const TriMesh& mesh, BoundaryMarker marker,
                                  bool require_closed) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : mesh.boundary_edges())
    if (e.marker == marker) edges.push_back({e.a, e.b});
  if (edges.empty()) throw std::runtime_error("extract_chain: no edges with requested marker");

  std::map<int, std::vector<int>> at_vertex;  // vertex -> incident edge indices
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    at_vertex[edges[i].first].push_back(i);
    at_vertex[edges[i].second].push_back(i);
  }
  int start = -1;
  for (const auto& [v, inc] : at_vertex) {
    if (inc.size() > 2) throw std::runtime_error("extract_chain: branching boundary chain");
    if (inc.size() == 1 && start < 0) start = v;  // endpoint of an open chain
  }
  if (require_closed && start >= 0)
    throw std::runtime_error("obstacle_loop: obstacle boundary is an open chain");
  if (start < 0) start = at_vertex.begin()->first;

  std::vector<int> order{start};
  std::vector<char> used(edges.size(), 0);
  int current = start;
  for (;;) {
    int next_edge = -1;
    for (int i : at_vertex[current])
      if (!used[i]) { next_edge = i; break; }
    if (next_edge < 0) break;
    used[next_edge] = 1;
    current = edges[next_edge].first == current ? edges[next_edge].second
                                                : edges[next_edge].first;
    if (current == start) break;
    order.push_back(current);
  }
  if (std::count(used.begin(), used.end(), 1) != static_cast<int>(edges.size()))
    throw std::runtime_error("extract_chain: marker edges form multiple components");
  const bool closed = (current == start) && order.size() >= 3;
  if (require_closed && !closed)
    throw std::runtime_error("obstacle_loop: obstacle boundary not a closed loop");

  ObstacleLoop loop;
  loop.closed = closed;
  loop.vertex_ids = order;
  for (int v : order) loop.points.push_back(mesh.vertices()[v]);

  if (closed && polygon_signed_area(loop.points) > 0.0) {
    // normalize to clockwise around the obstacle interior
    std::reverse(loop.vertex_ids.begin(), loop.vertex_ids.end());
    std::rotate(loop.vertex_ids.begin(), loop.vertex_ids.end() - 1, loop.vertex_ids.end());
    loop.points.clear();
    for (int v : loop.vertex_ids) loop.points.push_back(mesh.vertices()[v]);
  }

  const int n_edges = closed ? loop.n_vertices() : loop.n_vertices() - 1;
  auto adj = mesh.edge_triangles();
  for (int e = 0; e < n_edges; ++e) {
    const int a = loop.vertex_ids[e];
    const int b = loop.vertex_ids[(e + 1) % loop.n_vertices()];
    const auto& tris = adj.at(sorted_pair(a, b));
    if (tris.size() != 1) throw std::runtime_error("extract_chain: marker edge not on boundary");
    const int t = tris[0];
    loop.adj_triangle.push_back(t);

    const Vec2 pa = mesh.vertices()[a];
    const Vec2 pb = mesh.vertices()[b];
    const Vec2 d = pb - pa;
    const double len = d.norm();
    Vec2 n(-d.y(), d.x());
    n /= len;
    // orient into the fluid, i.e. toward the adjacent triangle
    const auto& tri = mesh.triangles()[t];
    const Vec2 centroid =
        (mesh.vertices()[tri[0]] + mesh.vertices()[tri[1]] + mesh.vertices()[tri[2]]) / 3.0;
    if (n.dot(centroid - 0.5 * (pa + pb)) < 0.0) n = -n;
    loop.normals.push_back(n);
    loop.lengths.push_back(len);
  }

  if (closed) {
    // the clockwise convention must reproduce the fluid-side normals exactly
    for (int e = 0; e < n_edges; ++e) {
      const Vec2 d = loop.points[(e + 1) % loop.n_vertices()] - loop.points[e];
      const Vec2 left(-d.y(), d.x());
      if (left.dot(loop.normals[e]) < 0.0)
        throw std::runtime_error("obstacle_loop: inconsistent normal orientation");
    }
  }
  return loop;
}

}  // namespace detail

/// Extracts the obstacle boundary as an ordered closed loop with fluid-side
/// normals. Throws if the obstacle edges do not form one closed simple loop.
inline ObstacleLoop obstacle_loop(const TriMesh& mesh) {
  return detail::extract_chain(mesh, BoundaryMarker::Obstacle, true);
}

/// Ordered chain of edges with an arbitrary marker; open chains allowed.
/// Normals point into the fluid. Intended for fixtures and diagnostics.
inline ObstacleLoop marked_chain(const TriMesh& mesh, BoundaryMarker marker) {
  return detail::extract_chain(mesh, marker, false);
}

/// Per-element mesh quality: the 2-norm condition number of the linear map
/// taking the unit-side equilateral reference triangle to the physical
/// element. Equilateral elements score exactly 1; degenerate elements report
/// +infinity.
struct QualityReport {
  std::vector<double> per_element;
  double worst = 1.0;
};

inline double triangle_quality(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  // map from the equilateral reference triangle (0,0),(1,0),(1/2,sqrt(3)/2):
  // B = [p1-p0 | p2-p0] * R^{-1},  R = [[1, 1/2], [0, sqrt(3)/2]]
  const double sqrt3 = std::sqrt(3.0);
  const Eigen::Matrix2d R_inv = (Eigen::Matrix2d() << 1.0, -1.0 / sqrt3, 0.0, 2.0 / sqrt3).finished();
  Eigen::Matrix2d P;
  P.col(0) = p1 - p0;
  P.col(1) = p2 - p0;
  const Eigen::Matrix2d B = P * R_inv;
  const Eigen::Matrix2d G = B.transpose() * B;
  const double tr = G.trace();
  const double det = G.determinant();
  if (!(det > 0.0) || !std::isfinite(tr)) return std::numeric_limits<double>::infinity();
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  const double smax = 0.5 * (tr + disc);
  const double smin = 0.5 * (tr - disc);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(smax / smin);
}

inline QualityReport element_quality(const TriMesh& mesh) {
  QualityReport report;
  report.per_element.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    report.per_element[t] = triangle_quality(mesh.vertices()[tri[0]], mesh.vertices()[tri[1]],
                                             mesh.vertices()[tri[2]]);
    report.worst = std::max(report.worst, report.per_element[t]);
  }
  return report;
}

/// Result of moving mesh nodes by scale * displacement. An inverted or
/// degenerate element is a recoverable outcome (valid == false), not an
/// error: the optimizer reacts by shortening the step.
struct DeformResult {
  bool valid = false;
  std::optional<TriMesh> mesh;
  double worst_quality = std::numeric_limits<double>::infinity();
};

/// Moves every vertex by scale * displacement[v]. The displacement must
/// vanish on Inflow/Outflow/Wall vertices; only the obstacle boundary and
/// interior nodes may move.
inline DeformResult apply_displacement(const TriMesh& mesh, const std::vector<Vec2>& displacement,
                                       double scale) {
  if (displacement.size() != mesh.vertices().size())
    throw std::invalid_argument("apply_displacement: displacement size mismatch");
  double max_disp = 0.0;
  for (const auto& d : displacement) max_disp = std::max(max_disp, d.norm());
  for (int v : mesh.marked_vertices(
           {BoundaryMarker::Inflow, BoundaryMarker::Outflow, BoundaryMarker::Wall})) {
    if (displacement[v].norm() > 1e-12 * std::max(1.0, max_disp))
      throw std::invalid_argument("apply_displacement: displacement must vanish on outer boundary");
  }

  std::vector<Vec2> moved(mesh.vertices());
  for (std::size_t v = 0; v < moved.size(); ++v) moved[v] += scale * displacement[v];

  // cheap inversion scan before paying for full reconstruction
  DeformResult result;
  for (const auto& tri : mesh.triangles()) {
    const Vec2& p0 = moved[tri[0]];
    const Vec2& p1 = moved[tri[1]];
    const Vec2& p2 = moved[tri[2]];
    const double a2 = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    if (!(a2 > 0.0)) return result;
  }
  result.mesh.emplace(std::move(moved), mesh.triangles(), mesh.boundary_edges());
  result.worst_quality = element_quality(*result.mesh).worst;
  result.valid = true;
  return result;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_MESH_HPP
