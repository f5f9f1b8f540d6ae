#ifndef STOKESHAPE_SPACE_HPP
#define STOKESHAPE_SPACE_HPP

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "stokeshape/mesh.hpp"

namespace stokeshape {

/// Scalar Lagrange space (P1 or P2) with 1 or 2 components. Scalar nodes are
/// the mesh vertices, followed (for P2) by edge midpoints in sorted-edge
/// order; components interleave, so dof(node, comp) = node*components + comp.
class FunctionSpace {
 public:
  FunctionSpace(const TriMesh& mesh, int degree, int components)
      : mesh_(&mesh), degree_(degree), components_(components) {
    if (degree != 1 && degree != 2) throw std::invalid_argument("FunctionSpace: degree must be 1 or 2");
    if (components != 1 && components != 2)
      throw std::invalid_argument("FunctionSpace: components must be 1 or 2");
    if (degree == 2) {
      std::map<std::pair<int, int>, int> index;
      for (const auto& t : mesh.triangles())
        for (int e = 0; e < 3; ++e) index.emplace(std::minmax(t[e], t[(e + 1) % 3]), 0);
      edges_.reserve(index.size());
      for (auto& [key, id] : index) {
        id = static_cast<int>(edges_.size());
        edges_.push_back({key.first, key.second});
      }
      edge_index_ = std::move(index);
    }
    n_scalar_ = mesh.n_vertices() + static_cast<int>(edges_.size());
  }

  const TriMesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  int n_scalar_nodes() const { return n_scalar_; }
  int n_dofs() const { return n_scalar_ * components_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  int dof(int scalar_node, int comp = 0) const { return scalar_node * components_ + comp; }

  int edge_node(int va, int vb) const {
    auto it = edge_index_.find(std::minmax(va, vb));
    if (it == edge_index_.end()) throw std::logic_error("FunctionSpace: unknown edge");
    return mesh_->n_vertices() + it->second;
  }

  /// Scalar nodes of a triangle in local order: 3 vertices, then (P2) the
  /// midpoints of edges (v0,v1), (v1,v2), (v2,v0).
  int local_nodes(int tri, int out[6]) const {
    const auto& t = mesh_->triangles()[tri];
    out[0] = t[0];
    out[1] = t[1];
    out[2] = t[2];
    if (degree_ == 1) return 3;
    out[3] = edge_node(t[0], t[1]);
    out[4] = edge_node(t[1], t[2]);
    out[5] = edge_node(t[2], t[0]);
    return 6;
  }

  /// Coordinates carried by a scalar node (vertex or edge midpoint).
  Vec2 node_position(int scalar_node) const {
    if (scalar_node < mesh_->n_vertices()) return mesh_->vertices()[scalar_node];
    const auto& e = edges_[scalar_node - mesh_->n_vertices()];
    return 0.5 * (mesh_->vertices()[e[0]] + mesh_->vertices()[e[1]]);
  }

  /// Basis values at a reference point (x, y), barycentric λ = (1-x-y, x, y).
  int basis(double x, double y, double out[6]) const {
    const double l0 = 1.0 - x - y, l1 = x, l2 = y;
    if (degree_ == 1) {
      out[0] = l0;
      out[1] = l1;
      out[2] = l2;
      return 3;
    }
    out[0] = l0 * (2 * l0 - 1);
    out[1] = l1 * (2 * l1 - 1);
    out[2] = l2 * (2 * l2 - 1);
    out[3] = 4 * l0 * l1;
    out[4] = 4 * l1 * l2;
    out[5] = 4 * l2 * l0;
    return 6;
  }

  /// Reference-coordinate gradients at (x, y); out[i] = (∂N_i/∂x, ∂N_i/∂y).
  int basis_grad(double x, double y, Vec2 out[6]) const {
    if (degree_ == 1) {
      out[0] = {-1, -1};
      out[1] = {1, 0};
      out[2] = {0, 1};
      return 3;
    }
    const double l0 = 1.0 - x - y, l1 = x, l2 = y;
    const Vec2 g0{-1, -1}, g1{1, 0}, g2{0, 1};
    out[0] = (4 * l0 - 1) * g0;
    out[1] = (4 * l1 - 1) * g1;
    out[2] = (4 * l2 - 1) * g2;
    out[3] = 4 * (l1 * g0 + l0 * g1);
    out[4] = 4 * (l2 * g1 + l1 * g2);
    out[5] = 4 * (l0 * g2 + l2 * g0);
    return 6;
  }

  /// Affine map Jacobian of a triangle: columns (p1-p0, p2-p0).
  Eigen::Matrix2d jacobian(int tri) const {
    const auto& t = mesh_->triangles()[tri];
    const auto& v = mesh_->vertices();
    Eigen::Matrix2d J;
    J.col(0) = v[t[1]] - v[t[0]];
    J.col(1) = v[t[2]] - v[t[0]];
    return J;
  }

 private:
  const TriMesh* mesh_;
  int degree_;
  int components_;
  int n_scalar_;
  std::vector<std::array<int, 2>> edges_;
  std::map<std::pair<int, int>, int> edge_index_;
};

/// Coefficient vector tied to a space.
struct Field {
  const FunctionSpace* space;
  Eigen::VectorXd coeffs;

  Field(const FunctionSpace& s, Eigen::VectorXd c) : space(&s), coeffs(std::move(c)) {
    if (coeffs.size() != space->n_dofs())
      throw std::invalid_argument("Field: coefficient length does not match space");
  }
};

/// Nodal interpolation of a function; f returns one value per component.
inline Eigen::VectorXd interpolate(const FunctionSpace& space,
                                   const std::function<Eigen::Vector2d(const Vec2&)>& f) {
  Eigen::VectorXd out(space.n_dofs());
  for (int s = 0; s < space.n_scalar_nodes(); ++s) {
    const Eigen::Vector2d v = f(space.node_position(s));
    for (int c = 0; c < space.components(); ++c) out[space.dof(s, c)] = v[c];
  }
  return out;
}

inline Eigen::VectorXd interpolate_scalar(const FunctionSpace& space,
                                          const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd out(space.n_dofs());
  for (int s = 0; s < space.n_scalar_nodes(); ++s) out[space.dof(s, 0)] = f(space.node_position(s));
  return out;
}

/// Physical gradient of all components of a coefficient field at a reference
/// point inside a triangle. Row c holds ∇(component c).
inline Eigen::Matrix2d field_gradient(const FunctionSpace& space, const Eigen::VectorXd& coeffs,
                                      int tri, double xref, double yref) {
  Vec2 gref[6];
  const int nb = space.basis_grad(xref, yref, gref);
  int nodes[6];
  space.local_nodes(tri, nodes);
  const Eigen::Matrix2d Jinv_t = space.jacobian(tri).inverse().transpose();
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int i = 0; i < nb; ++i) {
    const Vec2 gphys = Jinv_t * gref[i];
    for (int c = 0; c < space.components(); ++c)
      g.row(c) += coeffs[space.dof(nodes[i], c)] * gphys.transpose();
  }
  return g;
}

/// Scalar nodes lying on boundary edges with the given markers. For vertices
/// shared between markers the mesh-wide dominance rule (vertex_markers)
/// decides membership; P2 midpoint nodes inherit their edge's marker.
inline std::vector<int> boundary_scalar_nodes(const FunctionSpace& space,
                                              std::initializer_list<BoundaryMarker> markers) {
  const TriMesh& mesh = space.mesh();
  const auto vmark = mesh.vertex_markers();
  std::vector<char> want(4, 0);
  for (BoundaryMarker m : markers) want[static_cast<int>(m)] = 1;
  std::vector<char> seen(space.n_scalar_nodes(), 0);
  std::vector<int> out;
  for (const auto& e : mesh.boundary_edges()) {
    for (int v : {e.a, e.b})
      if (vmark[v] && want[static_cast<int>(*vmark[v])] && !seen[v]) {
        seen[v] = 1;
        out.push_back(v);
      }
    if (space.degree() == 2 && want[static_cast<int>(e.marker)]) {
      const int n = space.edge_node(e.a, e.b);
      if (!seen[n]) {
        seen[n] = 1;
        out.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_SPACE_HPP
