#ifndef STOKESHAPE_ASSEMBLY_HPP
#define STOKESHAPE_ASSEMBLY_HPP

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "stokeshape/quadrature.hpp"
#include "stokeshape/space.hpp"
#include "stokeshape/sparse.hpp"

namespace stokeshape {

inline constexpr int kVolumeQuadDegree = 4;
inline constexpr int kEdgeQuadDegree = 3;

/// Monolithic Taylor-Hood system: P2 velocity dofs first (interleaved x/y),
/// then P1 pressure. Velocity is fully constrained on the boundary
/// (v_inflow on inflow/outflow, zero on wall/obstacle); the pressure
/// nullspace is removed by pinning one dof, to be shifted to zero mean
/// after the solve.
struct StokesSystem {
  FunctionSpace vel_space;   // P2, 2 components
  FunctionSpace pre_space;   // P1, 1 component
  SparseSystem sys;
  Eigen::VectorXd vel_bc;    // full-length velocity Dirichlet values (0 where free)
  std::vector<char> vel_fixed;
  int n_vel_dofs;
  int pinned_pressure_node;  // scalar node index in pre_space
};

inline StokesSystem assemble_stokes(
    const TriMesh& mesh, const std::function<Vec2(const Vec2&)>& v_inflow,
    const std::function<Vec2(const Vec2&)>& body_force = nullptr) {
  FunctionSpace vel(mesh, 2, 2);
  FunctionSpace pre(mesh, 1, 1);
  const int nv = vel.n_dofs();
  const int n = nv + pre.n_dofs();

  const auto quad = triangle_rule(kVolumeQuadDegree);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 200);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  int nodes[6];
  Vec2 gref[6];
  double bval[6];
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    vel.local_nodes(t, nodes);
    const auto& tri = mesh.triangles()[t];
    const Eigen::Matrix2d J = vel.jacobian(t);
    const double detJ = J.determinant();
    const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
    const Vec2 p0 = mesh.vertices()[tri[0]];

    double a_loc[6][6] = {};
    double b_loc[6][3][2] = {};  // velocity node i, pressure vertex j, component c
    Vec2 f_loc[6];  // Eigen vectors do not zero-initialize
    for (auto& f : f_loc) f.setZero();
    for (const auto& q : quad) {
      const int nb = vel.basis_grad(q.x, q.y, gref);
      Vec2 gphys[6];
      for (int i = 0; i < nb; ++i) gphys[i] = Jinv_t * gref[i];
      const double w = q.w * detJ;
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) a_loc[i][j] += w * gphys[i].dot(gphys[j]);
      const double lp[3] = {1.0 - q.x - q.y, q.x, q.y};  // P1 pressure basis
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < 3; ++j)
          for (int c = 0; c < 2; ++c) b_loc[i][j][c] += w * lp[j] * gphys[i][c];
      if (body_force) {
        vel.basis(q.x, q.y, bval);
        const Vec2 xq = p0 + J * Vec2(q.x, q.y);
        const Vec2 f = body_force(xq);
        for (int i = 0; i < nb; ++i) f_loc[i] += (w * bval[i]) * f;
      }
    }
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        if (a_loc[i][j] == 0.0) continue;
        for (int c = 0; c < 2; ++c)
          trips.emplace_back(vel.dof(nodes[i], c), vel.dof(nodes[j], c), a_loc[i][j]);
      }
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 2; ++c) {
          const int vd = vel.dof(nodes[i], c);
          const int pd = nv + tri[j];
          trips.emplace_back(vd, pd, b_loc[i][j][c]);
          trips.emplace_back(pd, vd, b_loc[i][j][c]);
        }
      if (body_force)
        for (int c = 0; c < 2; ++c) rhs[vel.dof(nodes[i], c)] += f_loc[i][c];
    }
  }

  // Dirichlet data: inflow/outflow take the given profile, wall and obstacle
  // are no-slip; at shared vertices the inflow/outflow marker dominates.
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
  std::vector<char> fixed(n, 0);
  const auto inout = boundary_scalar_nodes(vel, {BoundaryMarker::Inflow, BoundaryMarker::Outflow});
  for (int s : inout) {
    const Vec2 v = v_inflow(vel.node_position(s));
    for (int c = 0; c < 2; ++c) {
      values[vel.dof(s, c)] = v[c];
      fixed[vel.dof(s, c)] = 1;
    }
  }
  for (int s : boundary_scalar_nodes(vel, {BoundaryMarker::Wall, BoundaryMarker::Obstacle}))
    for (int c = 0; c < 2; ++c) fixed[vel.dof(s, c)] = 1;
  const int pinned = 0;  // first pressure node; value 0, shifted to zero mean later
  fixed[nv + pinned] = 1;

  eliminate_dirichlet(trips, rhs, fixed, values);

  StokesSystem out{std::move(vel), std::move(pre), SparseSystem{}, values.head(nv),
                   std::move(fixed), nv, pinned};
  out.sys.A.resize(n, n);
  out.sys.A.setFromTriplets(trips.begin(), trips.end());
  out.sys.b = std::move(rhs);
  out.sys.symmetric = true;
  return out;
}

/// Raw (no boundary conditions) operator as triplets, for reuse under
/// different eliminations.
struct RawOperator {
  int n = 0;
  std::vector<Eigen::Triplet<double>> trips;

  Eigen::SparseMatrix<double> matrix() const {
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
  }
};

/// Linear elasticity on P1 vector displacements:
/// a(U,V) = ∫ 2 μ ε(U):ε(V) + λ div U div V, with P1 nodal μ.
inline RawOperator assemble_elasticity(const TriMesh& mesh, const Eigen::VectorXd& mu_nodal,
                                       double lambda) {
  if (mu_nodal.size() != mesh.n_vertices())
    throw std::invalid_argument("assemble_elasticity: mu_nodal must be per-vertex");
  if (mu_nodal.minCoeff() <= 0.0)
    throw std::invalid_argument("assemble_elasticity: mu must be strictly positive");

  FunctionSpace disp(mesh, 1, 2);
  RawOperator out;
  out.n = disp.n_dofs();
  out.trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 36);

  const auto quad = triangle_rule(kVolumeQuadDegree);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Eigen::Matrix2d J = disp.jacobian(t);
    const double detJ = J.determinant();
    const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
    Vec2 g[3];  // constant P1 physical gradients
    g[0] = Jinv_t * Vec2(-1, -1);
    g[1] = Jinv_t * Vec2(1, 0);
    g[2] = Jinv_t * Vec2(0, 1);
    double mu_int = 0.0;  // ∫_T μ dx
    for (const auto& q : quad)
      mu_int += q.w * detJ *
                ((1.0 - q.x - q.y) * mu_nodal[tri[0]] + q.x * mu_nodal[tri[1]] +
                 q.y * mu_nodal[tri[2]]);
    const double lam_int = lambda * 0.5 * detJ;

    // ε(φ_i e_c) : ε(φ_j e_d) = 0.5 (g_i[d] g_j[c] + δ_{cd} g_i·g_j)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double gij = g[i].dot(g[j]);
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            const double eps2 = mu_int * (g[i][d] * g[j][c] + (c == d ? gij : 0.0));
            const double dv = lam_int * g[i][c] * g[j][d];
            const double v = eps2 + dv;
            if (v != 0.0) out.trips.emplace_back(disp.dof(tri[i], c), disp.dof(tri[j], d), v);
          }
      }
  }
  return out;
}

/// P1 scalar Laplace problem with one Dirichlet value per boundary marker.
inline SparseSystem assemble_poisson(const TriMesh& mesh,
                                     const std::map<BoundaryMarker, double>& dirichlet) {
  FunctionSpace sp(mesh, 1, 1);
  const int n = sp.n_dofs();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Eigen::Matrix2d J = sp.jacobian(t);
    const double area = 0.5 * J.determinant();
    const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
    Vec2 g[3];
    g[0] = Jinv_t * Vec2(-1, -1);
    g[1] = Jinv_t * Vec2(1, 0);
    g[2] = Jinv_t * Vec2(0, 1);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.emplace_back(tri[i], tri[j], area * g[i].dot(g[j]));
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
  std::vector<char> fixed(n, 0);
  const auto vmark = mesh.vertex_markers();
  for (int v = 0; v < n; ++v) {
    if (!vmark[v]) continue;
    auto it = dirichlet.find(*vmark[v]);
    if (it == dirichlet.end())
      throw std::invalid_argument("assemble_poisson: no Dirichlet value for marker " +
                                  std::string(to_string(*vmark[v])));
    values[v] = it->second;
    fixed[v] = 1;
  }
  eliminate_dirichlet(trips, rhs, fixed, values);

  SparseSystem sys;
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.b = std::move(rhs);
  sys.symmetric = true;
  return sys;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_ASSEMBLY_HPP
