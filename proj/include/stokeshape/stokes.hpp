#ifndef STOKESHAPE_STOKES_HPP
#define STOKESHAPE_STOKES_HPP

#include <cmath>
#include <memory>

#include "stokeshape/assembly.hpp"
#include "stokeshape/surface.hpp"

namespace stokeshape {

/// Velocity/pressure pair with the cached dissipation value. Spaces are
/// owned so the solution can outlive the assembly scaffolding (but not the
/// mesh it was computed on).
struct StokesSolution {
  std::shared_ptr<FunctionSpace> vel_space;  // P2 vector
  std::shared_ptr<FunctionSpace> pre_space;  // P1 scalar
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
  double dissipation = 0.0;
};

/// ∫ Σ_ij (∂v_i/∂x_j)² dx for a P2 vector field; the integrand is piecewise
/// quadratic, so the volume rule is exact.
inline double dissipation_of(const FunctionSpace& vel, const Eigen::VectorXd& coeffs) {
  const auto quad = triangle_rule(kVolumeQuadDegree);
  double J = 0.0;
  for (int t = 0; t < vel.mesh().n_triangles(); ++t) {
    const double detJ = vel.jacobian(t).determinant();
    for (const auto& q : quad) {
      const Eigen::Matrix2d g = field_gradient(vel, coeffs, t, q.x, q.y);
      J += q.w * detJ * g.squaredNorm();
    }
  }
  return J;
}

/// Area-weighted mean of a P1 scalar field.
inline double p1_mean(const FunctionSpace& pre, const Eigen::VectorXd& coeffs) {
  double num = 0.0, den = 0.0;
  const TriMesh& mesh = pre.mesh();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.signed_area(t);
    num += area / 3.0 * (coeffs[tri[0]] + coeffs[tri[1]] + coeffs[tri[2]]);
    den += area;
  }
  return num / den;
}

/// Solves the Stokes state equation with full velocity Dirichlet data:
/// v_inflow on inflow/outflow, no-slip on wall/obstacle. Pressure is shifted
/// to zero mean after the pinned-dof solve.
inline StokesSolution solve_stokes(const TriMesh& mesh,
                                   const std::function<Vec2(const Vec2&)>& v_inflow,
                                   const std::function<Vec2(const Vec2&)>& body_force = nullptr) {
  StokesSystem ss = assemble_stokes(mesh, v_inflow, body_force);
  const Eigen::VectorXd x = solve(ss.sys);

  StokesSolution sol;
  sol.vel_space = std::make_shared<FunctionSpace>(std::move(ss.vel_space));
  sol.pre_space = std::make_shared<FunctionSpace>(std::move(ss.pre_space));
  sol.velocity = x.head(ss.n_vel_dofs);
  sol.pressure = x.tail(x.size() - ss.n_vel_dofs);
  sol.pressure.array() -= p1_mean(*sol.pre_space, sol.pressure);
  sol.dissipation = dissipation_of(*sol.vel_space, sol.velocity);
  return sol;
}

/// Σ_i (∂v_i/∂n)² on each obstacle edge, evaluated from the P2 gradient in
/// the unique adjacent fluid triangle at the edge endpoints. Discontinuous
/// across edges by construction.
inline SurfaceDensity objective_density(const StokesSolution& sol, const ObstacleLoop& loop) {
  const FunctionSpace& vel = *sol.vel_space;
  const TriMesh& mesh = vel.mesh();
  SurfaceDensity d(loop);
  for (int e = 0; e < loop.n_edges(); ++e) {
    const int t = loop.adj_triangle[e];
    const auto& tri = mesh.triangles()[t];
    const Eigen::Matrix2d J = vel.jacobian(t);
    const Vec2 p0 = mesh.vertices()[tri[0]];
    const Vec2 n = loop.normals[e];
    const Vec2 ends[2] = {loop.edge_start(e), loop.edge_end(e)};
    for (int k = 0; k < 2; ++k) {
      const Vec2 ref = J.inverse() * (ends[k] - p0);
      const Eigen::Matrix2d g = field_gradient(vel, sol.velocity, t, ref.x(), ref.y());
      const Vec2 dn = g * n;  // row c of g is ∇v_c, so (g n)_c = ∂v_c/∂n
      d.edge_values[e][k] = dn.squaredNorm();
    }
  }
  return d;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_STOKES_HPP
