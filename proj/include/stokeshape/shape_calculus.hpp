#ifndef STOKESHAPE_SHAPE_CALCULUS_HPP
#define STOKESHAPE_SHAPE_CALCULUS_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "stokeshape/surface.hpp"

namespace stokeshape {

/// Volume and barycenter of the initial obstacle, the targets of the
/// equality constraints.
struct GeometricReference {
  double vol0;
  Vec2 bc0 = Vec2::Zero();
};

using ConstraintVector = Eigen::Vector3d;  // (bc_x - bc0_x, bc_y - bc0_y, vol - vol0)

struct AlParameters {
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
  double mu_pen = 100.0;
};

/// Obstacle area from the boundary integral (1/d)∮⟨s,n⟩ds with n pointing
/// out of the obstacle. Midpoint quadrature is exact: ⟨s,n⟩ is linear along
/// each straight edge.
inline double volume(const ObstacleLoop& loop) {
  double v = 0.0;
  for (int e = 0; e < loop.n_edges(); ++e)
    v += loop.lengths[e] * loop.edge_midpoint(e).dot(loop.normals[e]);
  return 0.5 * v;
}

/// Obstacle centroid from bc_i = (1/(2 vol))∮ s_i² n_i ds; two-point Gauss
/// integrates the quadratic integrand exactly on straight edges.
inline Vec2 barycenter(const ObstacleLoop& loop) {
  const double vol = volume(loop);
  if (!(vol > 0.0)) throw std::invalid_argument("barycenter: loop encloses no area");
  const double g = 0.5 / std::sqrt(3.0);
  Vec2 acc = Vec2::Zero();
  for (int e = 0; e < loop.n_edges(); ++e) {
    const Vec2 m = loop.edge_midpoint(e);
    const Vec2 d = loop.edge_end(e) - loop.edge_start(e);
    const Vec2 q0 = m - g * d;
    const Vec2 q1 = m + g * d;
    for (int c = 0; c < 2; ++c)
      acc[c] += 0.5 * loop.lengths[e] * (q0[c] * q0[c] + q1[c] * q1[c]) * loop.normals[e][c];
  }
  return acc / (2.0 * vol);
}

inline ConstraintVector constraints(const ObstacleLoop& loop, const GeometricReference& ref) {
  const double vol = volume(loop);
  const Vec2 bc = barycenter(loop);
  return {bc.x() - ref.bc0.x(), bc.y() - ref.bc0.y(), vol - ref.vol0};
}

/// Densities δ_i with dc_i[V] = ∫_Γ δ_i ⟨n,V⟩ ds: the barycenter components
/// scale position offsets by 1/vol, the volume density is the constant 1.
inline std::array<SurfaceDensity, 3> constraint_densities(const ObstacleLoop& loop, double vol,
                                                          const Vec2& bc) {
  if (!(vol > 0.0)) throw std::invalid_argument("constraint_densities: vol must be positive");
  std::array<SurfaceDensity, 3> d{SurfaceDensity(loop), SurfaceDensity(loop),
                                  SurfaceDensity(loop)};
  for (int e = 0; e < loop.n_edges(); ++e) {
    const Vec2 a = loop.edge_start(e);
    const Vec2 b = loop.edge_end(e);
    for (int c = 0; c < 2; ++c) d[c].edge_values[e] = {(a[c] - bc[c]) / vol, (b[c] - bc[c]) / vol};
    d[2].edge_values[e] = {1.0, 1.0};
  }
  return d;
}

inline double al_value(double J, const ConstraintVector& c, const AlParameters& p) {
  return J + p.lambda.dot(c) + 0.5 * p.mu_pen * c.squaredNorm();
}

/// Orientation of the dissipation term in the combined gradient density,
/// relative to normals pointing out of the obstacle. Growing the obstacle
/// shrinks the fluid domain and can only increase the dissipation (the
/// Stokes solution minimizes it among admissible fields), so the term
/// enters with +1. Pinned independently by the finite-difference tests.
inline constexpr double objective_density_orientation = +1.0;

/// Combined augmented-Lagrangian gradient density γ with
/// dL_A[V] = ∫_Γ γ ⟨V,n⟩ ds; the squared-constraint chain rule folds the
/// penalty into μ·c_i·δ_i.
inline SurfaceDensity al_density(const SurfaceDensity& objective,
                                 const std::array<SurfaceDensity, 3>& deltas,
                                 const ConstraintVector& c, const AlParameters& p) {
  const ObstacleLoop& loop = *objective.loop;
  SurfaceDensity g(loop);
  for (int e = 0; e < loop.n_edges(); ++e)
    for (int k = 0; k < 2; ++k) {
      double v = objective_density_orientation * objective.edge_values[e][k];
      for (int i = 0; i < 3; ++i)
        v += (p.lambda[i] + p.mu_pen * c[i]) * deltas[i].edge_values[e][k];
      g.edge_values[e][k] = v;
    }
  return g;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_SHAPE_CALCULUS_HPP
