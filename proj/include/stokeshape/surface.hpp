#ifndef STOKESHAPE_SURFACE_HPP
#define STOKESHAPE_SURFACE_HPP

#include <cmath>
#include <vector>

#include "stokeshape/mesh.hpp"
#include "stokeshape/sparse.hpp"

namespace stokeshape {

/// Piecewise-linear density on the obstacle loop, discontinuous across
/// edges: two endpoint values per edge, in loop edge order.
struct SurfaceDensity {
  const ObstacleLoop* loop;
  std::vector<std::array<double, 2>> edge_values;

  explicit SurfaceDensity(const ObstacleLoop& l)
      : loop(&l), edge_values(static_cast<std::size_t>(l.n_edges()), {0.0, 0.0}) {}

  SurfaceDensity(const ObstacleLoop& l, std::vector<std::array<double, 2>> values)
      : loop(&l), edge_values(std::move(values)) {
    if (static_cast<int>(edge_values.size()) != l.n_edges())
      throw std::invalid_argument("SurfaceDensity: value count must be 2 per edge");
  }

  static SurfaceDensity constant(const ObstacleLoop& l, double c) {
    SurfaceDensity d(l);
    for (auto& e : d.edge_values) e = {c, c};
    return d;
  }
};

/// 1D mass matrix over the loop vertices (periodic for closed loops).
inline Eigen::SparseMatrix<double> loop_mass(const ObstacleLoop& loop) {
  const int n = loop.n_vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(loop.n_edges()) * 4);
  for (int e = 0; e < loop.n_edges(); ++e) {
    const int a = e;
    const int b = (e + 1) % n;
    const double L = loop.lengths[e];
    trips.emplace_back(a, a, L / 3.0);
    trips.emplace_back(b, b, L / 3.0);
    trips.emplace_back(a, b, L / 6.0);
    trips.emplace_back(b, a, L / 6.0);
  }
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

/// 1D stiffness matrix (tangential Laplacian) over the loop vertices.
inline Eigen::SparseMatrix<double> loop_stiffness(const ObstacleLoop& loop) {
  const int n = loop.n_vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(loop.n_edges()) * 4);
  for (int e = 0; e < loop.n_edges(); ++e) {
    const int a = e;
    const int b = (e + 1) % n;
    const double w = 1.0 / loop.lengths[e];
    trips.emplace_back(a, a, w);
    trips.emplace_back(b, b, w);
    trips.emplace_back(a, b, -w);
    trips.emplace_back(b, a, -w);
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

/// Load vector ∫_Γ γ φ_i ds against the continuous P1 hat functions.
inline Eigen::VectorXd surface_load(const SurfaceDensity& d) {
  const ObstacleLoop& loop = *d.loop;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(loop.n_vertices());
  for (int e = 0; e < loop.n_edges(); ++e) {
    const double L = loop.lengths[e];
    const auto [g0, g1] = std::pair{d.edge_values[e][0], d.edge_values[e][1]};
    b[e] += L * (g0 / 3.0 + g1 / 6.0);
    b[(e + 1) % loop.n_vertices()] += L * (g0 / 6.0 + g1 / 3.0);
  }
  return b;
}

/// L² projection of a discontinuous edge density onto continuous P1 on Γ.
inline Eigen::VectorXd l2_project(const SurfaceDensity& d) {
  return SparseFactor(loop_mass(*d.loop)).solve(surface_load(d));
}

/// System (M + A·K) α = ∫ γ φ ds for the surface Helmholtz operator
/// (id − A Δ_Γ) on the closed curve.
inline SparseSystem assemble_surface_helmholtz(const ObstacleLoop& loop, double A,
                                               const SurfaceDensity& rhs_density) {
  if (!(A > 0.0)) throw std::invalid_argument("assemble_surface_helmholtz: A must be positive");
  SparseSystem sys;
  sys.A = loop_mass(loop) + A * loop_stiffness(loop);
  sys.b = surface_load(rhs_density);
  sys.symmetric = true;
  return sys;
}

/// Unit vertex normals: average of the two adjacent edge normals,
/// renormalized (exact for regular polygons).
inline std::vector<Vec2> vertex_normals(const ObstacleLoop& loop) {
  const int n = loop.n_vertices();
  std::vector<Vec2> out(n);
  for (int v = 0; v < n; ++v) {
    const Vec2 prev = loop.normals[(v + n - 1) % n];
    const Vec2 next = loop.normals[v];  // edge v starts at vertex v
    Vec2 m = prev + next;
    const double len = m.norm();
    if (len < 1e-14)
      throw std::runtime_error("vertex_normals: adjacent edges fold back on themselves");
    out[v] = m / len;
  }
  return out;
}

/// ∫_Γ γ β ds for nodal (continuous P1) β — exact per-edge integration.
inline double density_pairing(const SurfaceDensity& d, const Eigen::VectorXd& beta) {
  if (beta.size() != d.loop->n_vertices())
    throw std::invalid_argument("density_pairing: nodal vector has wrong length");
  return surface_load(d).dot(beta);
}

/// sqrt(∫_Γ γ² ds) of an edge density.
inline double density_l2_norm(const SurfaceDensity& d) {
  double s = 0.0;
  for (int e = 0; e < d.loop->n_edges(); ++e) {
    const double g0 = d.edge_values[e][0], g1 = d.edge_values[e][1];
    s += d.loop->lengths[e] * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0;
  }
  return std::sqrt(s);
}

/// sqrt(∫_Γ |u|² ds) of a continuous P1 field on the loop (1 or 2 values per
/// vertex packed as rows of a matrix with n_vertices rows).
inline double loop_l2_norm(const ObstacleLoop& loop, const Eigen::MatrixXd& nodal) {
  if (nodal.rows() != loop.n_vertices())
    throw std::invalid_argument("loop_l2_norm: nodal rows must match loop vertices");
  double s = 0.0;
  for (int e = 0; e < loop.n_edges(); ++e) {
    const int a = e, b = (e + 1) % loop.n_vertices();
    const double L = loop.lengths[e];
    s += L / 3.0 *
         (nodal.row(a).squaredNorm() + nodal.row(a).dot(nodal.row(b)) + nodal.row(b).squaredNorm());
  }
  return std::sqrt(s);
}

}  // namespace stokeshape

#endif  // STOKESHAPE_SURFACE_HPP
