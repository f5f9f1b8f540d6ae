#ifndef STOKESHAPE_VERIFICATION_HPP
#define STOKESHAPE_VERIFICATION_HPP

#include <random>

#include "stokeshape/mesh_gen.hpp"
#include "stokeshape/optimizer.hpp"

namespace stokeshape {

// ---------------------------------------------------------------------------
// Manufactured Stokes solutions on the channel [0,1] × [-1,1]
// ---------------------------------------------------------------------------

/// Divergence-free trigonometric solution with no-slip walls, from the
/// streamfunction ψ = sin(πx) sin²(πy). Unlike the parabolic profile it is
/// not in the discrete space, so errors actually converge at the element
/// rates instead of collapsing to roundoff.
struct TrigSolution {
  static Vec2 velocity(const Vec2& p) {
    const double pi = std::acos(-1.0);
    const double sy = std::sin(pi * p.y());
    return {pi * std::sin(pi * p.x()) * std::sin(2 * pi * p.y()),
            -pi * std::cos(pi * p.x()) * sy * sy};
  }
  static double pressure(const Vec2& p) {
    const double pi = std::acos(-1.0);
    return std::cos(pi * p.x()) * std::sin(pi * p.y());
  }
  static Vec2 body_force(const Vec2& p) {
    const double pi = std::acos(-1.0);
    const double pi3 = pi * pi * pi;
    const double sx = std::sin(pi * p.x()), cx = std::cos(pi * p.x());
    const double sy = std::sin(pi * p.y()), cy = std::cos(pi * p.y());
    const double s2y = std::sin(2 * pi * p.y()), c2y = std::cos(2 * pi * p.y());
    return {5 * pi3 * sx * s2y + pi * sx * sy,
            -pi3 * cx * sy * sy + 2 * pi3 * cx * c2y - pi * cx * cy};
  }
};

struct PoiseuilleSolution {
  static Vec2 velocity(const Vec2& p) { return {1.0 - p.y() * p.y(), 0.0}; }
  static double pressure(const Vec2& p) { return 2.0 * p.x() - 1.0; }
  static constexpr double dissipation = 8.0 / 3.0;
};

inline double velocity_l2_error(const StokesSolution& sol,
                                const std::function<Vec2(const Vec2&)>& exact) {
  const FunctionSpace& vel = *sol.vel_space;
  const auto quad = triangle_rule(6);
  double err2 = 0.0;
  double vals[6];
  int nodes[6];
  for (int t = 0; t < vel.mesh().n_triangles(); ++t) {
    const Eigen::Matrix2d J = vel.jacobian(t);
    const double detJ = J.determinant();
    const Vec2 p0 = vel.mesh().vertices()[vel.mesh().triangles()[t][0]];
    const int nb = vel.local_nodes(t, nodes);
    for (const auto& q : quad) {
      vel.basis(q.x, q.y, vals);
      Vec2 vh = Vec2::Zero();
      for (int i = 0; i < nb; ++i)
        for (int c = 0; c < 2; ++c) vh[c] += vals[i] * sol.velocity[vel.dof(nodes[i], c)];
      const Vec2 d = vh - exact(p0 + J * Vec2(q.x, q.y));
      err2 += q.w * detJ * d.squaredNorm();
    }
  }
  return std::sqrt(err2);
}

inline double pressure_l2_error(const StokesSolution& sol,
                                const std::function<double(const Vec2&)>& exact) {
  const FunctionSpace& pre = *sol.pre_space;
  const auto quad = triangle_rule(6);
  double err2 = 0.0;
  for (int t = 0; t < pre.mesh().n_triangles(); ++t) {
    const auto& tri = pre.mesh().triangles()[t];
    const Eigen::Matrix2d J = pre.jacobian(t);
    const double detJ = J.determinant();
    const Vec2 p0 = pre.mesh().vertices()[tri[0]];
    for (const auto& q : quad) {
      const double ph = (1.0 - q.x - q.y) * sol.pressure[tri[0]] + q.x * sol.pressure[tri[1]] +
                        q.y * sol.pressure[tri[2]];
      const double d = ph - exact(p0 + J * Vec2(q.x, q.y));
      err2 += q.w * detJ * d * d;
    }
  }
  return std::sqrt(err2);
}

struct ConvergenceStudy {
  std::vector<double> h;             // mesh size per level
  std::vector<double> err_v, err_p;  // trig manufactured solution
  std::vector<double> order_v, order_p;
  std::vector<double> poiseuille_J;
  std::vector<double> poiseuille_verr;
};

inline ConvergenceStudy run_convergence_study(int levels = 4, int nx0 = 8) {
  ConvergenceStudy out;
  for (int l = 0; l < levels; ++l) {
    const int nx = nx0 << l;
    RectMeshParams prm;
    prm.x0 = 0;
    prm.x1 = 1;
    prm.y0 = -1;
    prm.y1 = 1;
    prm.nx = nx;
    prm.ny = 2 * nx;
    const TriMesh mesh = rect_mesh(prm);
    out.h.push_back(1.0 / nx);

    const StokesSolution trig =
        solve_stokes(mesh, TrigSolution::velocity, TrigSolution::body_force);
    out.err_v.push_back(velocity_l2_error(trig, TrigSolution::velocity));
    out.err_p.push_back(pressure_l2_error(trig, TrigSolution::pressure));

    const StokesSolution pois =
        solve_stokes(mesh, [](const Vec2& p) { return PoiseuilleSolution::velocity(p); });
    out.poiseuille_J.push_back(pois.dissipation);
    out.poiseuille_verr.push_back(velocity_l2_error(pois, PoiseuilleSolution::velocity));
  }
  for (int l = 0; l + 1 < levels; ++l) {
    out.order_v.push_back(std::log2(out.err_v[l] / out.err_v[l + 1]));
    out.order_p.push_back(std::log2(out.err_p[l] / out.err_p[l + 1]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference check of the combined gradient density
// ---------------------------------------------------------------------------

/// ∫_Γ γ ⟨V, n⟩ ds for a continuous P1 vector field V given at mesh
/// vertices; exact per-edge integration of the two linear factors.
inline double hadamard_pairing(const SurfaceDensity& gamma, const std::vector<Vec2>& V) {
  const ObstacleLoop& loop = *gamma.loop;
  double acc = 0.0;
  for (int e = 0; e < loop.n_edges(); ++e) {
    const double v0 = V[loop.vertex_ids[e]].dot(loop.normals[e]);
    const double v1 = V[loop.vertex_ids[(e + 1) % loop.n_vertices()]].dot(loop.normals[e]);
    const double g0 = gamma.edge_values[e][0], g1 = gamma.edge_values[e][1];
    acc += loop.lengths[e] / 6.0 * (2 * g0 * v0 + g0 * v1 + g1 * v0 + 2 * g1 * v1);
  }
  return acc;
}

/// Smooth random vector fields supported near the obstacle (quintic radial
/// cutoff, zero well before the outer boundary).
inline std::vector<Vec2> random_boundary_field(const TriMesh& mesh, const ObstacleLoop& loop,
                                               std::mt19937& rng) {
  const Vec2 center = barycenter(loop);
  double r_obs = 0.0;
  for (const Vec2& p : loop.points) r_obs = std::max(r_obs, (p - center).norm());
  double r_outer = std::numeric_limits<double>::infinity();
  const auto vmark = mesh.vertex_markers();
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (vmark[v] && *vmark[v] != BoundaryMarker::Obstacle)
      r_outer = std::min(r_outer, (mesh.vertices()[v] - center).norm());
  const double r1 = 1.3 * r_obs;
  const double r2 = std::max(0.8 * r_outer, 1.6 * r_obs);

  std::uniform_real_distribution<double> amp(0.4, 1.0), phase(0.0, 6.28), wave(0.5, 2.0);
  const double a1 = amp(rng), a2 = amp(rng), p1 = phase(rng), p2 = phase(rng);
  const double k1 = wave(rng), k2 = wave(rng);

  std::vector<Vec2> V(static_cast<std::size_t>(mesh.n_vertices()), Vec2::Zero());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 x = mesh.vertices()[v];
    const double r = (x - center).norm();
    double w = 0.0;
    if (r <= r1)
      w = 1.0;
    else if (r < r2) {
      const double s = (r - r1) / (r2 - r1);
      w = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    }
    if (w == 0.0) continue;
    V[v] = {w * a1 * std::sin(k1 * x.x() + p1), w * a2 * std::cos(k2 * x.y() + p2)};
  }
  return V;
}

struct FdCheck {
  std::vector<double> rel_errors;
  double mean_rel = 0.0;
  double max_rel = 0.0;
};

/// Central finite differences of L_A under mesh motion by smooth fields V
/// against the Hadamard pairing with the combined density γ. `flip_sign`
/// negates the dissipation part of γ (fault-injection hook for verify).
inline FdCheck run_fd_check(const TriMesh& mesh, int n_dirs, double h, unsigned seed,
                            bool flip_sign = false) {
  const ProblemSetup setup{[](const Vec2&) { return Vec2(1.0, 0.0); }};
  const ObstacleLoop loop = obstacle_loop(mesh);
  const double vol = volume(loop);
  const Vec2 bc = barycenter(loop);
  // deliberately infeasible reference and nonzero multipliers so every term
  // of the density contributes
  const GeometricReference ref{vol * 1.03, bc + Vec2(0.01, -0.005)};
  AlParameters al;
  al.lambda = {0.3, -0.2, 0.5};
  al.mu_pen = 10.0;

  const StokesSolution sol = solve_stokes(mesh, setup.v_inflow);
  const ConstraintVector c = constraints(loop, ref);
  const SurfaceDensity obj = objective_density(sol, loop);
  SurfaceDensity gamma = al_density(obj, constraint_densities(loop, vol, bc), c, al);
  if (flip_sign)
    for (int e = 0; e < loop.n_edges(); ++e)
      for (int k = 0; k < 2; ++k)
        gamma.edge_values[e][k] -= 2.0 * objective_density_orientation * obj.edge_values[e][k];

  std::mt19937 rng(seed);
  FdCheck out;
  for (int d = 0; d < n_dirs; ++d) {
    const auto V = random_boundary_field(mesh, loop, rng);
    const DeformResult plus = apply_displacement(mesh, V, h);
    const DeformResult minus = apply_displacement(mesh, V, -h);
    if (!plus.valid || !minus.valid)
      throw std::runtime_error("run_fd_check: test displacement inverted the mesh");
    const double Lp = evaluate_mesh(*plus.mesh, setup, ref, al).L_A;
    const double Lm = evaluate_mesh(*minus.mesh, setup, ref, al).L_A;
    const double fd = (Lp - Lm) / (2.0 * h);
    const double pairing = hadamard_pairing(gamma, V);
    const double rel = std::abs(fd - pairing) / std::max(std::abs(fd), 1e-14);
    out.rel_errors.push_back(rel);
  }
  for (double r : out.rel_errors) {
    out.mean_rel += r / static_cast<double>(out.rel_errors.size());
    out.max_rel = std::max(out.max_rel, r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary-integral geometry vs. direct polygon formulas
// ---------------------------------------------------------------------------

struct PolygonOracle {
  double max_vol_rel = 0.0;
  double max_bc_rel = 0.0;  // barycenter error relative to the polygon radius
};

inline PolygonOracle run_polygon_oracle(int n_polygons, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> nv(16, 128);
  std::uniform_real_distribution<double> rad(0.3, 2.0), off(-1.0, 1.0), coef(-0.08, 0.08),
      phase(0.0, 6.28);
  PolygonOracle out;
  for (int it = 0; it < n_polygons; ++it) {
    const int n = nv(rng);
    const double r0 = rad(rng);
    const Vec2 center(off(rng), off(rng));
    double a[4], ph[4];
    for (int k = 0; k < 4; ++k) {
      a[k] = coef(rng);
      ph[k] = phase(rng);
    }
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * std::acos(-1.0) * i / n;
      double r = r0;
      for (int k = 0; k < 4; ++k) r += r0 * a[k] * std::cos((k + 2) * th + ph[k]);
      pts[i] = center + r * Vec2(std::cos(th), std::sin(th));
    }
    const ObstacleLoop loop = ObstacleLoop::from_polygon(pts);
    const double vol_oracle = std::abs(polygon_signed_area(pts));
    const Vec2 bc_oracle = polygon_centroid(pts);
    out.max_vol_rel =
        std::max(out.max_vol_rel, std::abs(volume(loop) - vol_oracle) / vol_oracle);
    out.max_bc_rel =
        std::max(out.max_bc_rel, (barycenter(loop) - bc_oracle).norm() / r0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Riesz property of the metric inner products
// ---------------------------------------------------------------------------

struct RieszCheck {
  double max_rel_sp = 0.0;
  double max_rel_lb = 0.0;
};

inline SurfaceDensity random_density(const ObstacleLoop& loop, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SurfaceDensity d(loop);
  const Vec2 bc = barycenter(loop);
  for (int e = 0; e < loop.n_edges(); ++e)
    for (int k = 0; k < 2; ++k) {
      const Vec2 p = (k == 0 ? loop.edge_start(e) : loop.edge_end(e)) - bc;
      const double th = std::atan2(p.y(), p.x());
      d.edge_values[e][k] = std::cos(2 * th) + 0.5 * std::sin(3 * th) + 0.2 * u(rng);
    }
  return d;
}

inline RieszCheck run_riesz_check(const TriMesh& mesh, const MetricConfig& base, int n_tangents,
                                  unsigned seed) {
  const ObstacleLoop loop = obstacle_loop(mesh);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  MetricConfig sp_cfg = base, lb_cfg = base;
  sp_cfg.kind = MetricKind::SteklovPoincare;
  lb_cfg.kind = MetricKind::LaplaceBeltrami;
  const LameField lame = compute_mu_field(mesh, sp_cfg);
  const MetricWorkspace sp(mesh, loop, sp_cfg, lame);
  const MetricWorkspace lb(mesh, loop, lb_cfg, lame);

  FunctionSpace disp(mesh, 1, 2);
  std::vector<char> outer(static_cast<std::size_t>(disp.n_dofs()), 0);
  for (int v : boundary_scalar_nodes(
           disp, {BoundaryMarker::Inflow, BoundaryMarker::Outflow, BoundaryMarker::Wall}))
    for (int c = 0; c < 2; ++c) outer[disp.dof(v, c)] = 1;

  RieszCheck out;
  const SurfaceDensity gamma = random_density(loop, rng);
  const TangentVector r_sp = sp.riesz(gamma);
  const TangentVector r_lb = lb.riesz(gamma);
  for (int t = 0; t < n_tangents; ++t) {
    Eigen::VectorXd w(disp.n_dofs());
    for (int i = 0; i < w.size(); ++i) w[i] = outer[i] ? 0.0 : u(rng);
    const TangentVector w_sp{MetricKind::SteklovPoincare, w, Eigen::VectorXd()};
    const double lhs_sp = sp.inner(r_sp, w_sp);
    const double rhs_sp = sp.pairing(gamma, w_sp);
    out.max_rel_sp = std::max(out.max_rel_sp,
                              std::abs(lhs_sp - rhs_sp) / std::max(std::abs(rhs_sp), 1e-14));

    Eigen::VectorXd beta(loop.n_vertices());
    for (int i = 0; i < beta.size(); ++i) beta[i] = u(rng);
    const TangentVector w_lb{MetricKind::LaplaceBeltrami, lb.extend(beta), beta};
    const double lhs_lb = lb.inner(r_lb, w_lb);
    const double rhs_lb = lb.pairing(gamma, w_lb);
    out.max_rel_lb = std::max(out.max_rel_lb,
                              std::abs(lhs_lb - rhs_lb) / std::max(std::abs(rhs_lb), 1e-14));
  }
  return out;
}

/// Largest mismatch between the obstacle vertex set and its mirror image
/// across the x axis, for symmetry assertions.
inline double mirror_asymmetry(const ObstacleLoop& loop) {
  double worst = 0.0;
  for (const Vec2& p : loop.points) {
    const Vec2 m(p.x(), -p.y());
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : loop.points) best = std::min(best, (q - m).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_VERIFICATION_HPP
