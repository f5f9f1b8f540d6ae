#ifndef STOKESHAPE_OPTIMIZER_HPP
#define STOKESHAPE_OPTIMIZER_HPP

#include <chrono>
#include <optional>

#include "stokeshape/lbfgs.hpp"
#include "stokeshape/stokes.hpp"

namespace stokeshape {

struct StepControlConfig {
  double initial_scale = 1.0;
  double backtrack = 0.5;
  int max_backtracks = 30;
  double quality_cap = 1e9;  // effectively off unless configured
  double armijo_c1 = 1e-4;
};

struct OptimizerConfig {
  MetricConfig metric;
  int memory = 3;          // L-BFGS pairs; 0 = steepest descent
  double delta_J = 1e-4;   // inner stop: L²(Γ) norm of the accepted step
  double delta_c = -1.0;   // constraint tolerance; < 0 means 1e-4·vol0
  double mu_pen0 = 100.0;
  double mu_inc = 10.0;
  double lambda_tol = 1e-2;  // outer stop: ‖Δλ‖₂
  int max_inner = 200;
  int max_outer = 30;
  StepControlConfig step;
};

/// The boundary data of the state equation.
struct ProblemSetup {
  std::function<Vec2(const Vec2&)> v_inflow;
};

enum class InnerStatus { Converged, IterationCap, MeshInvalid, Stalled };

inline const char* to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::Converged: return "converged";
    case InnerStatus::IterationCap: return "iteration_cap";
    case InnerStatus::MeshInvalid: return "mesh_invalid";
    case InnerStatus::Stalled: return "stalled";
  }
  return "unknown";
}

/// One accepted descent step.
struct IterationRecord {
  int iter;
  double J;
  double L_A;
  double c_norm;
  double worst_quality;
  double step_norm;  // L²(Γ) norm of the accepted step field
  double scale;
  double seconds;
};

/// Invoked after every accepted inner step with the new mesh.
using StepObserver = std::function<void(const TriMesh&, const IterationRecord&)>;

/// Objective/constraint state of one mesh.
struct Evaluation {
  double J;
  ConstraintVector c;
  double L_A;
};

inline Evaluation evaluate_mesh(const TriMesh& mesh, const ProblemSetup& setup,
                                const GeometricReference& ref, const AlParameters& al) {
  const StokesSolution sol = solve_stokes(mesh, setup.v_inflow);
  const ObstacleLoop loop = obstacle_loop(mesh);
  const ConstraintVector c = constraints(loop, ref);
  return {sol.dissipation, c, al_value(sol.dissipation, c, al)};
}

/// L²(Γ) norm of a tangent's boundary trace.
inline double step_l2_norm(const ObstacleLoop& loop, const Eigen::VectorXd& displacement) {
  Eigen::MatrixXd nodal(loop.n_vertices(), 2);
  for (int i = 0; i < loop.n_vertices(); ++i)
    for (int c = 0; c < 2; ++c) nodal(i, c) = displacement[2 * loop.vertex_ids[i] + c];
  return loop_l2_norm(loop, nodal);
}

inline std::vector<Vec2> displacement_to_vec2(const Eigen::VectorXd& d) {
  std::vector<Vec2> out(static_cast<std::size_t>(d.size() / 2));
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = {d[2 * v], d[2 * v + 1]};
  return out;
}

struct StepOutcome {
  bool accepted = false;
  bool invalid_at_min_scale = false;
  double scale = 0.0;
  std::optional<TriMesh> mesh;
  Evaluation eval{};
  double worst_quality = 0.0;
};

/// Backtracking line search on L_A: a scale is admissible when the moved
/// mesh is valid, the worst element quality stays under the cap, and the
/// Armijo decrease holds for the metric directional derivative.
inline StepOutcome step_control(const TriMesh& mesh, const Eigen::VectorXd& direction,
                                double initial_scale, double dir_derivative,
                                const Evaluation& here, const ProblemSetup& setup,
                                const GeometricReference& ref, const AlParameters& al,
                                const StepControlConfig& cfg) {
  const auto disp = displacement_to_vec2(direction);
  StepOutcome out;
  double scale = initial_scale;
  for (int k = 0; k <= cfg.max_backtracks; ++k, scale *= cfg.backtrack) {
    DeformResult trial = apply_displacement(mesh, disp, scale);
    out.invalid_at_min_scale = !trial.valid;
    if (!trial.valid) continue;
    if (trial.worst_quality > cfg.quality_cap) continue;
    Evaluation ev;
    try {
      ev = evaluate_mesh(*trial.mesh, setup, ref, al);
    } catch (const SolverError&) {
      // geometrically valid but numerically unusable (near-degenerate
      // elements wreck the factorization): treat like an inadmissible trial
      continue;
    }
    if (ev.L_A <= here.L_A - cfg.armijo_c1 * scale * dir_derivative) {
      out.accepted = true;
      out.scale = scale;
      out.mesh = std::move(trial.mesh);
      out.eval = ev;
      out.worst_quality = trial.worst_quality;
      return out;
    }
  }
  return out;
}

struct InnerResult {
  InnerStatus status;
  TriMesh mesh;
  int iterations = 0;
};

/// Inner minimization of L_A at fixed multipliers: Stokes solve, combined
/// gradient density, Riesz representative, (L-)BFGS direction, line search,
/// node-addition retraction. Stops when the L²(Γ) norm of the accepted step
/// drops below δ_J.
inline InnerResult inner_solve(const TriMesh& start, const ProblemSetup& setup,
                               const GeometricReference& ref, const AlParameters& al,
                               const OptimizerConfig& cfg, const LameField& lame,
                               LbfgsMemory& memory, std::vector<IterationRecord>& records,
                               int iter_offset = 0, const StepObserver& observer = {}) {
  TriMesh mesh = start;
  std::optional<TangentVector> prev_grad;
  std::optional<TangentVector> prev_step;

  for (int it = 0; it < cfg.max_inner; ++it) try {
    const auto t0 = std::chrono::steady_clock::now();
    const ObstacleLoop loop = obstacle_loop(mesh);
    const StokesSolution sol = solve_stokes(mesh, setup.v_inflow);
    const double vol = volume(loop);
    const Vec2 bc = barycenter(loop);
    const ConstraintVector c = constraints(loop, ref);
    const double L_A = al_value(sol.dissipation, c, al);

    const SurfaceDensity gamma = al_density(objective_density(sol, loop),
                                            constraint_densities(loop, vol, bc), c, al);
    const MetricWorkspace ws(mesh, loop, cfg.metric, lame);
    const InnerProduct g = [&ws](const TangentVector& a, const TangentVector& b) {
      return ws.inner(a, b);
    };
    const TangentVector grad = ws.riesz(gamma);

    if (prev_grad && prev_step) {
      memory.push(*prev_step, grad.minus(*prev_grad), g);
      prev_step.reset();
    }

    TangentVector q = lbfgs_direction(grad, memory, g);
    double descent = g(q, grad);
    bool quasi_newton = memory.size() > 0;
    if (!(descent > 0.0)) {  // metric-descent safeguard; rare with the curvature filter
      q = grad;
      descent = g(grad, grad);
      quasi_newton = false;
    }

    const double grad_norm = std::sqrt(std::max(g(grad, grad), 0.0));
    double scale0 = quasi_newton ? cfg.step.initial_scale
                                 : cfg.step.initial_scale / std::max(grad_norm, 1.0);

    // Already at stationarity: the untouched trial step is below tolerance.
    if (scale0 * step_l2_norm(loop, q.displacement) < cfg.delta_J)
      return {InnerStatus::Converged, std::move(mesh), it};

    const Evaluation here{sol.dissipation, c, L_A};
    StepOutcome step = step_control(mesh, -q.displacement, scale0, descent, here, setup, ref, al,
                                    cfg.step);
    if (!step.accepted && quasi_newton) {
      // g(q, grad) > 0 certifies descent only against the boundary-integral
      // form of the derivative, which matches the discrete L_A to mesh
      // resolution; a quasi-Newton direction built from small gradients can
      // leave that cone and fail every backtrack. Drop the memory and retry
      // the iteration along the plain gradient before giving up.
      memory.clear();
      prev_grad.reset();
      prev_step.reset();
      q = grad;
      descent = g(grad, grad);
      scale0 = cfg.step.initial_scale / std::max(grad_norm, 1.0);
      if (scale0 * step_l2_norm(loop, q.displacement) < cfg.delta_J)
        return {InnerStatus::Converged, std::move(mesh), it};
      step = step_control(mesh, -q.displacement, scale0, descent, here, setup, ref, al, cfg.step);
    }
    if (!step.accepted)
      return {step.invalid_at_min_scale ? InnerStatus::MeshInvalid : InnerStatus::Stalled,
              std::move(mesh), it};

    const double step_norm = step.scale * step_l2_norm(loop, q.displacement);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    records.push_back({iter_offset + it + 1, step.eval.J, step.eval.L_A, step.eval.c.norm(),
                       step.worst_quality, step_norm, step.scale, seconds});

    prev_grad = grad;
    prev_step = q.scaled(-step.scale);
    mesh = std::move(*step.mesh);
    if (observer) observer(mesh, records.back());

    if (step_norm < cfg.delta_J) return {InnerStatus::Converged, std::move(mesh), it + 1};
  } catch (const SolverError&) {
    // state or metric solve broke down on the current mesh: by this point the
    // elements are too distorted to be trusted, which is a mesh failure, not
    // an internal error
    return {InnerStatus::MeshInvalid, std::move(mesh), it};
  }
  return {InnerStatus::IterationCap, std::move(mesh), cfg.max_inner};
}

/// One multiplier-loop update. Feasibility worse than δ_c escalates the
/// penalty; otherwise the first-order multiplier step λ ← λ + μ c is taken.
struct MultiplierUpdate {
  bool mu_increased = false;
  double lambda_delta = 0.0;
};

inline MultiplierUpdate update_multipliers(AlParameters& al, const ConstraintVector& c,
                                           double delta_c, double mu_inc) {
  MultiplierUpdate out;
  if (c.norm() > delta_c) {
    al.mu_pen *= mu_inc;
    out.mu_increased = true;
    return out;
  }
  const Eigen::Vector3d step = al.mu_pen * c;
  al.lambda += step;
  out.lambda_delta = step.norm();
  return out;
}

struct OuterRecord {
  int k;
  Eigen::Vector3d lambda;
  double mu_pen;
  double c_norm;
  int inner_iterations;
  InnerStatus inner_status;
};

struct AlResult {
  InnerStatus status;       // status of the last inner solve
  bool lambda_converged = false;
  TriMesh mesh;
  AlParameters al;
  GeometricReference ref;
  std::vector<IterationRecord> records;
  std::vector<OuterRecord> outer;
  int total_inner = 0;
};

/// Outer augmented-Lagrangian loop: repeated inner solves with multiplier
/// updates in between. L-BFGS memory persists across λ updates and is
/// cleared when the penalty changes.
///
/// The first-order update λ ← λ + μ c is kept deliberately plain. On coarse
/// meshes the constraint residual at inner stationarity resolves only to a
/// few times δ_J, so past the first few updates the iterates perform a
/// bounded walk around the discrete multiplier rather than a clean
/// contraction; the stop ‖Δλ‖ = μ‖c‖ < lambda_tol then doubles as a
/// feasibility certificate ‖c‖ < lambda_tol/μ for the returned shape.
inline AlResult augmented_lagrangian_loop(const TriMesh& start, const ProblemSetup& setup,
                                          const OptimizerConfig& cfg, const LameField& lame,
                                          const StepObserver& observer = {}) {
  const ObstacleLoop loop0 = obstacle_loop(start);
  const GeometricReference ref{volume(loop0), barycenter(loop0)};
  const double delta_c = cfg.delta_c > 0.0 ? cfg.delta_c : 1e-4 * ref.vol0;

  AlResult result{InnerStatus::Converged, false, start, AlParameters{}, ref, {}, {}, 0};
  result.al.mu_pen = cfg.mu_pen0;
  LbfgsMemory memory(cfg.memory);

  for (int k = 1; k <= cfg.max_outer; ++k) {
    InnerResult inner = inner_solve(result.mesh, setup, ref, result.al, cfg, lame, memory,
                                    result.records, result.total_inner, observer);
    result.total_inner += inner.iterations;
    result.mesh = std::move(inner.mesh);
    result.status = inner.status;

    const ConstraintVector c = constraints(obstacle_loop(result.mesh), ref);
    result.outer.push_back(
        {k, result.al.lambda, result.al.mu_pen, c.norm(), inner.iterations, inner.status});

    if (inner.status != InnerStatus::Converged) return result;

    const MultiplierUpdate upd = update_multipliers(result.al, c, delta_c, cfg.mu_inc);
    result.outer.back().lambda = result.al.lambda;  // record post-update multipliers
    if (upd.mu_increased) {
      memory.clear();
      continue;
    }
    if (upd.lambda_delta < cfg.lambda_tol) {
      result.lambda_converged = true;
      return result;
    }
  }
  result.status = InnerStatus::IterationCap;
  return result;
}

/// Geodesic-distance surrogate between nearby loops: cast each Γ_a vertex
/// normal ray onto Γ_b, take the nearest hit, integrate |distance| along
/// Γ_a with the trapezoid rule. Loops too different to pair up yield an
/// empty result.
inline std::optional<double> shape_distance(const ObstacleLoop& a, const ObstacleLoop& b) {
  const auto normals = vertex_normals(a);
  double diameter = 0.0;
  for (int i = 0; i < a.n_vertices(); ++i)
    for (int j = i + 1; j < a.n_vertices(); ++j)
      diameter = std::max(diameter, (a.points[i] - a.points[j]).norm());
  const double radius = diameter;  // search window for the normal rays

  double total = 0.0;
  const int n = a.n_vertices();
  for (int i = 0; i < n; ++i) {
    const Vec2 p = a.points[i];
    const Vec2 d = normals[i];
    double best = std::numeric_limits<double>::infinity();
    for (int e = 0; e < b.n_edges(); ++e) {
      const Vec2 q0 = b.edge_start(e);
      const Vec2 dq = b.edge_end(e) - q0;
      const double det = d.x() * (-dq.y()) - d.y() * (-dq.x());
      if (std::abs(det) < 1e-14) continue;  // ray parallel to edge
      const Vec2 rhs = q0 - p;
      const double t = (rhs.x() * (-dq.y()) - rhs.y() * (-dq.x())) / det;
      const double u = (d.x() * rhs.y() - d.y() * rhs.x()) / det;
      if (u < -1e-12 || u > 1.0 + 1e-12) continue;
      if (std::abs(t) < std::abs(best)) best = t;
    }
    if (!(std::abs(best) <= radius)) return std::nullopt;
    const double L_prev = a.lengths[(i + n - 1) % n];
    const double L_next = a.lengths[i];
    total += std::abs(best) * 0.5 * (L_prev + L_next);
  }
  return total;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_OPTIMIZER_HPP
