#ifndef STOKESHAPE_METRICS_HPP
#define STOKESHAPE_METRICS_HPP

#include <memory>

#include "stokeshape/assembly.hpp"
#include "stokeshape/shape_calculus.hpp"
#include "stokeshape/surface.hpp"

namespace stokeshape {

enum class MetricKind { SteklovPoincare, LaplaceBeltrami };

inline const char* to_string(MetricKind k) {
  return k == MetricKind::SteklovPoincare ? "steklov_poincare" : "laplace_beltrami";
}

struct MetricConfig {
  MetricKind kind = MetricKind::SteklovPoincare;
  double A = 0.1;  // surface Helmholtz weight (Laplace-Beltrami only)
  double mu_min = 1.0;
  double mu_max = 500.0;
  double lambda_elas = 0.0;
};

/// Lamé coefficients: nodal μ on the P1 mesh vertices plus a constant λ.
struct LameField {
  Eigen::VectorXd mu_nodal;
  double lambda = 0.0;
};

/// Young's modulus / Poisson ratio conversion to Lamé parameters.
inline std::pair<double, double> lame_from_young_poisson(double E, double nu) {
  const double lambda = nu * E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  return {lambda, mu};
}

/// Harmonic μ field: μ_max on the obstacle boundary, μ_min on the outer
/// boundary, Laplace in between. Computed once per optimization run; the
/// nodal values ride along with the deforming mesh afterwards.
inline LameField compute_mu_field(const TriMesh& mesh, const MetricConfig& cfg) {
  if (!(cfg.mu_min > 0.0) || cfg.mu_max < cfg.mu_min)
    throw std::invalid_argument("compute_mu_field: need 0 < mu_min <= mu_max");
  LameField out;
  out.lambda = cfg.lambda_elas;
  const std::map<BoundaryMarker, double> bc{{BoundaryMarker::Obstacle, cfg.mu_max},
                                            {BoundaryMarker::Inflow, cfg.mu_min},
                                            {BoundaryMarker::Outflow, cfg.mu_min},
                                            {BoundaryMarker::Wall, cfg.mu_min}};
  out.mu_nodal = solve(assemble_poisson(mesh, bc));
  return out;
}

/// A direction of shape change. Both metrics carry a full-domain P1
/// displacement (the mesh motion); the Laplace-Beltrami variant additionally
/// stores the scalar normal field α on the loop that generated it.
struct TangentVector {
  MetricKind kind;
  Eigen::VectorXd displacement;  // P1 vector dofs, interleaved x/y
  Eigen::VectorXd alpha;         // loop-vertex values; empty for Steklov-Poincaré

  TangentVector scaled(double f) const { return {kind, f * displacement, f * alpha}; }
  TangentVector plus(const TangentVector& o, double f = 1.0) const {
    check_compatible(o);
    return {kind, displacement + f * o.displacement, alpha + f * o.alpha};
  }
  TangentVector minus(const TangentVector& o) const { return plus(o, -1.0); }

  void check_compatible(const TangentVector& o) const {
    if (kind != o.kind || displacement.size() != o.displacement.size() ||
        alpha.size() != o.alpha.size())
      throw std::invalid_argument("TangentVector: incompatible operands");
  }
};

/// Per-iteration factory for Riesz representatives and the metric inner
/// product. Builds the elasticity operator once on the given mesh; solves
/// and inner products then share the factorization. Stored tangent vectors
/// from earlier iterations are paired with the current operator (identity
/// vector transport).
class MetricWorkspace {
 public:
  MetricWorkspace(const TriMesh& mesh, const ObstacleLoop& loop, const MetricConfig& cfg,
                  const LameField& lame)
      : mesh_(&mesh), loop_(&loop), cfg_(cfg) {
    const RawOperator raw = assemble_elasticity(mesh, lame.mu_nodal, lame.lambda);
    n_disp_ = raw.n;

    FunctionSpace disp(mesh, 1, 2);
    outer_fixed_.assign(n_disp_, 0);
    for (int v : boundary_scalar_nodes(
             disp, {BoundaryMarker::Inflow, BoundaryMarker::Outflow, BoundaryMarker::Wall}))
      for (int c = 0; c < 2; ++c) outer_fixed_[disp.dof(v, c)] = 1;

    if (cfg.kind == MetricKind::SteklovPoincare) {
      auto trips = raw.trips;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_disp_);
      eliminate_dirichlet(trips, rhs, outer_fixed_, Eigen::VectorXd::Zero(n_disp_));
      Eigen::SparseMatrix<double> A(n_disp_, n_disp_);
      A.setFromTriplets(trips.begin(), trips.end());
      elas_ = std::make_unique<SparseFactor>(std::move(A));
    } else {
      raw_matrix_ = raw.matrix();
      all_fixed_ = outer_fixed_;
      for (int v : boundary_scalar_nodes(disp, {BoundaryMarker::Obstacle}))
        for (int c = 0; c < 2; ++c) all_fixed_[disp.dof(v, c)] = 1;
      auto trips = raw.trips;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_disp_);
      eliminate_dirichlet(trips, rhs, all_fixed_, Eigen::VectorXd::Zero(n_disp_));
      Eigen::SparseMatrix<double> A(n_disp_, n_disp_);
      A.setFromTriplets(trips.begin(), trips.end());
      elas_ = std::make_unique<SparseFactor>(std::move(A));

      mass_ = std::make_unique<SparseFactor>(loop_mass(loop));
      mak_mat_ = loop_mass(loop) + cfg.A * loop_stiffness(loop);
      mak_ = std::make_unique<SparseFactor>(mak_mat_);
      vnormals_ = vertex_normals(loop);
    }
  }

  const ObstacleLoop& loop() const { return *loop_; }
  const MetricConfig& config() const { return cfg_; }

  /// ∫_Γ γ ⟨n, φ⟩ ds over the P1 vector dofs (edge normals, edge-linear γ).
  Eigen::VectorXd displacement_load(const SurfaceDensity& d) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_disp_);
    const ObstacleLoop& loop = *d.loop;
    for (int e = 0; e < loop.n_edges(); ++e) {
      const int va = loop.vertex_ids[e];
      const int vb = loop.vertex_ids[(e + 1) % loop.n_vertices()];
      const double L = loop.lengths[e];
      const double g0 = d.edge_values[e][0], g1 = d.edge_values[e][1];
      for (int c = 0; c < 2; ++c) {
        b[2 * va + c] += loop.normals[e][c] * L * (g0 / 3.0 + g1 / 6.0);
        b[2 * vb + c] += loop.normals[e][c] * L * (g0 / 6.0 + g1 / 3.0);
      }
    }
    return b;
  }

  /// Riesz representative of the density γ under the configured metric.
  TangentVector riesz(const SurfaceDensity& gamma) const {
    if (cfg_.kind == MetricKind::SteklovPoincare) {
      Eigen::VectorXd b = displacement_load(gamma);
      for (int i = 0; i < n_disp_; ++i)
        if (outer_fixed_[i]) b[i] = 0.0;
      return {cfg_.kind, elas_->solve(b), Eigen::VectorXd()};
    }
    // surface pass: project, then apply (id − A Δ_Γ)⁻¹ on the loop
    const Eigen::VectorXd gbar = mass_->solve(surface_load(gamma));
    const Eigen::VectorXd alpha = mak_->solve(mass_->matrix() * gbar);
    return {cfg_.kind, extend(alpha), alpha};
  }

  /// Harmonic-elasticity extension of the boundary field α·n into the mesh.
  Eigen::VectorXd extend(const Eigen::VectorXd& alpha) const {
    const ObstacleLoop& loop = *loop_;
    if (alpha.size() != loop.n_vertices())
      throw std::invalid_argument("extend: alpha length must match loop");
    Eigen::VectorXd xbc = Eigen::VectorXd::Zero(n_disp_);
    for (int i = 0; i < loop.n_vertices(); ++i)
      for (int c = 0; c < 2; ++c) xbc[2 * loop.vertex_ids[i] + c] = alpha[i] * vnormals_[i][c];
    Eigen::VectorXd b = -(raw_matrix_ * xbc);
    for (int i = 0; i < n_disp_; ++i)
      if (all_fixed_[i]) b[i] = xbc[i];
    return elas_->solve(b);
  }

  /// Metric inner product of two tangent vectors built on this mesh (or
  /// transported to it by the identity map).
  double inner(const TangentVector& u, const TangentVector& w) const {
    u.check_compatible(w);
    if (cfg_.kind == MetricKind::SteklovPoincare)
      return u.displacement.dot(elas_->matrix() * w.displacement);
    return u.alpha.dot(mak_mat_ * w.alpha);
  }

  /// Duality pairing ∫_Γ γ ⟨w, n⟩ ds of a density with a tangent vector.
  double pairing(const SurfaceDensity& gamma, const TangentVector& w) const {
    if (cfg_.kind == MetricKind::SteklovPoincare)
      return displacement_load(gamma).dot(w.displacement);
    return density_pairing(gamma, w.alpha);
  }

 private:
  const TriMesh* mesh_;
  const ObstacleLoop* loop_;
  MetricConfig cfg_;
  int n_disp_ = 0;
  std::vector<char> outer_fixed_;
  std::vector<char> all_fixed_;
  std::unique_ptr<SparseFactor> elas_;  // SP: outer fixed; LB: outer + Γ fixed
  Eigen::SparseMatrix<double> raw_matrix_;
  std::unique_ptr<SparseFactor> mass_, mak_;
  Eigen::SparseMatrix<double> mak_mat_;
  std::vector<Vec2> vnormals_;
};

}  // namespace stokeshape

#endif  // STOKESHAPE_METRICS_HPP
