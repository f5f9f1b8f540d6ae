#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <stokeshape/mesh_gen.hpp>
#include <stokeshape/optimizer.hpp>

using namespace stokeshape;

namespace {

// tangent vectors double as plain ℝⁿ vectors under the dot-product metric,
// which turns the manifold L-BFGS into the classical algorithm
TangentVector euclid(const Eigen::VectorXd& v) {
  return {MetricKind::SteklovPoincare, v, Eigen::VectorXd()};
}

const InnerProduct dot_metric = [](const TangentVector& a, const TangentVector& b) {
  return a.displacement.dot(b.displacement);
};

TriMesh small_channel() {
  ChannelMeshParams prm;
  prm.n_obstacle = 48;
  prm.h_far = 0.6;
  return channel_mesh(prm);
}

}  // namespace

TEST_CASE("empty memory yields steepest descent, s = y yields identity", "[optimizer]") {
  Eigen::VectorXd g(3);
  g << 1.0, -2.0, 0.5;
  LbfgsMemory empty(5);
  CHECK((lbfgs_direction(euclid(g), empty, dot_metric).displacement - g).norm() == 0.0);

  // one stored pair with s = y: the two loops cancel and restore the input
  LbfgsMemory mem(5);
  Eigen::VectorXd v(3);
  v << 0.3, 1.1, -0.7;
  REQUIRE(mem.push(euclid(v), euclid(v), dot_metric));
  CHECK((lbfgs_direction(euclid(g), mem, dot_metric).displacement - g).norm() < 1e-14);
}

TEST_CASE("memory enforces the curvature condition and its capacity", "[optimizer]") {
  LbfgsMemory mem(2);
  Eigen::VectorXd s(2), y(2);
  s << 1.0, 0.0;
  y << -1.0, 0.0;  // g(y, s) = -1: reject
  CHECK(!mem.push(euclid(s), euclid(y), dot_metric));
  CHECK(mem.size() == 0);

  // three admissible pushes overwrite the oldest pair
  for (double f : {1.0, 2.0, 3.0}) {
    Eigen::VectorXd w = f * Eigen::VectorXd::Ones(2);
    REQUIRE(mem.push(euclid(w), euclid(w), dot_metric));
  }
  CHECK(mem.size() == 2);
  CHECK(mem.pairs().front().s.displacement[0] == Catch::Approx(2.0));
  CHECK(mem.pairs().back().s.displacement[0] == Catch::Approx(3.0));

  LbfgsMemory off(0);
  CHECK(!off.push(euclid(s), euclid(s), dot_metric));
  CHECK_THROWS_AS(LbfgsMemory(-1), std::invalid_argument);
}

TEST_CASE("bfgs minimizes a quadratic in a dozen iterations", "[optimizer]") {
  // f(x) = ½ xᵀA x − bᵀx with A = diag(1..5); exact line search each step
  const int n = 5;
  Eigen::VectorXd diag(n);
  diag << 1.0, 2.0, 3.0, 4.0, 5.0;
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(n);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = diag.cwiseProduct(x) - b;
  LbfgsMemory mem(10);
  int it = 0;
  for (; it < 12 && grad.norm() > 1e-10; ++it) {
    const TangentVector q = lbfgs_direction(euclid(grad), mem, dot_metric);
    const Eigen::VectorXd qd = q.displacement;
    const double t = qd.dot(grad) / qd.dot(diag.cwiseProduct(qd));
    x -= t * qd;
    const Eigen::VectorXd grad_new = diag.cwiseProduct(x) - b;
    mem.push(euclid(-t * qd), euclid(grad_new - grad), dot_metric);
    grad = grad_new;
  }
  CHECK(grad.norm() < 1e-10);
  CHECK(it <= 12);
  CHECK((x - diag.cwiseInverse()).norm() < 1e-9);  // x* = A⁻¹ b
}

TEST_CASE("multiplier updates escalate or ascend as feasibility dictates", "[optimizer]") {
  AlParameters al;
  al.mu_pen = 100.0;

  // infeasible: penalty grows, multipliers untouched
  MultiplierUpdate u = update_multipliers(al, ConstraintVector(0.5, 0.0, 0.0), 1e-2, 10.0);
  CHECK(u.mu_increased);
  CHECK(u.lambda_delta == 0.0);
  CHECK(al.mu_pen == Catch::Approx(1000.0));
  CHECK(al.lambda.norm() == 0.0);

  // feasible: λ ← λ + μ c
  u = update_multipliers(al, ConstraintVector(1e-3, -2e-3, 0.0), 1e-2, 10.0);
  CHECK(!u.mu_increased);
  CHECK(al.mu_pen == Catch::Approx(1000.0));
  CHECK(al.lambda[0] == Catch::Approx(1.0));
  CHECK(al.lambda[1] == Catch::Approx(-2.0));
  CHECK(u.lambda_delta == Catch::Approx(std::sqrt(5.0)));
}

TEST_CASE("dual ascent on a scalar toy problem finds the KKT multiplier", "[optimizer]") {
  // minimize x² subject to x = 1: stationarity 2x + λ = 0 at x = 1 gives
  // λ* = −2. The inner argmin of the AL is x(λ) = (μ − λ)/(2 + μ).
  AlParameters al;
  al.mu_pen = 10.0;
  for (int k = 0; k < 12; ++k) {
    const double x = (al.mu_pen - al.lambda[0]) / (2.0 + al.mu_pen);
    const MultiplierUpdate u =
        update_multipliers(al, ConstraintVector(x - 1.0, 0.0, 0.0), 1e9, 10.0);
    CHECK(!u.mu_increased);
  }
  CHECK(al.mu_pen == Catch::Approx(10.0));
  CHECK(al.lambda[0] == Catch::Approx(-2.0).margin(1e-6));
}

TEST_CASE("line search accepts descent and rejects ascent directions", "[optimizer]") {
  const TriMesh mesh = small_channel();
  const ProblemSetup setup{[](const Vec2&) { return Vec2(1.0, 0.0); }};
  const ObstacleLoop loop = obstacle_loop(mesh);
  const GeometricReference ref{volume(loop), barycenter(loop)};
  const AlParameters al;
  const Evaluation here = evaluate_mesh(mesh, setup, ref, al);

  MetricConfig mcfg;
  const MetricWorkspace ws(mesh, loop, mcfg, compute_mu_field(mesh, mcfg));
  const StokesSolution sol = solve_stokes(mesh, setup.v_inflow);
  const SurfaceDensity gamma =
      al_density(objective_density(sol, loop),
                 constraint_densities(loop, volume(loop), barycenter(loop)),
                 constraints(loop, ref), al);
  const TangentVector grad = ws.riesz(gamma);
  const double descent = ws.inner(grad, grad);
  REQUIRE(descent > 0.0);

  StepControlConfig cfg;
  const double scale0 = 1.0 / std::max(std::sqrt(descent), 1.0);

  SECTION("downhill is accepted with a decrease") {
    const StepOutcome out =
        step_control(mesh, -grad.displacement, scale0, descent, here, setup, ref, al, cfg);
    REQUIRE(out.accepted);
    CHECK(out.scale > 0.0);
    CHECK(out.eval.L_A < here.L_A);
    CHECK(out.mesh.has_value());
    CHECK(out.worst_quality < cfg.quality_cap);
  }

  SECTION("uphill fails without reporting an invalid mesh") {
    StepControlConfig fast = cfg;
    fast.max_backtracks = 6;  // bound the evaluation count
    const StepOutcome out =
        step_control(mesh, grad.displacement, scale0, descent, here, setup, ref, al, fast);
    CHECK(!out.accepted);
    CHECK(!out.invalid_at_min_scale);
  }

  SECTION("an unreachable quality cap blocks every scale") {
    StepControlConfig capped = cfg;
    capped.quality_cap = 1.0;  // below the equilateral optimum √3
    const StepOutcome out =
        step_control(mesh, -grad.displacement, scale0, descent, here, setup, ref, al, capped);
    CHECK(!out.accepted);
    CHECK(!out.invalid_at_min_scale);
  }

  SECTION("a displacement violent at every scale reports mesh invalidity") {
    Eigen::VectorXd wild = Eigen::VectorXd::Zero(2 * mesh.n_vertices());
    wild[2 * loop.vertex_ids[0]] = 1e12;  // one obstacle vertex through everything
    const StepOutcome out = step_control(mesh, wild, 1.0, descent, here, setup, ref, al, cfg);
    CHECK(!out.accepted);
    CHECK(out.invalid_at_min_scale);
  }
}

TEST_CASE("inner solve respects a zero iteration budget", "[optimizer]") {
  const TriMesh mesh = small_channel();
  const ProblemSetup setup{[](const Vec2&) { return Vec2(1.0, 0.0); }};
  const ObstacleLoop loop = obstacle_loop(mesh);
  const GeometricReference ref{volume(loop), barycenter(loop)};
  OptimizerConfig cfg;
  cfg.max_inner = 0;
  LbfgsMemory memory(cfg.memory);
  std::vector<IterationRecord> records;
  const InnerResult r = inner_solve(mesh, setup, ref, AlParameters{}, cfg,
                                    compute_mu_field(mesh, cfg.metric), memory, records);
  CHECK(r.status == InnerStatus::IterationCap);
  CHECK(r.iterations == 0);
  CHECK(records.empty());
}

TEST_CASE("a loose step tolerance makes the al loop converge immediately", "[optimizer]") {
  const TriMesh mesh = small_channel();
  const ProblemSetup setup{[](const Vec2&) { return Vec2(1.0, 0.0); }};
  OptimizerConfig cfg;
  cfg.delta_J = 10.0;  // any first step is already below tolerance
  cfg.max_outer = 3;
  const AlResult res = augmented_lagrangian_loop(mesh, setup, cfg, compute_mu_field(mesh, cfg.metric));
  CHECK(res.status == InnerStatus::Converged);
  CHECK(res.lambda_converged);
  // the start shape is feasible by construction, so λ never moves
  CHECK(res.al.lambda.norm() < 1e-9);
  CHECK(res.ref.vol0 == Catch::Approx(volume(obstacle_loop(mesh))));
}

TEST_CASE("shape distance is zero on itself and the gap on offset circles", "[optimizer]") {
  auto ngon = [](int n, double r) {
    std::vector<Vec2> pts;
    const double pi = std::acos(-1.0);
    for (int k = 0; k < n; ++k)
      pts.emplace_back(r * std::cos(2.0 * pi * k / n), r * std::sin(2.0 * pi * k / n));
    return ObstacleLoop::from_polygon(std::move(pts));
  };

  const ObstacleLoop a = ngon(128, 1.0);
  CHECK(*shape_distance(a, a) == Catch::Approx(0.0).margin(1e-12));

  // concentric circles: every normal ray crosses the other circle at |t| = 0.2,
  // so the integral is 0.2 × perimeter
  const ObstacleLoop c = ngon(128, 1.2);
  CHECK(*shape_distance(a, c) == Catch::Approx(0.2 * a.perimeter()).epsilon(1e-2));
  CHECK(*shape_distance(c, a) == Catch::Approx(0.2 * c.perimeter()).epsilon(1e-2));

  // a far-away target yields no usable pairing
  std::vector<Vec2> far{Vec2(50.0, 50.0), Vec2(50.5, 50.0), Vec2(50.0, 50.5)};
  CHECK(!shape_distance(a, ObstacleLoop::from_polygon(std::move(far))).has_value());
}
