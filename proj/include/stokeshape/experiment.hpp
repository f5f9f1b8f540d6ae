#ifndef STOKESHAPE_EXPERIMENT_HPP
#define STOKESHAPE_EXPERIMENT_HPP

#include <filesystem>
#include <random>
#include <thread>

#include <json.hpp>

#include "stokeshape/config.hpp"
#include "stokeshape/gmsh_io.hpp"
#include "stokeshape/version.hpp"
#include "stokeshape/vtu_io.hpp"

namespace stokeshape {

/// Process exit codes shared by the CLI and the test suite.
struct ExitCode {
  static constexpr int kOk = 0;
  static constexpr int kInternal = 1;
  static constexpr int kMeshInvalid = 2;
  static constexpr int kIterationCap = 3;
  static constexpr int kConfig = 4;
  static constexpr int kStalled = 5;
};

inline int exit_code_for(InnerStatus s, bool lambda_converged) {
  switch (s) {
    case InnerStatus::Converged:
      return lambda_converged ? ExitCode::kOk : ExitCode::kIterationCap;
    case InnerStatus::MeshInvalid: return ExitCode::kMeshInvalid;
    case InnerStatus::IterationCap: return ExitCode::kIterationCap;
    case InnerStatus::Stalled: return ExitCode::kStalled;
  }
  return ExitCode::kInternal;
}

namespace detail {

inline std::string csv_num(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace detail

inline void write_run_csv(const std::vector<IterationRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  out << "iter,J,L_A,c_norm,worst_quality,step_norm,scale,seconds\n";
  for (const auto& r : records)
    out << r.iter << ',' << detail::csv_num(r.J) << ',' << detail::csv_num(r.L_A) << ','
        << detail::csv_num(r.c_norm) << ',' << detail::csv_num(r.worst_quality) << ','
        << detail::csv_num(r.step_norm) << ',' << detail::csv_num(r.scale) << ','
        << detail::csv_num(r.seconds) << '\n';
}

inline void write_multipliers_csv(const std::vector<OuterRecord>& outer, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  out << "k,lambda_bcx,lambda_bcy,lambda_vol,mu_pen,c_norm,inner_iterations,dist_to_final\n";
  const Eigen::Vector3d last = outer.empty() ? Eigen::Vector3d::Zero() : outer.back().lambda;
  for (const auto& r : outer)
    out << r.k << ',' << detail::csv_num(r.lambda[0]) << ',' << detail::csv_num(r.lambda[1]) << ','
        << detail::csv_num(r.lambda[2]) << ',' << detail::csv_num(r.mu_pen) << ','
        << detail::csv_num(r.c_norm) << ',' << r.inner_iterations << ','
        << detail::csv_num((r.lambda - last).norm()) << '\n';
}

/// Vertex-sampled solution snapshot: velocity (P2 restricted to vertices),
/// pressure, the μ field, and per-cell quality.
inline void write_solution_vtu(const TriMesh& mesh, const StokesSolution& sol,
                               const LameField& lame, const std::string& path) {
  VtuFields fields;
  std::vector<Vec2> vel(static_cast<std::size_t>(mesh.n_vertices()));
  for (int v = 0; v < mesh.n_vertices(); ++v)
    vel[v] = {sol.velocity[2 * v], sol.velocity[2 * v + 1]};
  fields.point_vectors.emplace_back("velocity", std::move(vel));
  fields.point_scalars.emplace_back(
      "pressure", std::vector<double>(sol.pressure.data(), sol.pressure.data() + mesh.n_vertices()));
  fields.point_scalars.emplace_back(
      "mu_elas", std::vector<double>(lame.mu_nodal.data(), lame.mu_nodal.data() + mesh.n_vertices()));
  fields.cell_scalars.emplace_back("quality", element_quality(mesh).per_element);
  write_vtu(mesh, fields, path);
}

/// Builds the configured mesh (generator or MSH file).
inline TriMesh make_mesh(const ExperimentConfig& cfg) {
  if (cfg.mesh_source == "builtin") return channel_mesh(cfg.channel);
  return load_gmsh(cfg.mesh_source);
}

inline std::function<Vec2(const Vec2&)> make_inflow(const ExperimentConfig& cfg,
                                                    const TriMesh& mesh) {
  double y_min = mesh.vertices()[0].y(), y_max = y_min;
  for (const Vec2& p : mesh.vertices()) {
    y_min = std::min(y_min, p.y());
    y_max = std::max(y_max, p.y());
  }
  return cfg.inflow_function(y_min, y_max);
}

struct RunArtifacts {
  int exit_code = ExitCode::kInternal;
  std::string status;
  double final_J = 0.0;
  double final_c_norm = 0.0;
  double worst_quality = 0.0;
  int inner_iterations = 0;
  int outer_iterations = 0;
};

/// Full single-metric experiment: optimize, write run.csv, multipliers.csv,
/// snapshots, final fields, final mesh, and summary.json into out_dir.
inline RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                   const std::string& config_echo = "") {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  if (!config_echo.empty()) {
    std::ofstream echo(fs::path(out_dir) / "config_echo.ini", std::ios::binary);
    echo << config_echo;
  }

  const TriMesh mesh0 = make_mesh(cfg);
  const ProblemSetup setup{make_inflow(cfg, mesh0)};
  const LameField lame = compute_mu_field(mesh0, cfg.opt.metric);

  StepObserver observer;
  if (cfg.snapshots > 0) {
    observer = [&, every = cfg.snapshots](const TriMesh& m, const IterationRecord& rec) {
      if (rec.iter % every != 0) return;
      char name[32];
      std::snprintf(name, sizeof(name), "shape_%04d.vtu", rec.iter);
      VtuFields f;
      f.cell_scalars.emplace_back("quality", element_quality(m).per_element);
      write_vtu(m, f, (fs::path(out_dir) / name).string());
    };
  }
  AlResult res = augmented_lagrangian_loop(mesh0, setup, cfg.opt, lame, observer);

  write_run_csv(res.records, (fs::path(out_dir) / "run.csv").string());
  write_multipliers_csv(res.outer, (fs::path(out_dir) / "multipliers.csv").string());

  const StokesSolution sol = solve_stokes(res.mesh, setup.v_inflow);
  write_solution_vtu(res.mesh, sol, lame, (fs::path(out_dir) / "final.vtu").string());
  write_msh22(res.mesh, (fs::path(out_dir) / "final.msh").string());

  RunArtifacts art;
  art.exit_code = exit_code_for(res.status, res.lambda_converged);
  art.status = res.lambda_converged ? "converged" : to_string(res.status);
  art.final_J = sol.dissipation;
  art.final_c_norm = constraints(obstacle_loop(res.mesh), res.ref).norm();
  art.worst_quality = element_quality(res.mesh).worst;
  art.inner_iterations = res.total_inner;
  art.outer_iterations = static_cast<int>(res.outer.size());

  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["status"] = art.status;
  j["exit_code"] = art.exit_code;
  j["final_J"] = art.final_J;
  j["final_c_norm"] = art.final_c_norm;
  j["worst_quality"] = art.worst_quality;
  j["inner_iterations"] = art.inner_iterations;
  j["outer_iterations"] = art.outer_iterations;
  j["lambda"] = {res.al.lambda[0], res.al.lambda[1], res.al.lambda[2]};
  j["mu_pen"] = res.al.mu_pen;
  j["metric"] = to_string(cfg.opt.metric.kind);
  j["mesh"] = {{"vertices", res.mesh.n_vertices()},
               {"triangles", res.mesh.n_triangles()},
               {"obstacle_edges", obstacle_loop(res.mesh).n_edges()}};
  std::ofstream summary(fs::path(out_dir) / "summary.json", std::ios::binary);
  summary << j.dump(2) << '\n';
  return art;
}

/// Both metrics from the identical initial mesh, in parallel; emits a joined
/// per-iteration CSV next to the two per-run directories. A failing leg is
/// an experiment outcome, not an orchestration error.
inline int compare_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                              const std::string& config_echo = "") {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  ExperimentConfig sp = cfg, lb = cfg;
  sp.opt.metric.kind = MetricKind::SteklovPoincare;
  lb.opt.metric.kind = MetricKind::LaplaceBeltrami;

  RunArtifacts art_sp, art_lb;
  std::exception_ptr err_sp, err_lb;
  std::thread t_sp([&] {
    try {
      art_sp = run_experiment(sp, (fs::path(out_dir) / "steklov_poincare").string(), config_echo);
    } catch (...) {
      err_sp = std::current_exception();
    }
  });
  std::thread t_lb([&] {
    try {
      art_lb = run_experiment(lb, (fs::path(out_dir) / "laplace_beltrami").string(), config_echo);
    } catch (...) {
      err_lb = std::current_exception();
    }
  });
  t_sp.join();
  t_lb.join();
  if (err_sp) std::rethrow_exception(err_sp);
  if (err_lb) std::rethrow_exception(err_lb);

  // joined CSV from the two run.csv files
  auto load_rows = [&](const std::string& leg) {
    std::ifstream in(fs::path(out_dir) / leg / "run.csv");
    std::vector<std::array<std::string, 2>> rows;  // J, worst_quality
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::array<std::string, 8> cells;
      std::stringstream ss(line);
      for (auto& c : cells) std::getline(ss, c, ',');
      rows.push_back({cells[1], cells[4]});
    }
    return rows;
  };
  const auto rows_sp = load_rows("steklov_poincare");
  const auto rows_lb = load_rows("laplace_beltrami");
  std::ofstream out(fs::path(out_dir) / "compare.csv", std::ios::binary);
  out << "iter,J_sp,quality_sp,J_lb,quality_lb\n";
  for (std::size_t i = 0; i < std::max(rows_sp.size(), rows_lb.size()); ++i) {
    out << (i + 1) << ',';
    if (i < rows_sp.size()) out << rows_sp[i][0] << ',' << rows_sp[i][1];
    else out << ',';
    out << ',';
    if (i < rows_lb.size()) out << rows_lb[i][0] << ',' << rows_lb[i][1];
    else out << ',';
    out << '\n';
  }
  return art_sp.exit_code != ExitCode::kOk ? art_sp.exit_code : art_lb.exit_code;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_EXPERIMENT_HPP
