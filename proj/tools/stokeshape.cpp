// Command-line front end: run / compare / gen-mesh / verify.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <stokeshape/experiment.hpp>
#include <stokeshape/verification.hpp>

namespace {

using namespace stokeshape;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_gen_mesh(const ChannelMeshParams& prm, const std::string& out_path) {
  const double margin = 1e-9 * (prm.x_max - prm.x_min);
  if (prm.radius <= 0.0 || prm.x_max <= prm.x_min || prm.y_max <= prm.y_min)
    throw ConfigError("gen-mesh: degenerate geometry");
  if (prm.center.x() - prm.radius <= prm.x_min + margin ||
      prm.center.x() + prm.radius >= prm.x_max - margin ||
      prm.center.y() - prm.radius <= prm.y_min + margin ||
      prm.center.y() + prm.radius >= prm.y_max - margin)
    throw ConfigError("gen-mesh: obstacle does not fit strictly inside the channel box");
  const TriMesh mesh = channel_mesh(prm);
  write_msh22(mesh, out_path);
  std::cout << "wrote " << out_path << ": " << mesh.n_vertices() << " vertices, "
            << mesh.n_triangles() << " triangles, worst quality "
            << element_quality(mesh).worst << "\n";
  return ExitCode::kOk;
}

int cmd_verify(bool flip_sign) {
  bool ok = true;
  auto report = [&](bool pass, const std::string& line) {
    std::cout << (pass ? "PASS " : "FAIL ") << line << "\n";
    ok = ok && pass;
  };

  {
    const ConvergenceStudy s = run_convergence_study(3, 8);
    const double ov = *std::min_element(s.order_v.begin(), s.order_v.end());
    const double op = *std::min_element(s.order_p.begin(), s.order_p.end());
    const double jrel = std::abs(s.poiseuille_J.front() - PoiseuilleSolution::dissipation) /
                        PoiseuilleSolution::dissipation;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "stokes_convergence (velocity order %.2f, pressure order %.2f, "
                  "poiseuille J rel err %.1e)",
                  ov, op, jrel);
    report(ov >= 2.8 && op >= 1.8 && jrel <= 1e-3, buf);
  }
  {
    ChannelMeshParams prm;
    prm.n_obstacle = 96;
    prm.h_far = 0.30;
    const FdCheck fd = run_fd_check(channel_mesh(prm), 3, 1e-4, 17, flip_sign);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "gradient_fd (max rel err %.1e over %zu fields)",
                  fd.max_rel, fd.rel_errors.size());
    report(fd.max_rel <= 5e-2, buf);
  }
  {
    const PolygonOracle po = run_polygon_oracle(100, 3);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "geometry_polygons (volume rel %.1e, barycenter rel %.1e)",
                  po.max_vol_rel, po.max_bc_rel);
    report(po.max_vol_rel <= 1e-12 && po.max_bc_rel <= 1e-12, buf);
  }
  {
    ChannelMeshParams prm;
    prm.n_obstacle = 96;
    prm.h_far = 0.30;
    const RieszCheck rc = run_riesz_check(channel_mesh(prm), MetricConfig{}, 10, 5);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "riesz_property (steklov_poincare %.1e, laplace_beltrami %.1e)",
                  rc.max_rel_sp, rc.max_rel_lb);
    report(rc.max_rel_sp <= 1e-8 && rc.max_rel_lb <= 1e-8, buf);
  }
  return ok ? ExitCode::kOk : ExitCode::kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shape optimization of an obstacle in a 2D Stokes channel"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  int snapshots = -1;
  bool paper = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration file (INI)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--output", output_dir, "override the configured output directory");
    sub->add_option("--snapshots", snapshots, "write shape_%04d.vtu every N accepted steps");
    sub->add_flag("--paper-scale", paper, "use the fine builtin mesh preset");
  };

  CLI::App* run = app.add_subcommand("run", "optimize with the configured metric");
  add_common(run);
  CLI::App* cmp = app.add_subcommand("compare", "run both metrics and join their histories");
  add_common(cmp);

  CLI::App* gen = app.add_subcommand("gen-mesh", "generate a channel mesh (Gmsh 2.2 ASCII)");
  ChannelMeshParams gprm;
  std::string gen_out = "mesh.msh";
  bool gen_paper = false;
  gen->add_option("--output", gen_out, "output .msh path");
  gen->add_option("--x-min", gprm.x_min);
  gen->add_option("--x-max", gprm.x_max);
  gen->add_option("--y-min", gprm.y_min);
  gen->add_option("--y-max", gprm.y_max);
  gen->add_option("--center-x", gprm.center.x());
  gen->add_option("--center-y", gprm.center.y());
  gen->add_option("--radius", gprm.radius);
  gen->add_option("--n-obstacle", gprm.n_obstacle, "segments on the obstacle circle");
  gen->add_option("--h-far", gprm.h_far, "target mesh size away from the obstacle");
  gen->add_option("--growth", gprm.growth, "ring-to-ring size growth factor");
  gen->add_flag("--paper-scale", gen_paper, "use the fine builtin mesh preset");

  CLI::App* ver = app.add_subcommand("verify", "run the built-in correctness checks");
  bool flip = false;
  ver->add_flag("--flip-sign", flip)->group("");  // fault injection, intentionally hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || cmp->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      if (snapshots >= 0) cfg.snapshots = snapshots;
      if (paper && cfg.mesh_source == "builtin") cfg.channel = paper_scale_channel_params();
      const std::string echo = slurp(config_path);
      if (run->parsed()) {
        const RunArtifacts art = run_experiment(cfg, cfg.output_dir, echo);
        std::cout << "status " << art.status << ": J = " << art.final_J
                  << ", |c| = " << art.final_c_norm << ", inner iterations "
                  << art.inner_iterations << ", worst quality " << art.worst_quality << "\n"
                  << "outputs in " << cfg.output_dir << "\n";
        return art.exit_code;
      }
      const int code = compare_experiment(cfg, cfg.output_dir, echo);
      std::cout << "outputs in " << cfg.output_dir << "\n";
      return code;
    }
    if (gen->parsed()) {
      if (gen_paper) {
        const ChannelMeshParams fine = paper_scale_channel_params();
        gprm.n_obstacle = fine.n_obstacle;
        gprm.h_far = fine.h_far;
        gprm.growth = fine.growth;
      }
      return cmd_gen_mesh(gprm, gen_out);
    }
    return cmd_verify(flip);
  } catch (const stokeshape::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return stokeshape::ExitCode::kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stokeshape::ExitCode::kInternal;
  }
}
