#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <stokeshape/gmsh_io.hpp>
#include <stokeshape/shape_calculus.hpp>

using namespace stokeshape;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string output;  // stdout + stderr
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli_output.txt";
  const std::string cmd =
      std::string(STOKESHAPE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  const int code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return {code, slurp(log)};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// tiny but valid problem: coarse channel, two inner steps at most
constexpr const char* kTinyConfig =
    "[mesh]\n"
    "n_obstacle = 32\n"
    "h_far = 0.8\n"
    "[optimizer]\n"
    "max_inner = 2\n"
    "max_outer = 1\n"
    "delta_J = 1e-6\n";

// strips the per-row wall-clock column so reruns compare equal
std::string mask_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out << line.substr(0, comma) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("gen-mesh writes a loadable mesh with the requested obstacle", "[cli]") {
  const fs::path dir = fresh_dir("stokeshape_cli_genmesh");
  const fs::path msh = dir / "channel.msh";
  const CliResult r =
      run_cli("gen-mesh --output " + msh.string() + " --n-obstacle 64 --h-far 0.5", dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("wrote " + msh.string()) != std::string::npos);

  const TriMesh mesh = load_gmsh(msh.string());
  const ObstacleLoop loop = obstacle_loop(mesh);
  CHECK(loop.n_vertices() == 64);
  const double pi = std::acos(-1.0);
  CHECK(volume(loop) == Catch::Approx(0.5 * 64 * 0.25 * std::sin(2 * pi / 64)).epsilon(1e-10));
}

TEST_CASE("gen-mesh refuses an obstacle that leaves the channel", "[cli]") {
  const fs::path dir = fresh_dir("stokeshape_cli_genmesh_bad");
  const CliResult r = run_cli("gen-mesh --output " + (dir / "x.msh").string() + " --radius 3", dir);
  CHECK(r.code == 4);
  CHECK(r.output.find("does not fit") != std::string::npos);
  CHECK(!fs::exists(dir / "x.msh"));
}

TEST_CASE("run produces the documented artifacts", "[cli]") {
  const fs::path dir = fresh_dir("stokeshape_cli_run");
  const fs::path cfg = dir / "experiment.ini";
  // loose tolerance: the feasible start is already stationary enough
  write_file(cfg,
             "[mesh]\nn_obstacle = 32\nh_far = 0.8\n"
             "[optimizer]\nmax_inner = 2\nmax_outer = 1\ndelta_J = 10\n");
  const CliResult r =
      run_cli("run --config " + cfg.string() + " --output " + (dir / "out").string(), dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("status converged") != std::string::npos);

  for (const char* name :
       {"run.csv", "multipliers.csv", "final.vtu", "final.msh", "summary.json",
        "config_echo.ini"}) {
    INFO(name);
    CHECK(fs::exists(dir / "out" / name));
  }
  const std::string summary = slurp(dir / "out" / "summary.json");
  CHECK(summary.find("\"status\": \"converged\"") != std::string::npos);
  CHECK(summary.find("\"exit_code\": 0") != std::string::npos);
  CHECK(summary.find("\"metric\": \"steklov_poincare\"") != std::string::npos);
  // the echoed config is byte-identical to the input
  CHECK(slurp(dir / "out" / "config_echo.ini") == slurp(cfg));
}

TEST_CASE("run is deterministic and snapshots follow the cadence", "[cli]") {
  const fs::path dir = fresh_dir("stokeshape_cli_det");
  const fs::path cfg = dir / "experiment.ini";
  write_file(cfg, kTinyConfig);

  const CliResult a = run_cli("run --config " + cfg.string() + " --output " +
                                  (dir / "a").string() + " --snapshots 1",
                              dir);
  const CliResult b =
      run_cli("run --config " + cfg.string() + " --output " + (dir / "b").string(), dir);
  // two accepted steps against a budget of two: the iteration cap is the outcome
  CHECK(a.code == 3);
  CHECK(b.code == 3);

  CHECK(mask_seconds(slurp(dir / "a" / "run.csv")) == mask_seconds(slurp(dir / "b" / "run.csv")));
  CHECK(slurp(dir / "a" / "multipliers.csv") == slurp(dir / "b" / "multipliers.csv"));
  CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));

  CHECK(fs::exists(dir / "a" / "shape_0001.vtu"));
  CHECK(fs::exists(dir / "a" / "shape_0002.vtu"));
  CHECK(!fs::exists(dir / "b" / "shape_0001.vtu"));  // snapshots off by default
}

TEST_CASE("compare runs both metrics and joins their histories", "[cli]") {
  const fs::path dir = fresh_dir("stokeshape_cli_compare");
  const fs::path cfg = dir / "experiment.ini";
  write_file(cfg,
             "[mesh]\nn_obstacle = 32\nh_far = 0.8\n"
             "[optimizer]\nmax_inner = 1\nmax_outer = 1\ndelta_J = 1e-6\n");
  const CliResult r =
      run_cli("compare --config " + cfg.string() + " --output " + (dir / "out").string(), dir);
  CHECK(r.code == 3);

  CHECK(fs::exists(dir / "out" / "steklov_poincare" / "summary.json"));
  CHECK(fs::exists(dir / "out" / "laplace_beltrami" / "summary.json"));
  const std::string joined = slurp(dir / "out" / "compare.csv");
  CHECK(joined.find("iter,J_sp,quality_sp,J_lb,quality_lb") == 0);
  CHECK(std::count(joined.begin(), joined.end(), '\n') >= 2);  // header + one row
  CHECK(slurp(dir / "out" / "laplace_beltrami" / "summary.json")
            .find("\"metric\": \"laplace_beltrami\"") != std::string::npos);
}

TEST_CASE("config mistakes exit with the config code", "[cli]") {
  const fs::path dir = fresh_dir("stokeshape_cli_badcfg");
  const fs::path cfg = dir / "experiment.ini";

  write_file(cfg, "[optimizer]\nmax_inner = soon\n");
  CHECK(run_cli("run --config " + cfg.string(), dir).code == 4);

  write_file(cfg, "[mesh]\nn_obstcle = 32\n");  // typo
  const CliResult r = run_cli("run --config " + cfg.string(), dir);
  CHECK(r.code == 4);
  CHECK(r.output.find("unknown key 'n_obstcle'") != std::string::npos);

  // argument errors are caught by the parser, not the config layer
  CHECK(run_cli("run", dir).code != 0);
  CHECK(run_cli("frobnicate", dir).code != 0);
  CHECK(run_cli("run --config " + (dir / "nope.ini").string(), dir).code != 0);
}

TEST_CASE("verify detects an injected sign error in the gradient", "[cli][verify]") {
  const fs::path dir = fresh_dir("stokeshape_cli_verify");
  const CliResult r = run_cli("verify --flip-sign", dir);
  CHECK(r.code == 1);
  CHECK(r.output.find("FAIL gradient_fd") != std::string::npos);
  // the sign flip must not disturb the unrelated checks
  CHECK(r.output.find("PASS stokes_convergence") != std::string::npos);
  CHECK(r.output.find("PASS geometry_polygons") != std::string::npos);
  CHECK(r.output.find("PASS riesz_property") != std::string::npos);
}
