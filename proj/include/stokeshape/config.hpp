#ifndef STOKESHAPE_CONFIG_HPP
#define STOKESHAPE_CONFIG_HPP

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "stokeshape/mesh_gen.hpp"
#include "stokeshape/optimizer.hpp"

namespace stokeshape {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// INI-style file: [section] headers, key = value lines, # or ; comments.
/// Every lookup is tracked so unknown keys can be reported with their line.
class IniFile {
 public:
  static IniFile parse(std::istream& in, const std::string& name) {
    IniFile f;
    f.name_ = name;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError(name + ":" + std::to_string(lineno) + ": unterminated section header");
        section = strip(s.substr(1, s.size() - 2));
        if (section.empty())
          throw ConfigError(name + ":" + std::to_string(lineno) + ": empty section name");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = strip(s.substr(0, eq));
      std::string value = strip(s.substr(eq + 1));
      if (const auto hash = value.find(" #"); hash != std::string::npos)
        value = strip(value.substr(0, hash));
      if (key.empty())
        throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
      const auto [it, fresh] = f.entries_.try_emplace(section + "/" + key, Entry{value, lineno});
      if (!fresh)
        throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                          "' in section [" + section + "]");
    }
    return f;
  }

  static IniFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto it = entries_.find(section + "/" + key);
    if (it == entries_.end()) return std::nullopt;
    consumed_.insert(section + "/" + key);
    return it->second.value;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return d;
    } catch (const std::exception&) {
      fail(section, key, "expected a number, got '" + *v + "'");
    }
  }

  int get_int(const std::string& section, const std::string& key, int fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    int out = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size())
      fail(section, key, "expected an integer, got '" + *v + "'");
    return out;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    return get(section, key).value_or(fallback);
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    const auto it = entries_.find(section + "/" + key);
    const std::string loc =
        it == entries_.end() ? name_ : name_ + ":" + std::to_string(it->second.line);
    throw ConfigError(loc + ": [" + section + "] " + key + ": " + what);
  }

  /// Call after reading everything: any untouched key is a config error.
  void reject_unknown() const {
    for (const auto& [full, entry] : entries_)
      if (!consumed_.count(full)) {
        const auto slash = full.find('/');
        throw ConfigError(name_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                          full.substr(slash + 1) + "' in section [" + full.substr(0, slash) + "]");
      }
  }

 private:
  struct Entry {
    std::string value;
    int line;
  };
  static std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }
  std::string name_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> consumed_;
};

enum class FlowProfile { Uniform, Parabolic };

struct ExperimentConfig {
  // mesh
  std::string mesh_source = "builtin";  // "builtin" or a .msh path
  ChannelMeshParams channel;
  // flow
  FlowProfile profile = FlowProfile::Uniform;
  double magnitude = 1.0;
  // optimizer (includes the metric)
  OptimizerConfig opt;
  // output
  std::string output_dir = "out";
  int snapshots = 0;  // write a VTU every N accepted steps; 0 = off
  unsigned seed = 42;

  static ExperimentConfig from_file(const std::string& path) {
    const IniFile ini = IniFile::parse_file(path);
    return from_ini(ini);
  }

  static ExperimentConfig from_ini(const IniFile& ini) {
    ExperimentConfig c;
    c.mesh_source = ini.get_string("mesh", "source", c.mesh_source);
    c.channel.x_min = ini.get_double("mesh", "x_min", c.channel.x_min);
    c.channel.x_max = ini.get_double("mesh", "x_max", c.channel.x_max);
    c.channel.y_min = ini.get_double("mesh", "y_min", c.channel.y_min);
    c.channel.y_max = ini.get_double("mesh", "y_max", c.channel.y_max);
    c.channel.center.x() = ini.get_double("mesh", "center_x", c.channel.center.x());
    c.channel.center.y() = ini.get_double("mesh", "center_y", c.channel.center.y());
    c.channel.radius = ini.get_double("mesh", "radius", c.channel.radius);
    c.channel.n_obstacle = ini.get_int("mesh", "n_obstacle", c.channel.n_obstacle);
    c.channel.growth = ini.get_double("mesh", "growth", c.channel.growth);
    c.channel.h_far = ini.get_double("mesh", "h_far", c.channel.h_far);

    const std::string prof = ini.get_string("flow", "profile", "uniform");
    if (prof == "uniform")
      c.profile = FlowProfile::Uniform;
    else if (prof == "parabolic")
      c.profile = FlowProfile::Parabolic;
    else
      ini.fail("flow", "profile", "expected 'uniform' or 'parabolic', got '" + prof + "'");
    c.magnitude = ini.get_double("flow", "magnitude", c.magnitude);

    MetricConfig& m = c.opt.metric;
    const std::string kind = ini.get_string("metric", "kind", "steklov_poincare");
    if (kind == "steklov_poincare")
      m.kind = MetricKind::SteklovPoincare;
    else if (kind == "laplace_beltrami")
      m.kind = MetricKind::LaplaceBeltrami;
    else
      ini.fail("metric", "kind",
               "expected 'steklov_poincare' or 'laplace_beltrami', got '" + kind + "'");
    m.A = ini.get_double("metric", "A", m.A);
    // Young/Poisson input is accepted, but explicit Lamé values win.
    const auto E = ini.get("metric", "E");
    const auto nu = ini.get("metric", "nu");
    if (E && nu) {
      const auto [lam, mu] = lame_from_young_poisson(ini.get_double("metric", "E", 0.0),
                                                     ini.get_double("metric", "nu", 0.0));
      m.lambda_elas = lam;
      m.mu_min = m.mu_max = mu;
    } else if (E || nu) {
      ini.fail("metric", E ? "E" : "nu", "E and nu must be given together");
    }
    m.mu_min = ini.get_double("metric", "mu_min", m.mu_min);
    m.mu_max = ini.get_double("metric", "mu_max", m.mu_max);
    m.lambda_elas = ini.get_double("metric", "lambda_elas", m.lambda_elas);
    if (!(m.A > 0.0)) ini.fail("metric", "A", "must be positive");
    if (!(m.mu_min > 0.0) || m.mu_max < m.mu_min)
      ini.fail("metric", "mu_min", "need 0 < mu_min <= mu_max");

    OptimizerConfig& o = c.opt;
    o.memory = ini.get_int("optimizer", "m", o.memory);
    o.delta_J = ini.get_double("optimizer", "delta_J", o.delta_J);
    o.delta_c = ini.get_double("optimizer", "delta_c", o.delta_c);
    o.mu_pen0 = ini.get_double("optimizer", "mu_pen", o.mu_pen0);
    o.mu_inc = ini.get_double("optimizer", "mu_inc", o.mu_inc);
    o.lambda_tol = ini.get_double("optimizer", "lambda_tol", o.lambda_tol);
    o.max_inner = ini.get_int("optimizer", "max_inner", o.max_inner);
    o.max_outer = ini.get_int("optimizer", "max_outer", o.max_outer);
    o.step.initial_scale = ini.get_double("optimizer", "initial_scale", o.step.initial_scale);
    o.step.backtrack = ini.get_double("optimizer", "backtrack", o.step.backtrack);
    o.step.max_backtracks = ini.get_int("optimizer", "max_backtracks", o.step.max_backtracks);
    o.step.quality_cap = ini.get_double("optimizer", "quality_cap", o.step.quality_cap);
    o.step.armijo_c1 = ini.get_double("optimizer", "armijo_c1", o.step.armijo_c1);
    if (!(o.delta_J > 0.0)) ini.fail("optimizer", "delta_J", "must be positive");
    if (!(o.mu_inc > 1.0)) ini.fail("optimizer", "mu_inc", "must exceed 1");
    if (o.memory < 0) ini.fail("optimizer", "m", "must be >= 0");
    if (!(o.mu_pen0 > 0.0)) ini.fail("optimizer", "mu_pen", "must be positive");

    c.output_dir = ini.get_string("output", "directory", c.output_dir);
    c.snapshots = ini.get_int("output", "snapshots", c.snapshots);
    c.seed = static_cast<unsigned>(ini.get_int("output", "seed", static_cast<int>(c.seed)));

    ini.reject_unknown();
    return c;
  }

  /// Inflow/outflow Dirichlet profile over the channel cross-section.
  std::function<Vec2(const Vec2&)> inflow_function(double y_min, double y_max) const {
    const double mag = magnitude;
    if (profile == FlowProfile::Uniform)
      return [mag](const Vec2&) { return Vec2(mag, 0.0); };
    const double mid = 0.5 * (y_min + y_max);
    const double half = 0.5 * (y_max - y_min);
    return [mag, mid, half](const Vec2& p) {
      const double t = (p.y() - mid) / half;
      return Vec2(mag * (1.0 - t * t), 0.0);
    };
  }
};

}  // namespace stokeshape

#endif  // STOKESHAPE_CONFIG_HPP
