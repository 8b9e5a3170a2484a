/// @file driver.hpp
/// @brief Run configuration, the run / convergence / wb-table / sweep drivers
/// and their CSV and JSON writers.
///
/// Config files are flat key-value INI (keys at top level or in a [run]
/// section) or JSON (an object, or a run manifest whose "config" member is
/// used). Both are read into the same string map and parsed by one schema, so
/// a manifest written by run() is itself a valid config.
#pragma once

#include <Eigen/Core>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "anelastic/cases.hpp"
#include "json.hpp"

namespace anelastic {

inline constexpr const char* version = "1.0.0";

/// Snapshot times, or every N steps. Initial and final states are always written.
struct SnapshotSchedule {
  std::vector<double> times;
  int every = 0;

  /// "" (none), "every:N" or a comma list of times.
  static SnapshotSchedule parse(const std::string& s);
  std::string str() const;
};

struct RunConfig {
  Scenario scenario;
  std::vector<double> eps_list;  // resolved eps values; one for run
  std::vector<std::string> potentials{"linear", "quadratic", "sinusoidal"};  // wb-table
  SnapshotSchedule snapshots;
  std::filesystem::path out_dir;
  bool reference = false;  // also write the explicit reference solution (1D)
};

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_number(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9)
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

inline std::vector<double> parse_numbers(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_number(key, item));
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + fmt17(x);
  return s;
}

}  // namespace detail

inline SnapshotSchedule SnapshotSchedule::parse(const std::string& raw) {
  SnapshotSchedule s;
  const std::string v = detail::trim(raw);
  if (v.empty() || v == "none") return s;
  if (v.rfind("every:", 0) == 0) {
    s.every = detail::parse_int("snapshots", v.substr(6));
    if (s.every <= 0) throw ConfigError("snapshots every:N needs N > 0");
    return s;
  }
  s.times = detail::parse_numbers("snapshots", v);
  for (double t : s.times)
    if (!(t >= 0.0)) throw ConfigError("snapshot times must be non-negative");
  std::sort(s.times.begin(), s.times.end());
  return s;
}

inline std::string SnapshotSchedule::str() const {
  if (every > 0) return "every:" + std::to_string(every);
  return detail::join(times);
}

/// Keys accepted in config files and written to manifests.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "scenario", "eps", "zeta", "gamma", "c0", "potential", "potentials", "shape",
      "boundary", "final_time", "mesh", "dt_policy", "tableau", "beta", "well_balanced",
      "limiter", "velocity_amplitude", "domain_lower", "domain_upper", "snapshots", "out",
      "reference"};
  return keys;
}

inline KeyValues read_ini(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot read config '" + path.string() + "': " + e.message());
  }
  KeyValues kv;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      kv[key] = detail::trim(node.data());
    } else if (key == "run") {
      for (const auto& [k, v] : node) kv[k] = detail::trim(v.data());
    } else {
      throw ConfigError("unknown config section [" + key + "] (only [run] is allowed)");
    }
  }
  return kv;
}

inline KeyValues read_json_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse JSON config '" + path.string() + "': " + e.what());
  }
  if (j.is_object() && j.contains("config")) j = j["config"];
  if (!j.is_object()) throw ConfigError("JSON config must be an object");
  KeyValues kv;
  for (const auto& [key, v] : j.items()) {
    if (v.is_string()) {
      kv[key] = v.get<std::string>();
    } else if (v.is_boolean()) {
      kv[key] = v.get<bool>() ? "true" : "false";
    } else if (v.is_number()) {
      kv[key] = detail::fmt17(v.get<double>());
    } else if (v.is_array()) {
      std::string s;
      for (const auto& e : v) {
        const std::string item = e.is_string() ? e.get<std::string>() : detail::fmt17(e.get<double>());
        s += (s.empty() ? "" : ",") + item;
      }
      kv[key] = s;
    } else if (!v.is_null()) {
      throw ConfigError("config key '" + key + "' has an unsupported JSON type");
    }
  }
  return kv;
}

inline KeyValues read_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' not found");
  return path.extension() == ".json" ? read_json_config(path) : read_ini(path);
}

/// Builds a RunConfig from key-values: the named built-in scenario with every
/// other key applied as an override.
inline RunConfig resolve_config(const KeyValues& kv) {
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  for (const auto& [k, v] : kv)
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
  const auto it = kv.find("scenario");
  if (it == kv.end() || it->second.empty()) throw ConfigError("config needs a 'scenario' key");
  RunConfig rc;
  Scenario& s = rc.scenario;
  s = builtin_scenario(it->second);
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto f = kv.find(k);
    if (f == kv.end()) return std::nullopt;
    return f->second;
  };
  if (auto v = get("gamma")) s.gamma = detail::parse_number("gamma", *v);
  if (auto v = get("c0")) s.c0 = detail::parse_number("c0", *v);
  if (auto v = get("potential")) s.potential = *v;
  if (auto v = get("shape")) s.shape = *v;
  if (auto v = get("boundary")) s.boundary = boundary_kind_from_string(*v);
  if (auto v = get("final_time")) s.final_time = detail::parse_number("final_time", *v);
  if (auto v = get("mesh")) {
    s.meshes.clear();
    for (const auto& m : detail::split_list(*v)) s.meshes.push_back(detail::parse_int("mesh", m));
  }
  if (auto v = get("dt_policy")) s.dt = DtPolicy::parse(*v);
  if (auto v = get("tableau")) s.tableau = *v;
  if (auto v = get("beta")) s.beta = detail::parse_number("beta", *v);
  if (auto v = get("well_balanced")) s.well_balanced = detail::parse_bool("well_balanced", *v);
  if (auto v = get("limiter")) s.limiter = limiter_from_string(*v);
  if (auto v = get("velocity_amplitude"))
    s.velocity_amplitude = detail::parse_number("velocity_amplitude", *v);
  for (const char* key : {"domain_lower", "domain_upper"}) {
    if (auto v = get(key)) {
      const auto xs = detail::parse_numbers(key, *v);
      if (static_cast<int>(xs.size()) != s.dim)
        throw ConfigError(std::string("'") + key + "' needs " + std::to_string(s.dim) + " values");
      auto& dst = std::string(key) == "domain_lower" ? s.lower : s.upper;
      for (int a = 0; a < s.dim; ++a) dst[a] = xs[a];
    }
  }
  if (auto v = get("eps")) {
    rc.eps_list = detail::parse_numbers("eps", *v);
    if (!rc.eps_list.empty()) s.eps = rc.eps_list.front();
  } else {
    rc.eps_list = {s.eps};
  }
  if (auto v = get("zeta")) {
    const std::string z = detail::trim(*v);
    if (z == "eps") {
      s.zeta_value.reset();
      s.zeta_power = 1;
    } else if (z.rfind("eps^", 0) == 0) {
      s.zeta_value.reset();
      s.zeta_power = detail::parse_int("zeta", z.substr(4));
    } else {
      s.zeta_value = detail::parse_number("zeta", z);
    }
  }
  if (auto v = get("potentials")) rc.potentials = detail::split_list(*v);
  if (auto v = get("snapshots")) rc.snapshots = SnapshotSchedule::parse(*v);
  if (auto v = get("reference")) rc.reference = detail::parse_bool("reference", *v);
  if (auto v = get("out")) rc.out_dir = *v;
  for (double e : rc.eps_list)
    if (!(e > 0.0)) throw ConfigError("eps must be positive");
  s.validate();
  return rc;
}

/// Resolved configuration as key-values (the inverse of resolve_config).
inline nlohmann::json config_to_json(const RunConfig& rc) {
  const Scenario& s = rc.scenario;
  nlohmann::json j;
  j["scenario"] = s.name;
  j["eps"] = rc.eps_list.size() == 1 ? nlohmann::json(rc.eps_list.front()) : nlohmann::json(rc.eps_list);
  if (s.zeta_value)
    j["zeta"] = *s.zeta_value;
  else
    j["zeta"] = "eps^" + std::to_string(s.zeta_power);
  j["gamma"] = s.gamma;
  j["c0"] = s.c0;
  j["potential"] = s.potential;
  j["potentials"] = rc.potentials;
  j["shape"] = s.shape;
  j["boundary"] = to_string(s.boundary);
  j["final_time"] = s.final_time;
  j["mesh"] = s.meshes;
  j["dt_policy"] = s.dt.str();
  j["tableau"] = s.tableau;
  j["beta"] = s.beta;
  j["well_balanced"] = s.well_balanced;
  j["limiter"] = to_string(s.limiter);
  j["velocity_amplitude"] = s.velocity_amplitude;
  j["domain_lower"] = std::vector<double>(s.lower.begin(), s.lower.begin() + s.dim);
  j["domain_upper"] = std::vector<double>(s.upper.begin(), s.upper.begin() + s.dim);
  j["snapshots"] = rc.snapshots.str();
  j["out"] = rc.out_dir.string();
  j["reference"] = rc.reference;
  return j;
}

/// Output directory precedence: explicit argument, then ANELASTIC_OUT_DIR,
/// then the config value, then runs/<scenario>.
inline std::filesystem::path resolve_out_dir(const RunConfig& rc, const std::string& cli_out = "") {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("ANELASTIC_OUT_DIR"); env != nullptr && *env != '\0') return env;
  if (!rc.out_dir.empty()) return rc.out_dir;
  return std::filesystem::path("runs") / rc.scenario.name;
}

// ---------------------------------------------------------------- writers

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
  }
  void header(const std::vector<std::string>& cols) {
    std::string line;
    for (const auto& c : cols) line += (line.empty() ? "" : ",") + c;
    out_ << line << '\n';
  }
  void row(const std::vector<double>& values) {
    std::string line;
    for (double v : values) line += (line.empty() ? "" : ",") + detail::fmt17(v);
    out_ << line << '\n';
  }
  void raw(const std::string& line) { out_ << line << '\n'; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Columns x[,y],rho,q1[,q2]; rows ordered with x fastest.
inline void write_snapshot(const std::filesystem::path& path, const State& s) {
  const Grid& g = s.grid();
  CsvWriter w(path);
  if (g.dim == 1)
    w.header({"x", "rho", "q1"});
  else
    w.header({"x", "y", "rho", "q1", "q2"});
  for_each_interior(g, [&](int i, int j) {
    if (g.dim == 1)
      w.row({g.center(0, i), s.rho(i), s.q[0](i)});
    else
      w.row({g.center(0, i), g.center(1, j), s.rho(i, j), s.q[0](i, j), s.q[1](i, j)});
  });
}

/// Columns x[,y],pert_scaled with pert_scaled = (rho - rho_eq)/zeta.
inline void write_scaled_perturbation(const std::filesystem::path& path, const State& s,
                                      const EquilibriumProfile& eq, double zeta) {
  const Grid& g = s.grid();
  const auto req = eq.rho_eq_storage();
  CsvWriter w(path);
  if (g.dim == 1)
    w.header({"x", "pert_scaled"});
  else
    w.header({"x", "y", "pert_scaled"});
  for_each_interior(g, [&](int i, int j) {
    const double v = density_deviation(s, req, g.index(i, j)) / zeta;
    if (g.dim == 1)
      w.row({g.center(0, i), v});
    else
      w.row({g.center(0, i), g.center(1, j), v});
  });
}

inline void write_equilibrium(const std::filesystem::path& path, const EquilibriumProfile& eq) {
  const Grid& g = eq.grid();
  CsvWriter w(path);
  if (g.dim == 1)
    w.header({"x", "rho_eq"});
  else
    w.header({"x", "y", "rho_eq"});
  for_each_interior(g, [&](int i, int j) {
    if (g.dim == 1)
      w.row({g.center(0, i), eq.rho_eq_cell(i)});
    else
      w.row({g.center(0, i), g.center(1, j), eq.rho_eq_cell(i, j)});
  });
}

inline const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols{"t", "dt", "ke", "l2_rho_err", "l2_u_err",
                                             "div_residual", "max_mach"};
  return cols;
}

inline std::vector<double> diagnostics_row(double t, double dt, const Diagnostics& d) {
  return {t, dt, d.ke, d.l2_rho_err, d.l2_u_err, d.div_residual, d.max_mach};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

inline nlohmann::json versions_json() {
  nlohmann::json v;
  v["anelastic"] = version;
  v["compiler"] = __VERSION__;
  v["cxx_standard"] = static_cast<long>(__cplusplus);
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  return v;
}

inline nlohmann::json diagnostics_json(const Diagnostics& d) {
  return {{"ke", d.ke},
          {"l2_rho_err", d.l2_rho_err},
          {"l2_u_err", d.l2_u_err},
          {"div_residual", d.div_residual},
          {"max_mach", d.max_mach},
          {"balance_residual", d.balance_residual}};
}

// ---------------------------------------------------------------- run

struct RunResult {
  State final_state;
  Diagnostics initial;
  Diagnostics final;
  int steps = 0;
  std::vector<std::pair<double, std::string>> snapshots;  // (t, file name)
};

struct RunOptions {
  bool write_files = true;
};

namespace detail {

inline std::string step_context(int step, double t, double dt, const StepReport* last) {
  std::ostringstream os;
  os.precision(17);
  os << "step " << step << " (t = " << t << ", dt = " << dt << ")";
  if (last != nullptr && !last->elliptic_backward_error.empty()) {
    os.precision(3);
    os << "; previous step elliptic backward errors:";
    for (double e : last->elliptic_backward_error) os << ' ' << e;
  }
  return os.str();
}

}  // namespace detail

/// Runs one scenario at one eps and mesh (the first of each list).
/// Throws ConfigError or NumericalError; on a numerical failure the manifest
/// is still written with status "failed".
inline RunResult run(const RunConfig& rc, const std::filesystem::path& out_dir,
                     const RunOptions& opt = {}) {
  const auto wall_start = std::chrono::steady_clock::now();
  const Scenario& sc = rc.scenario;
  sc.validate();
  const Grid g = scenario_grid(sc, sc.cells());
  const EquilibriumProfile eq = scenario_profile(sc, g);
  State s = initial_state(sc, eq);
  Stepper stepper(eq, scenario_stepper_config(sc));
  const BoundaryCondition bc = sc.bc();
  const double zeta = sc.zeta();

  if (opt.write_files) std::filesystem::create_directories(out_dir);
  std::optional<CsvWriter> diag;
  if (opt.write_files) {
    diag.emplace(out_dir / "diagnostics.csv");
    diag->header(diagnostics_columns());
    write_equilibrium(out_dir / "equilibrium.csv", eq);
  }

  RunResult res;
  auto snapshot = [&](const State& st) {
    if (!opt.write_files) return;
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%04zu.csv", res.snapshots.size());
    write_snapshot(out_dir / name, st);
    if (zeta > 0.0) {
      char pname[64];
      std::snprintf(pname, sizeof pname, "perturbation_%04zu.csv", res.snapshots.size());
      write_scaled_perturbation(out_dir / pname, st, eq, zeta);
    }
    res.snapshots.emplace_back(st.t, name);
  };

  res.initial = diagnostics(s, eq);
  if (diag) diag->row(diagnostics_row(0.0, 0.0, res.initial));
  snapshot(s);

  std::size_t next_snap = 0;
  while (next_snap < rc.snapshots.times.size() && rc.snapshots.times[next_snap] <= 0.0) ++next_snap;

  nlohmann::json manifest;
  manifest["config"] = config_to_json(rc);
  manifest["config"]["out"] = out_dir.string();
  manifest["versions"] = versions_json();
  auto finish_manifest = [&](const std::string& status, const std::string& message) {
    if (!opt.write_files) return;
    manifest["status"] = status;
    if (!message.empty()) manifest["error"] = message;
    manifest["steps"] = res.steps;
    manifest["final_time_reached"] = s.t;
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& [t, f] : res.snapshots) snaps.push_back({{"t", t}, {"file", f}});
    manifest["snapshots"] = snaps;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    write_json(out_dir / "manifest.json", manifest);
  };

  StepReport last;
  bool have_last = false;
  const double T = sc.final_time;
  try {
    while (s.t < T) {
      double target = T;
      if (next_snap < rc.snapshots.times.size()) target = std::min(target, rc.snapshots.times[next_snap]);
      double dt = stepper.compute_dt(s);
      bool lands = false;
      if (s.t + dt >= target - 1e-12 * dt) {
        dt = target - s.t;
        lands = true;
      }
      if (!(dt > 0.0)) break;
      try {
        last = stepper.step(s, dt);
      } catch (const NumericalError& e) {
        throw NumericalError(detail::step_context(res.steps + 1, s.t, dt, have_last ? &last : nullptr) +
                             ": " + e.what());
      }
      have_last = true;
      if (lands) s.t = target;
      ++res.steps;
      refresh_ghosts(s, bc, eq, sc.well_balanced);
      const Diagnostics d = diagnostics(s, eq);
      if (diag) diag->row(diagnostics_row(s.t, dt, d));
      bool snap = false;
      if (lands && next_snap < rc.snapshots.times.size() && target == rc.snapshots.times[next_snap]) {
        while (next_snap < rc.snapshots.times.size() && rc.snapshots.times[next_snap] <= s.t) ++next_snap;
        snap = s.t < T;
      }
      if (rc.snapshots.every > 0 && res.steps % rc.snapshots.every == 0 && s.t < T) snap = true;
      if (snap) snapshot(s);
    }
  } catch (const NumericalError& e) {
    finish_manifest("failed", e.what());
    throw;
  }
  refresh_ghosts(s, bc, eq, sc.well_balanced);
  res.final = diagnostics(s, eq);
  snapshot(s);
  if (opt.write_files && rc.reference && sc.dim == 1) {
    const State ref = reference_explicit_solve(sc, 10 * sc.cells());
    write_snapshot(out_dir / "reference.csv", ref);
    manifest["reference"] = {{"file", "reference.csv"}, {"cells", 10 * sc.cells()}, {"cfl", 0.1}};
  }
  manifest["initial"] = diagnostics_json(res.initial);
  manifest["final"] = diagnostics_json(res.final);
  res.final_state = s;
  finish_manifest("ok", "");
  return res;
}

// ---------------------------------------------------------------- tables

/// One row per (eps, mesh); orders against the previous row of the same eps.
/// Orders are NaN ("undefined") when either error is at machine-zero level.
struct ErrorRow {
  double eps = 0.0;
  int mesh = 0;
  double l2_rho = 0.0;
  std::array<double, 2> l2_u{0.0, 0.0};
  double order_rho = std::numeric_limits<double>::quiet_NaN();
  std::array<double, 2> order_u{std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN()};
  std::string label;  // potential name for wb tables
};

struct ErrorTable {
  int dim = 1;
  std::vector<ErrorRow> rows;
};

inline constexpr double machine_zero_error = 1e-14;

inline double observed_order(double coarse, double fine) {
  if (!(coarse > machine_zero_error) || !(fine > machine_zero_error))
    return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

/// L2 errors of rho - rho_eq and of each velocity component, sqrt(sum e^2 dV).
inline ErrorRow error_row(const State& s, const EquilibriumProfile& eq) {
  const Grid& g = s.grid();
  const double dv = g.cell_volume();
  const auto req = eq.rho_eq_storage();
  ErrorRow r;
  double er = 0.0;
  std::array<double, 2> eu{0.0, 0.0};
  for_each_interior(g, [&](int i, int j) {
    const std::size_t k = g.index(i, j);
    const double d = density_deviation(s, req, k);
    er += d * d * dv;
    for (int a = 0; a < g.dim; ++a) {
      const double u = s.q[a].at_offset(k) / s.rho.at_offset(k);
      eu[a] += u * u * dv;
    }
  });
  r.mesh = g.n(0);
  r.l2_rho = std::sqrt(er);
  r.l2_u = {std::sqrt(eu[0]), std::sqrt(eu[1])};
  return r;
}

inline void check_halving(const std::vector<int>& meshes) {
  if (meshes.size() < 3) throw ConfigError("convergence needs at least 3 meshes");
  for (std::size_t m = 1; m < meshes.size(); ++m)
    if (meshes[m] != 2 * meshes[m - 1])
      throw ConfigError("convergence meshes must double at each refinement (got " +
                        std::to_string(meshes[m - 1]) + " then " + std::to_string(meshes[m]) + ")");
}

/// Final state of one scenario run without file output.
inline State solve_to_final(const Scenario& sc, int cells) {
  RunConfig rc;
  rc.scenario = sc;
  rc.scenario.meshes = {cells};
  return run(rc, {}, RunOptions{false}).final_state;
}

/// Errors against the steady state (rho_eq, u = 0) at T for every eps and mesh.
inline ErrorTable convergence(const RunConfig& rc) {
  check_halving(rc.scenario.meshes);
  ErrorTable table;
  table.dim = rc.scenario.dim;
  for (double eps : rc.eps_list) {
    Scenario sc = rc.scenario;
    sc.eps = eps;
    std::optional<ErrorRow> prev;
    for (int n : sc.meshes) {
      const Grid g = scenario_grid(sc, n);
      const EquilibriumProfile eq = scenario_profile(sc, g);
      ErrorRow row = error_row(solve_to_final(sc, n), eq);
      row.eps = eps;
      if (prev) {
        row.order_rho = observed_order(prev->l2_rho, row.l2_rho);
        for (int a = 0; a < table.dim; ++a) row.order_u[a] = observed_order(prev->l2_u[a], row.l2_u[a]);
      }
      table.rows.push_back(row);
      prev = row;
    }
  }
  return table;
}

/// Well-balancing table: the wb-1d scenario per (potential, eps).
inline ErrorTable wb_table(const RunConfig& rc) {
  ErrorTable table;
  table.dim = rc.scenario.dim;
  for (const auto& pot : rc.potentials) {
    for (double eps : rc.eps_list) {
      Scenario sc = rc.scenario;
      sc.potential = pot;
      sc.eps = eps;
      sc.validate();
      const Grid g = scenario_grid(sc, sc.cells());
      const EquilibriumProfile eq = scenario_profile(sc, g);
      ErrorRow row;
      try {
        row = error_row(solve_to_final(sc, sc.cells()), eq);
      } catch (const NumericalError&) {
        row.mesh = sc.cells();
        row.l2_rho = row.l2_u[0] = row.l2_u[1] = std::numeric_limits<double>::infinity();
      }
      row.eps = eps;
      row.label = pot;
      table.rows.push_back(row);
    }
  }
  return table;
}

inline std::string format_cell(double v) {
  if (std::isnan(v)) return "undefined";
  if (std::isinf(v)) return "inf";
  return detail::fmt17(v);
}

inline void write_error_table(const std::filesystem::path& path, const ErrorTable& t, bool with_label) {
  CsvWriter w(path);
  std::vector<std::string> cols;
  if (with_label) cols.push_back("potential");
  cols.insert(cols.end(), {"eps", "mesh", "l2_rho", "l2_u1"});
  if (t.dim == 2) cols.push_back("l2_u2");
  if (!with_label) {
    cols.insert(cols.end(), {"order_rho", "order_u1"});
    if (t.dim == 2) cols.push_back("order_u2");
  }
  w.header(cols);
  for (const auto& r : t.rows) {
    std::string line;
    auto add = [&](const std::string& c) { line += (line.empty() ? "" : ",") + c; };
    if (with_label) add(r.label);
    add(format_cell(r.eps));
    add(std::to_string(r.mesh));
    add(format_cell(r.l2_rho));
    add(format_cell(r.l2_u[0]));
    if (t.dim == 2) add(format_cell(r.l2_u[1]));
    if (!with_label) {
      add(format_cell(r.order_rho));
      add(format_cell(r.order_u[0]));
      if (t.dim == 2) add(format_cell(r.order_u[1]));
    }
    w.raw(line);
  }
}

/// Runs the scenario for every (eps, mesh) into out/eps_<e>_n_<N>/ and writes
/// sweep.csv with the final diagnostics. Failed runs are listed with status
/// "failed" and do not stop the sweep. Returns the number of failures.
inline int sweep(const RunConfig& rc, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir / "sweep.csv");
  w.header({"eps", "mesh", "status", "steps", "ke0", "ke", "l2_rho_err", "l2_u_err", "div_residual",
            "max_mach", "dir"});
  int failures = 0;
  for (double eps : rc.eps_list) {
    for (int n : rc.scenario.meshes) {
      RunConfig one = rc;
      one.scenario.eps = eps;
      one.scenario.meshes = {n};
      one.eps_list = {eps};
      char dir[96];
      std::snprintf(dir, sizeof dir, "eps_%.3g_n_%d", eps, n);
      std::string line = detail::fmt17(eps) + "," + std::to_string(n) + ",";
      try {
        const RunResult r = run(one, out_dir / dir);
        const Diagnostics& d = r.final;
        line += "ok," + std::to_string(r.steps);
        for (double v : {r.initial.ke, d.ke, d.l2_rho_err, d.l2_u_err, d.div_residual, d.max_mach})
          line += "," + detail::fmt17(v);
      } catch (const NumericalError&) {
        ++failures;
        line += "failed,0,,,,,,";
      }
      w.raw(line + "," + dir);
    }
  }
  return failures;
}

}  // namespace anelastic
