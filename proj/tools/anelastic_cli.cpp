// Command-line driver: run, convergence, wb-table, sweep.
// Exit status: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "anelastic.hpp"

namespace {

using anelastic::ConfigError;
using anelastic::KeyValues;
using anelastic::NumericalError;

struct Options {
  std::string scenario;
  std::string config;
  std::optional<std::string> eps;
  std::string mesh;
  std::string tableau;
  std::string beta;
  std::string out;
  std::string snapshots;
  std::string dt_policy;
  std::string limiter;
  std::string final_time;
  std::string potentials;
  bool nwb = false;
  bool reference = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "built-in scenario name");
  cmd->add_option("--config", o.config, "INI or JSON config file (a run manifest also works)");
  cmd->add_option("--eps", o.eps, "eps value, or comma list for convergence/wb-table/sweep");
  cmd->add_option("--mesh", o.mesh, "cells per axis, or comma list");
  cmd->add_option("--tableau", o.tableau, "ARS(1,1,1), DP-A(1,2,1) or DP2-A(2,4,2)");
  cmd->add_option("--beta", o.beta, "tableau parameter beta");
  cmd->add_flag("--nwb", o.nwb, "non-well-balanced variant");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--snapshots", o.snapshots, "comma list of times or every:N");
  cmd->add_option("--dt-policy", o.dt_policy, "cfl:<nu> or fixed:<c> (dt = c dx)");
  cmd->add_option("--limiter", o.limiter, "minmod, van-leer or none");
  cmd->add_option("--final-time", o.final_time, "final time T");
}

anelastic::RunConfig build_config(const Options& o, const std::string& default_scenario,
                                  bool eps_list_default = false,
                                  const std::string& default_eps = "") {
  KeyValues kv;
  if (!o.config.empty()) kv = anelastic::read_config_file(o.config);
  if (!o.scenario.empty()) kv["scenario"] = o.scenario;
  if (kv.find("scenario") == kv.end()) {
    if (default_scenario.empty()) throw ConfigError("a --scenario or --config is required");
    kv["scenario"] = default_scenario;
  }
  if (o.eps)
    kv["eps"] = *o.eps;
  else if (eps_list_default && kv.find("eps") == kv.end())
    kv["eps"] = default_eps;
  if (!o.mesh.empty()) kv["mesh"] = o.mesh;
  if (!o.tableau.empty()) kv["tableau"] = o.tableau;
  if (!o.beta.empty()) kv["beta"] = o.beta;
  if (o.nwb) kv["well_balanced"] = "false";
  if (!o.snapshots.empty()) kv["snapshots"] = o.snapshots;
  if (!o.dt_policy.empty()) kv["dt_policy"] = o.dt_policy;
  if (!o.limiter.empty()) kv["limiter"] = o.limiter;
  if (!o.final_time.empty()) kv["final_time"] = o.final_time;
  if (!o.potentials.empty()) kv["potentials"] = o.potentials;
  if (o.reference) kv["reference"] = "true";
  return anelastic::resolve_config(kv);
}

std::string cell(double v) { return anelastic::format_cell(v); }

void print_table(const anelastic::ErrorTable& t, bool with_label) {
  for (const auto& r : t.rows) {
    if (with_label) std::printf("%-11s ", r.label.c_str());
    std::printf("eps=%-8.3g N=%-5d rho=%-24s u1=%-24s", r.eps, r.mesh, cell(r.l2_rho).c_str(),
                cell(r.l2_u[0]).c_str());
    if (t.dim == 2) std::printf(" u2=%-24s", cell(r.l2_u[1]).c_str());
    if (!with_label) std::printf(" order_u1=%s", cell(r.order_u[0]).c_str());
    std::printf("\n");
  }
}

int run_cmd(const Options& o) {
  const auto rc = build_config(o, "");
  if (rc.eps_list.size() != 1) throw ConfigError("run takes a single eps value");
  const auto dir = anelastic::resolve_out_dir(rc, o.out);
  const auto res = anelastic::run(rc, dir);
  std::printf("%s: %d steps to T=%.17g, l2_rho_err=%.3e l2_u_err=%.3e ke=%.6e -> %s\n",
              rc.scenario.name.c_str(), res.steps, res.final_state.t, res.final.l2_rho_err,
              res.final.l2_u_err, res.final.ke, dir.string().c_str());
  return 0;
}

int convergence_cmd(const Options& o) {
  const auto rc = build_config(o, "aoc-1d");
  const auto dir = anelastic::resolve_out_dir(rc, o.out);
  const auto table = anelastic::convergence(rc);
  std::filesystem::create_directories(dir);
  anelastic::write_error_table(dir / "convergence.csv", table, false);
  print_table(table, false);
  return 0;
}

int wb_table_cmd(const Options& o) {
  const auto rc = build_config(o, "wb-1d", true, "1,1e-1,1e-2,1e-3,1e-4");
  const auto dir = anelastic::resolve_out_dir(rc, o.out);
  const auto table = anelastic::wb_table(rc);
  std::filesystem::create_directories(dir);
  anelastic::write_error_table(dir / "wb_table.csv", table, true);
  print_table(table, true);
  return 0;
}

int sweep_cmd(const Options& o) {
  const auto rc = build_config(o, "");
  const auto dir = anelastic::resolve_out_dir(rc, o.out);
  const int failures = anelastic::sweep(rc, dir);
  std::printf("sweep: %zu runs, %d failed -> %s\n", rc.eps_list.size() * rc.scenario.meshes.size(),
              failures, (dir / "sweep.csv").string().c_str());
  return failures > 0 ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-balanced AP IMEX-RK solver for the isentropic Euler equations with gravity"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "run one scenario and write snapshots, diagnostics and a manifest");
  add_common(run, o);
  run->add_flag("--reference", o.reference, "also write the explicit reference solution (1D)");
  auto* conv = app.add_subcommand("convergence", "error table and observed orders over a doubling mesh list");
  add_common(conv, o);
  auto* wb = app.add_subcommand("wb-table", "well-balancing error table over potentials and eps");
  add_common(wb, o);
  wb->add_option("--potentials", o.potentials, "comma list of potentials");
  auto* sw = app.add_subcommand("sweep", "run a scenario for every eps and mesh");
  add_common(sw, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return run_cmd(o);
    if (*conv) return convergence_cmd(o);
    if (*wb) return wb_table_cmd(o);
    if (*sw) return sweep_cmd(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  }
  return 2;
}
