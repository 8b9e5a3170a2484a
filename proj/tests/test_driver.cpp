#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "anelastic.hpp"

using namespace anelastic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("anelastic_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

RunConfig small_run() {
  return resolve_config({{"scenario", "perturb-1d"}, {"mesh", "20"}, {"final_time", "0.05"},
                         {"snapshots", "0.02"}});
}

}  // namespace

TEST(Config, OverridesApplyToBuiltinScenario) {
  const auto rc = resolve_config({{"scenario", "perturb-1d"},
                                  {"eps", "1e-3"},
                                  {"zeta", "eps"},
                                  {"mesh", "32"},
                                  {"tableau", "DP-A(1,2,1)"},
                                  {"beta", "0.8"},
                                  {"well_balanced", "false"},
                                  {"dt_policy", "cfl:0.4"},
                                  {"limiter", "van-leer"}});
  const Scenario& s = rc.scenario;
  EXPECT_EQ(s.eps, 1e-3);
  EXPECT_EQ(s.zeta(), 1e-3);
  EXPECT_EQ(s.cells(), 32);
  EXPECT_EQ(s.tableau, "DP-A(1,2,1)");
  EXPECT_EQ(s.beta, 0.8);
  EXPECT_FALSE(s.well_balanced);
  EXPECT_EQ(s.dt.str(), "cfl:0.40000000000000002");
  EXPECT_EQ(s.limiter, Limiter::van_leer);
  EXPECT_DOUBLE_EQ(resolve_config({{"scenario", "perturb-1d"}, {"zeta", "eps^3"}}).scenario.zeta(), 1e-6);
  EXPECT_EQ(resolve_config({{"scenario", "perturb-1d"}, {"zeta", "0.5"}}).scenario.zeta(), 0.5);
}

TEST(Config, Errors) {
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"epsilon", "1"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"eps", "1"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"eps", "-1"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"eps", "abc"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"mesh", "2"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"boundary", "sticky"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"tableau", "RK4"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-2d"}, {"domain_lower", "0"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"snapshots", "every:0"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"scenario", "perturb-1d"}, {"well_balanced", "maybe"}}), ConfigError);
}

TEST(Config, IniAndManifestRoundTrip) {
  const fs::path dir = scratch("config");
  write_text(dir / "a.ini", "[run]\nscenario = aoc-1d\neps = 1e-2, 1e-4\nmesh = 10,20,40\n");
  const auto kv = read_config_file(dir / "a.ini");
  const auto rc = resolve_config(kv);
  EXPECT_EQ(rc.eps_list, (std::vector<double>{1e-2, 1e-4}));
  EXPECT_EQ(rc.scenario.meshes, (std::vector<int>{10, 20, 40}));

  nlohmann::json manifest;
  manifest["config"] = config_to_json(rc);
  write_json(dir / "manifest.json", manifest);
  const auto again = resolve_config(read_config_file(dir / "manifest.json"));
  EXPECT_EQ(config_to_json(again), config_to_json(rc));

  write_text(dir / "b.ini", "[mesh]\nn = 4\n");
  EXPECT_THROW(read_config_file(dir / "b.ini"), ConfigError);
  EXPECT_THROW(read_config_file(dir / "missing.ini"), ConfigError);
  write_text(dir / "c.json", "{ not json");
  EXPECT_THROW(read_config_file(dir / "c.json"), ConfigError);
}

TEST(Config, OutputDirectoryPrecedence) {
  RunConfig rc = small_run();
  unsetenv("ANELASTIC_OUT_DIR");
  EXPECT_EQ(resolve_out_dir(rc), fs::path("runs") / "perturb-1d");
  rc.out_dir = "from-config";
  EXPECT_EQ(resolve_out_dir(rc), fs::path("from-config"));
  setenv("ANELASTIC_OUT_DIR", "from-env", 1);
  EXPECT_EQ(resolve_out_dir(rc), fs::path("from-env"));
  EXPECT_EQ(resolve_out_dir(rc, "from-cli"), fs::path("from-cli"));
  unsetenv("ANELASTIC_OUT_DIR");
}

TEST(Snapshots, ScheduleParsing) {
  EXPECT_EQ(SnapshotSchedule::parse("0.5, 0.1").times, (std::vector<double>{0.1, 0.5}));
  EXPECT_EQ(SnapshotSchedule::parse("every:10").every, 10);
  EXPECT_TRUE(SnapshotSchedule::parse("none").times.empty());
  EXPECT_THROW(SnapshotSchedule::parse("-1"), ConfigError);
}

TEST(Tables, OrdersAndFormatting) {
  EXPECT_DOUBLE_EQ(observed_order(4e-3, 1e-3), 2.0);
  EXPECT_TRUE(std::isnan(observed_order(1e-15, 1e-16)));
  EXPECT_TRUE(std::isnan(observed_order(0.0, 0.0)));
  EXPECT_EQ(format_cell(std::numeric_limits<double>::quiet_NaN()), "undefined");
  EXPECT_EQ(format_cell(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_cell(0.1), "0.10000000000000001");
  EXPECT_NO_THROW(check_halving({10, 20, 40}));
  EXPECT_THROW(check_halving({10, 20}), ConfigError);
  EXPECT_THROW(check_halving({10, 20, 30}), ConfigError);
}

TEST(Tables, EquilibriumConvergenceHasMachineZeroErrors) {
  const auto rc = resolve_config({{"scenario", "wb-1d"}, {"mesh", "10,20,40"}, {"final_time", "0.5"},
                                  {"eps", "1,1e-3"}});
  const auto t = convergence(rc);
  ASSERT_EQ(t.rows.size(), 6u);
  for (const auto& r : t.rows) {
    EXPECT_LE(r.l2_rho, 1e-12);
    EXPECT_LE(r.l2_u[0], 1e-12);
    EXPECT_TRUE(std::isnan(r.order_u[0]));
  }
  const fs::path dir = scratch("tables");
  write_error_table(dir / "c.csv", t, false);
  const std::string text = slurp(dir / "c.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "eps,mesh,l2_rho,l2_u1,order_rho,order_u1");
  EXPECT_NE(text.find("1,20,0,0,undefined,undefined\n"), std::string::npos) << text;
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Tables, EmptyWellBalancingTableHasHeaderOnly) {
  RunConfig rc = resolve_config({{"scenario", "wb-1d"}, {"eps", ""}});
  const auto t = wb_table(rc);
  EXPECT_TRUE(t.rows.empty());
  const fs::path dir = scratch("wb");
  write_error_table(dir / "wb.csv", t, true);
  EXPECT_EQ(slurp(dir / "wb.csv"), "potential,eps,mesh,l2_rho,l2_u1\n");
}

TEST(Run, WritesFilesAndIsReproducible) {
  const RunConfig rc = small_run();
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const auto ra = run(rc, a);
  run(rc, b);
  EXPECT_DOUBLE_EQ(ra.final_state.t, 0.05);
  ASSERT_EQ(ra.snapshots.size(), 3u);
  EXPECT_DOUBLE_EQ(ra.snapshots[1].first, 0.02);
  for (const char* f : {"diagnostics.csv", "equilibrium.csv", "snapshot_0000.csv", "snapshot_0001.csv",
                        "snapshot_0002.csv", "perturbation_0002.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string diag = slurp(a / "diagnostics.csv");
  EXPECT_EQ(diag.substr(0, diag.find('\n')), "t,dt,ke,l2_rho_err,l2_u_err,div_residual,max_mach");
  EXPECT_EQ(slurp(a / "snapshot_0000.csv").substr(0, 9), "x,rho,q1\n");
  EXPECT_EQ(slurp(a / "perturbation_0000.csv").substr(0, 14), "x,pert_scaled\n");

  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  EXPECT_EQ(manifest["config"]["scenario"], "perturb-1d");
  const RunConfig again = resolve_config(read_config_file(a / "manifest.json"));
  const fs::path c = scratch("run_c");
  run(again, c);
  EXPECT_EQ(slurp(a / "snapshot_0002.csv"), slurp(c / "snapshot_0002.csv"));
}

TEST(Run, NumericalFailureIsRecordedInManifest) {
  const RunConfig rc = resolve_config({{"scenario", "perturb-1d"}, {"zeta", "-2"}, {"mesh", "20"}});
  const fs::path dir = scratch("run_fail");
  EXPECT_THROW(run(rc, dir), NumericalError);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "failed");
  EXPECT_NE(manifest["error"].get<std::string>().find("step 1"), std::string::npos);
}

TEST(Run, TwoDimensionalSnapshotColumns) {
  const RunConfig rc = resolve_config({{"scenario", "perturb-2d"}, {"mesh", "8"}, {"final_time", "0.01"}});
  const fs::path dir = scratch("run_2d");
  run(rc, dir);
  EXPECT_EQ(slurp(dir / "snapshot_0000.csv").substr(0, 14), "x,y,rho,q1,q2\n");
  EXPECT_EQ(slurp(dir / "perturbation_0000.csv").substr(0, 16), "x,y,pert_scaled\n");
}
