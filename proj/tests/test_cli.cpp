#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "contactsim/cli.hpp"
#include "contactsim/config.hpp"

using namespace contactsim;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = (fs::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

std::string fast_demo_config(const std::string& extra = "") {
  return "mesh.nx = 4\nmesh.ny = 4\n"
         "grid.T = 0.5\ngrid.n_steps = 8\n"
         "material.theta_A = 1.0\nmaterial.zeta_A = 0.5\n"
         "material.theta_B = 0.1\nmaterial.zeta_B = 0.05\n"
         "material.kernel = exponential\nmaterial.kernel_scale = 0.05\n"
         "material.kernel_rate = 1.0\nmaterial.kernel_damage_factor = 0.5\n"
         "material.L_p = 0.5\nmaterial.p_star = 0.5\n"
         "material.mu0 = 0.3\nmaterial.mu1 = 0.02\nmaterial.mu2 = 0.02\nmaterial.mu_star = 0.5\n"
         "material.kappa = 0.1\nmaterial.lambda_E = 0.1\nmaterial.lambda_w = 0.05\n"
         "material.wear_c1 = 0.1\nmaterial.wear_c2 = 0.1\nmaterial.wear_c3 = 0.05\n"
         "load.f0.kind = constant\nload.f0.x = 0.2\nload.f0.y = -1\n"
         "init.xi0 = 0.2\n"
         "solver.probes = 3\n" +
         extra;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("parse_run_config reads dotted keys and rejects unknown ones") {
  const auto path = write_temp("ok.cfg",
                               "# comment\n"
                               "mesh.nx = 5\n"
                               "grid.T = 2.5\n"
                               "material.theta_A = 3 # inline comment\n"
                               "load.f0.kind = sinusoidal\n");
  const RunConfig cfg = parse_run_config(path);
  CHECK(cfg.nx == 5);
  CHECK(cfg.solver.grid.T == 2.5);
  CHECK(cfg.material.theta_A == 3.0);
  CHECK(cfg.load.f0.kind == TimeProfile::Kind::Sinusoidal);

  const auto bad = write_temp("bad.cfg", "material.thetaA = 1\n");
  CHECK_THROWS_WITH_AS(parse_run_config(bad), doctest::Contains("unknown config key"), ConfigError);

  const auto junk = write_temp("junk.cfg", "grid.T = fast\n");
  CHECK_THROWS_AS(parse_run_config(junk), ConfigError);

  const auto no_eq = write_temp("noeq.cfg", "grid.T 2.0\n");
  CHECK_THROWS_AS(parse_run_config(no_eq), ConfigError);
}

TEST_CASE("validate_run_config cites the violated hypothesis") {
  const auto path = write_temp("negkappa.cfg", fast_demo_config("material.kappa = -0.5\n"));
  const RunConfig cfg = parse_run_config(path);
  CHECK_THROWS_WITH_AS(validate_run_config(cfg), doctest::Contains("H(g)"), ConfigError);

  const auto neg_gap = write_temp("neggap.cfg", fast_demo_config("material.gap = -1\n"));
  CHECK_THROWS_WITH_AS(validate_run_config(parse_run_config(neg_gap)), doctest::Contains("H(g')"),
                       ConfigError);

  const auto bad_tols =
      write_temp("badtol.cfg", fast_demo_config("solver.vi_tol = 1e-3\n"));
  CHECK_THROWS_AS(validate_run_config(parse_run_config(bad_tols)), ConfigError);
}

TEST_CASE("cmd_run writes trajectories, stress snapshots and the report") {
  const auto cfg = write_temp("run.cfg", fast_demo_config());
  const auto out_dir = (fs::temp_directory_path() / "contactsim_run").string();
  fs::remove_all(out_dir);
  std::ostringstream out, err;
  const int code = cmd_run(cfg, out_dir, out, err);
  INFO(err.str());
  CHECK(code == 0);
  for (const char* name : {"eta.csv", "u.csv", "xi.csv", "wear.csv", "report.txt", "stress_k0.csv",
                           "stress_k8.csv"})
    CHECK(fs::exists(fs::path(out_dir) / name));
  const std::string report = slurp(fs::path(out_dir) / "report.txt");
  CHECK(report.find("m > m_0:") != std::string::npos);
  CHECK(report.find("contraction ledger") != std::string::npos);
  CHECK(report.find("status: converged") != std::string::npos);
}

TEST_CASE("cmd_run is deterministic: identical CSV bytes across invocations") {
  const auto cfg = write_temp("det.cfg", fast_demo_config());
  const auto dir_a = (fs::temp_directory_path() / "contactsim_det_a").string();
  const auto dir_b = (fs::temp_directory_path() / "contactsim_det_b").string();
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  std::ostringstream out, err;
  REQUIRE(cmd_run(cfg, dir_a, out, err) == 0);
  REQUIRE(cmd_run(cfg, dir_b, out, err) == 0);
  for (const char* name : {"eta.csv", "u.csv", "xi.csv", "wear.csv", "stress_k4.csv"}) {
    CHECK(slurp(fs::path(dir_a) / name) == slurp(fs::path(dir_b) / name));
    CHECK(!slurp(fs::path(dir_a) / name).empty());
  }
}

TEST_CASE("cmd_run exit codes for config errors") {
  std::ostringstream out, err;
  const auto bad = write_temp("neg.cfg", fast_demo_config("material.kappa = -2\n"));
  const auto out_dir = (fs::temp_directory_path() / "contactsim_err").string();
  CHECK(cmd_run(bad, out_dir, out, err) == 1);
  CHECK(err.str().find("H(g)") != std::string::npos);

  CHECK(cmd_run("/nonexistent/path.cfg", out_dir, out, err) == 1);
}

TEST_CASE("cmd_estimate prints the ledger with the verdict line") {
  const auto cfg = write_temp("est.cfg", fast_demo_config());
  std::ostringstream out, err;
  CHECK(cmd_estimate(cfg, out, err) == 0);
  const std::string text = out.str();
  CHECK(text.find("m_0") != std::string::npos);
  CHECK(text.find("m > m_0: ") != std::string::npos);
  CHECK(text.find("alpha") != std::string::npos);

  // compliance off zeroes the friction coupling constants in the ledger
  const auto zero_cfg = write_temp("estzero.cfg",
                                   fast_demo_config("material.L_p = 0\nmaterial.kernel = zero\n"));
  std::ostringstream out2;
  CHECK(cmd_estimate(zero_cfg, out2, err) == 0);
  CHECK(out2.str().find("alpha    = 0\n") != std::string::npos);
  CHECK(out2.str().find("beta     = 0\n") != std::string::npos);
  CHECK(out2.str().find("gamma    = 0\n") != std::string::npos);
}

TEST_CASE("cmd_estimate verdict flips when the viscosity is stiffened") {
  // weak viscosity: m = 2 theta_A = 0.04 sits far below m_0
  const auto weak = write_temp("weak.cfg", fast_demo_config("material.theta_A = 0.02\n"));
  std::ostringstream out_weak, err;
  REQUIRE(cmd_estimate(weak, out_weak, err) == 0);
  CHECK(out_weak.str().find("m > m_0: false") != std::string::npos);

  // theta_A x 100 scales m by 100 and leaves m_0 untouched
  const auto stiff = write_temp("stiff.cfg", fast_demo_config("material.theta_A = 2.0\n"));
  std::ostringstream out_stiff;
  REQUIRE(cmd_estimate(stiff, out_stiff, err) == 0);
  CHECK(out_stiff.str().find("m > m_0: true") != std::string::npos);
  CHECK(out_weak.str().find("m        = 0.04\n") != std::string::npos);
  CHECK(out_stiff.str().find("m        = 4\n") != std::string::npos);

  // the threshold itself does not depend on theta_A
  auto m0_line = [](const std::string& text) {
    const auto pos = text.find("m_0      = ");
    return text.substr(pos, text.find('\n', pos) - pos);
  };
  CHECK(m0_line(out_weak.str()) == m0_line(out_stiff.str()));
}

TEST_CASE("cmd_run exits 2 on outer non-convergence but still writes outputs") {
  const auto cfg = write_temp("hardcap.cfg", fast_demo_config("solver.pi_max = 1\n"));
  const auto out_dir = (fs::temp_directory_path() / "contactsim_cap").string();
  fs::remove_all(out_dir);
  std::ostringstream out, err;
  CHECK(cmd_run(cfg, out_dir, out, err) == 2);
  for (const char* name : {"eta.csv", "u.csv", "xi.csv", "wear.csv", "report.txt"})
    CHECK(fs::exists(fs::path(out_dir) / name));
  const std::string report = slurp(fs::path(out_dir) / "report.txt");
  CHECK(report.find("status: not converged") != std::string::npos);
  CHECK(report.find("contraction ledger") != std::string::npos);
}

TEST_CASE("cmd_run reports unwritable output locations as exit 1") {
  const auto cfg = write_temp("runio.cfg", fast_demo_config());
  const auto blocker = write_temp("not_a_dir", "plain file");
  std::ostringstream out, err;
  CHECK(cmd_run(cfg, blocker + "/sub", out, err) == 1);
  CHECK(!err.str().empty());
}

TEST_CASE("cmd_verify handles unknown suites") {
  std::ostringstream out, err;
  CHECK(cmd_verify("bogus", out, err) == 1);
  CHECK(err.str().find("unknown suite") != std::string::npos);
}

TEST_CASE("cmd_verify oracle and lipschitz suites pass") {
  std::ostringstream out, err;
  CHECK(cmd_verify("oracles", out, err) == 0);
  CHECK(out.str().find("[PASS]") != std::string::npos);
  std::ostringstream out2;
  CHECK(cmd_verify("lipschitz", out2, err) == 0);
}

TEST_CASE("cmd_mesh_info summarizes a mesh file") {
  const auto mesh = write_temp("info.mesh",
                               "mesh2d v1\n"
                               "v 0 0\nv 1 0\nv 1 1\nv 0 1\n"
                               "t 0 1 2\nt 0 2 3\n"
                               "b 0 1 G3\nb 1 2 G2\nb 2 3 G2\nb 3 0 G1\n");
  std::ostringstream out, err;
  CHECK(cmd_mesh_info(mesh, out, err) == 0);
  CHECK(out.str().find("vertices: 4") != std::string::npos);
  CHECK(out.str().find("G3 1") != std::string::npos);
  CHECK(out.str().find("(open)") != std::string::npos);

  CHECK(cmd_mesh_info("/missing.mesh", out, err) == 1);
}
