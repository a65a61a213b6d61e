#include "contactsim/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "contactsim/config.hpp"
#include "contactsim/verify.hpp"

namespace contactsim {

namespace fs = std::filesystem;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_stress_csv(const Mat& stress, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write stress csv: " + path);
  out << "elem,s11,s22,s12\n";
  for (int e = 0; e < stress.rows(); ++e)
    out << e << ',' << format_double(stress(e, 0)) << ',' << format_double(stress(e, 1)) << ','
        << format_double(stress(e, 2)) << '\n';
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write report: " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

std::string verdict(bool b) { return b ? "true" : "false"; }

}  // namespace

void print_contraction_report(const ContractionReport& report, std::ostream& out) {
  const AbstractConstants& c = report.constants;
  out << "contraction ledger\n";
  out << "  m        = " << format_double(c.m) << "\n";
  out << "  L1       = " << format_double(c.L1) << "\n";
  out << "  L2       = " << format_double(c.L2) << "\n";
  out << "  alpha    = " << format_double(c.alpha) << "\n";
  out << "  beta     = " << format_double(c.beta) << "\n";
  out << "  gamma    = " << format_double(c.gamma) << "\n";
  out << "  r1J      = " << format_double(c.r1J) << "\n";
  out << "  r2J      = " << format_double(c.r2J) << "\n";
  out << "  sJ       = " << format_double(c.sJ) << "\n";
  out << "  L_phi    = " << format_double(c.L_phi_damage) << "  (damage source)\n";
  out << "  L_varphi = " << format_double(c.L_varphi_wear) << "  (wear source)\n";
  out << "  g1 = g2  = " << format_double(c.g1) << "\n";
  out << "  |rho|    = " << format_double(c.trace_norm) << "  (trace norm, probed)\n";
  out << "  c_hat    = " << format_double(report.c_hat) << "  (wear sup-norm constant, probed)\n";
  out << "  d1_hat   = " << format_double(report.d1_hat) << "  (damage stability constant, probed)\n";
  out << "  T        = " << format_double(report.T) << "\n";
  out << "  l_K      = " << format_double(report.l_K) << "\n";
  out << "  L_K      = " << format_double(report.L_K) << "\n";
  out << "  m_0      = " << format_double(report.m0) << "\n";
  out << "  m > beta: " << verdict(report.verdict_m_gt_beta) << "\n";
  out << "  m > m_0: " << verdict(report.verdict_m_gt_m0) << "\n";
  if (!report.lambda_ratios.empty()) {
    out << "  lambda ratios:";
    for (double r : report.lambda_ratios) out << ' ' << format_double(r);
    out << "\n";
  }
  if (!report.pi_ratios.empty()) {
    out << "  pi ratios:";
    for (double r : report.pi_ratios) out << ' ' << format_double(r);
    out << "\n";
  }
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::ostream& out,
            std::ostream& err) {
  const auto t_start = std::chrono::steady_clock::now();
  RunConfig cfg;
  DiscreteSetting setting;
  InitialState init;
  try {
    cfg = parse_run_config(config_path);
    validate_run_config(cfg);
    setting = build_setting(config_mesh(cfg), cfg.material);
    init = make_initial_state(cfg, setting);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    // Probe writability before the long solve.
    write_text_atomic((fs::path(out_dir) / "report.txt").string(), "run in progress\n");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "i/o error: " << e.what() << "\n";
    return 1;
  }
  const double setup_seconds = seconds_since(t_start);

  SimulationResult result;
  const auto t_solve = std::chrono::steady_clock::now();
  try {
    result = solve_pi_fixed_point(cfg.material, cfg.load, init, cfg.solver, setting);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    return 1;
  }
  const double solve_seconds = seconds_since(t_solve);

  const auto t_output = std::chrono::steady_clock::now();
  try {
    const fs::path dir(out_dir);
    write_trajectory_csv(result.eta, (dir / "eta.csv").string());
    write_trajectory_csv(result.u, (dir / "u.csv").string());
    write_trajectory_csv(result.xi, (dir / "xi.csv").string());
    write_trajectory_csv(result.wear, (dir / "wear.csv").string());
    for (std::size_t k = 0; k < result.stress.size(); ++k)
      write_stress_csv(result.stress[k], (dir / ("stress_k" + std::to_string(k) + ".csv")).string());

    // Post-hoc invariant checks for the report.
    double xi_min = 1.0, xi_max = 0.0;
    for (const Vec& v : result.xi.values) {
      xi_min = std::min(xi_min, v.minCoeff());
      xi_max = std::max(xi_max, v.maxCoeff());
    }
    const Trajectory u_check = integrate_trajectory(result.eta, init.u0);
    double u_defect = 0.0;
    for (std::size_t k = 0; k < u_check.values.size(); ++k)
      u_defect = std::max(u_defect,
                          (u_check.values[k] - result.u.values[k]).cwiseAbs().maxCoeff());

    std::ostringstream report;
    report << "contactsim run report\n";
    report << "status: " << (result.converged ? "converged" : "not converged") << "\n";
    report << "wall clock: setup " << std::setprecision(3) << setup_seconds << " s, solve "
           << solve_seconds << " s, output " << seconds_since(t_output) << " s\n";
    report << "pi sweeps: " << result.log.pi_diffs.size()
           << ", inner vi iterations: " << result.log.vi_iterations_total << "\n";
    report << "pi diffs:";
    for (double d : result.log.pi_diffs) report << ' ' << format_double(d);
    report << "\nlambda sweeps per pi sweep:";
    for (const QVIDiagnostics& q : result.log.qvi) report << ' ' << q.sweeps;
    report << "\n\n";
    print_contraction_report(result.report, report);
    report << "\ninvariant checks\n";
    report << "  damage bounds: min " << format_double(xi_min) << ", max " << format_double(xi_max)
           << (xi_min >= 0.0 && xi_max <= 1.0 ? " (in [0,1])" : " (VIOLATED)") << "\n";
    report << "  displacement trapezoid defect: " << format_double(u_defect) << "\n";
    if (result.wear.values.size() > 1)
      report << "  wear change over the first step (continuity diagnostic): "
             << format_double(
                    (result.wear.values[1] - result.wear.values[0]).cwiseAbs().maxCoeff())
             << "\n";
    write_text_atomic((dir / "report.txt").string(), report.str());
  } catch (const std::exception& e) {
    err << "i/o error: " << e.what() << "\n";
    return 1;
  }

  out << "run " << (result.converged ? "converged" : "did not converge") << " in "
      << result.log.pi_diffs.size() << " pi sweeps (" << std::setprecision(3) << solve_seconds
      << " s); outputs in " << out_dir << "\n";
  return result.converged ? 0 : 2;
}

int cmd_estimate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_run_config(config_path);
    validate_run_config(cfg);
    const DiscreteSetting setting = build_setting(config_mesh(cfg), cfg.material);
    const InitialState init = make_initial_state(cfg, setting);
    const ContractionReport report =
        contraction_report(cfg.material, cfg.load, init, cfg.solver, setting, cfg.solver.probes);
    print_contraction_report(report, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

namespace {

struct SuiteTable {
  std::ostream& out;
  bool all_pass = true;

  void row(const std::string& name, bool pass, const std::string& detail) {
    out << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    all_pass = all_pass && pass;
  }
};

Mat random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  return a.transpose() * a + 0.5 * Mat::Identity(n, n);
}

void run_oracle_suite(SuiteTable& table) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  double worst_cross = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 5;
    OracleProblem prob;
    prob.matrix = random_spd(n, rng);
    prob.rhs = Vec::NullaryExpr(n, [&](Eigen::Index) { return 2.0 * unit(rng); });
    BoxConstraint box;
    box.lower = Vec::Constant(n, -0.5);
    box.upper = Vec::Constant(n, 0.5);
    prob.box = box;
    const Vec a = active_set_oracle(prob);
    const Vec b = proximal_gradient_oracle(prob, 1000000);
    worst_cross = std::max(worst_cross, (a - b).cwiseAbs().maxCoeff());
  }
  table.row("cross-oracle agreement (box QP)", worst_cross <= 1e-9,
            "max deviation " + format_double(worst_cross));

  double worst_vi = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 8;
    OracleProblem prob;
    prob.matrix = random_spd(n, rng);
    prob.rhs = Vec::NullaryExpr(n, [&](Eigen::Index) { return 2.0 * unit(rng); });
    for (int g = 0; g < 2; ++g) {
      Vec2 normal(unit(rng), unit(rng));
      if (normal.norm() < 1e-3) normal = Vec2(0.0, 1.0);
      normal.normalize();
      prob.friction.push_back({4 * g, 4 * g + 1, normal, std::abs(unit(rng))});
    }
    EllipticVIProblem sparse_prob;
    sparse_prob.matrix = prob.matrix.sparseView();
    sparse_prob.rhs = prob.rhs;
    sparse_prob.friction = prob.friction;
    const Vec solved =
        solve_elliptic_vi(sparse_prob, Vec::Zero(n), 1e-12, 2000000).solution;
    const Vec oracle = proximal_gradient_oracle(prob, 1000000);
    worst_vi = std::max(worst_vi, (solved - oracle).cwiseAbs().maxCoeff());
  }
  table.row("solve_elliptic_vi vs proximal gradient oracle", worst_vi <= 1e-7,
            "max deviation " + format_double(worst_vi));
}

void run_heat_suite(SuiteTable& table, std::ostream& out) {
  const HeatStudy study = manufactured_heat_study(4);
  out << "h,error\n";
  for (const auto& [h, e] : study.spatial.points) out << format_double(h) << ',' << format_double(e) << "\n";
  out << "dt,error\n";
  for (const auto& [dt, e] : study.temporal.points)
    out << format_double(dt) << ',' << format_double(e) << "\n";
  table.row("manufactured heat spatial order", study.spatial.pass,
            "fitted " + format_double(study.spatial.fitted_order) + " (target >= 1.9, R^2 " +
                format_double(study.spatial.r_squared) + ")");
  table.row("manufactured heat temporal order", study.temporal.pass,
            "fitted " + format_double(study.temporal.fitted_order) + " (target >= 0.9, R^2 " +
                format_double(study.temporal.r_squared) + ")");
}

void run_lipschitz_suite(SuiteTable& table) {
  std::mt19937_64 seed_rng(7);
  const int n = 6;
  Mat linear = random_spd(n, seed_rng);
  const double spectral = linear.operatorNorm();
  auto sampler = [n](std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    return Vec(Vec::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); }));
  };
  const double probe =
      lipschitz_probe([&linear](const Vec& v) { return Vec(linear * v); }, sampler, 1000, 42);
  table.row("linear map probe below spectral norm",
            probe <= spectral * (1.0 + 1e-6) && probe >= 0.5 * spectral,
            "probe " + format_double(probe) + " vs |M| " + format_double(spectral));

  const double const_probe =
      lipschitz_probe([n](const Vec&) { return Vec(Vec::Ones(n)); }, sampler, 200, 43);
  table.row("constant map probe is zero", const_probe == 0.0, format_double(const_probe));

  auto prox_sampler = [](std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    return Vec(Vec::NullaryExpr(2, [&](Eigen::Index) { return 2.0 * gauss(rng); }));
  };
  double worst = 0.0;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> weight_dist(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec2 normal(gauss(rng), gauss(rng));
    if (normal.norm() < 1e-3) normal = Vec2(1.0, 0.0);
    normal.normalize();
    const double w = weight_dist(rng);
    const double probe_w = lipschitz_probe(
        [&normal, w](const Vec& v) {
          const Vec2 p = prox_friction_node(Vec2(v[0], v[1]), normal, w);
          Vec out(2);
          out << p.x(), p.y();
          return out;
        },
        prox_sampler, 200, 100 + trial);
    worst = std::max(worst, probe_w);
  }
  table.row("prox_friction_node is 1-Lipschitz", worst <= 1.0 + 1e-9,
            "max probe " + format_double(worst));
}

}  // namespace

int cmd_verify(const std::string& suite, std::ostream& out, std::ostream& err) {
  if (suite != "oracles" && suite != "heat" && suite != "lipschitz" && suite != "all") {
    err << "unknown suite '" << suite << "' (expected oracles, heat, lipschitz or all)\n";
    return 1;
  }
  SuiteTable table{out};
  if (suite == "oracles" || suite == "all") run_oracle_suite(table);
  if (suite == "heat" || suite == "all") run_heat_suite(table, out);
  if (suite == "lipschitz" || suite == "all") run_lipschitz_suite(table);
  out << (table.all_pass ? "all checks passed\n" : "some checks FAILED\n");
  return table.all_pass ? 0 : 1;
}

int cmd_mesh_info(const std::string& mesh_path, std::ostream& out, std::ostream& err) {
  try {
    const Mesh2D mesh = load_mesh(mesh_path);
    int g1 = 0, g2 = 0, g3 = 0;
    for (const BoundaryEdge& be : mesh.boundary_edges) {
      if (be.label == BoundaryLabel::Gamma1) ++g1;
      if (be.label == BoundaryLabel::Gamma2) ++g2;
      if (be.label == BoundaryLabel::Gamma3) ++g3;
    }
    out << "vertices: " << mesh.vertex_count() << "\n";
    out << "triangles: " << mesh.triangle_count() << "\n";
    out << "area: " << format_double(mesh_area(mesh)) << "\n";
    out << "boundary edges: G1 " << g1 << ", G2 " << g2 << ", G3 " << g3 << "\n";
    if (g3 > 0) {
      const CurveMesh curve = extract_curve(mesh);
      out << "contact curve: " << curve.node_count() << " nodes, length "
          << format_double(curve.length()) << (curve.closed ? " (closed)" : " (open)") << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace contactsim
