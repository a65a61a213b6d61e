#include <doctest.h>

#include <Eigen/SparseCholesky>

#include <cmath>

#include "contactsim/coupled.hpp"

using namespace contactsim;

namespace {

MaterialModel demo_material() {
  MaterialModel m;
  m.theta_A = 1.0;
  m.zeta_A = 0.5;
  m.theta_B = 0.1;
  m.zeta_B = 0.05;
  m.kernel.kind = RelaxationKernel::Kind::Exponential;
  m.kernel.scale = 0.05;
  m.kernel.rate = 1.0;
  m.kernel.damage_factor = 0.5;
  m.compliance = {0.5, 0.5};
  m.friction = {0.3, 0.02, 0.02, 0.5};
  m.gap = 0.0;
  m.damage = {0.1, 0.1, 0.05, -1e6};
  m.wear = {0.0, 0.1, 0.1, 0.05};
  return m;
}

LoadModel compressive_load() {
  LoadModel load;
  load.f0.base = Vec2(0.2, -1.0);
  return load;
}

InitialState zero_init(const DiscreteSetting& setting, double xi0 = 0.2) {
  InitialState init;
  init.u0 = Vec::Zero(setting.V.dof_count);
  init.w0 = Vec::Zero(setting.curve.node_count());
  init.xi0 = Vec::Constant(setting.Y.dof_count, xi0);
  return init;
}

SolverConfig small_config() {
  SolverConfig config;
  config.grid = {0.5, 8};
  config.probes = 4;
  config.trace_probes = 50;
  return config;
}

}  // namespace

TEST_CASE("solve_qvi_trajectory decouples to per-step linear solves") {
  MaterialModel material = demo_material();
  material.theta_B = material.zeta_B = 0.0;
  material.kernel = RelaxationKernel{};
  material.gap = 100.0;  // no contact
  const DiscreteSetting setting = build_setting(generate_rect_mesh(3, 3, {}), material);
  const InitialState init = zero_init(setting);
  const SolverConfig config = small_config();
  const LoadModel load = compressive_load();

  const Trajectory xi = Trajectory::constant(config.grid, init.xi0);
  const Trajectory wear = Trajectory::zeros(config.grid, setting.curve.node_count());
  QVIDiagnostics diag;
  const Trajectory eta = solve_qvi_trajectory(xi, wear, material, load, init, config, setting, &diag);
  CHECK(diag.converged);
  CHECK(diag.sweeps <= 2);

  Eigen::SimplicialLDLT<SpMat> direct(setting.viscosity.matrix);
  const SpatialField2 f0 = [&load](double t, const Vec2&) { return load.f0(t); };
  for (int k : {0, 4, 8}) {
    const Vec f = assemble_load(setting.mesh, setting.V, f0, nullptr, config.grid.time(k));
    const Vec exact = direct.solve(f);
    CHECK((eta.values[k] - exact).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("solve_qvi_trajectory is independent of the Lambda initial guess") {
  // with friction, and frictionless with the memory terms active
  for (const bool frictionless : {false, true}) {
    MaterialModel material = demo_material();
    if (frictionless) {
      material.friction = {0.0, 0.0, 0.0, 1.0};
      material.kernel.scale = 0.2;
    }
    const DiscreteSetting setting = build_setting(generate_rect_mesh(3, 3, {}), material);
    const InitialState init = zero_init(setting);
    const SolverConfig config = small_config();
    const LoadModel load = compressive_load();

    const Trajectory xi = Trajectory::constant(config.grid, init.xi0);
    const Trajectory wear = Trajectory::zeros(config.grid, setting.curve.node_count());

    QVIDiagnostics diag_a, diag_b;
    const Trajectory from_zero =
        solve_qvi_trajectory(xi, wear, material, load, init, config, setting, &diag_a);
    Trajectory other_start =
        Trajectory::constant(config.grid, Vec::Constant(setting.V.dof_count, 0.2));
    const Trajectory from_offset =
        solve_qvi_trajectory(xi, wear, material, load, init, config, setting, &diag_b, &other_start);
    REQUIRE(diag_a.converged);
    REQUIRE(diag_b.converged);

    auto v_norm = [&setting](const Vec& v) { return setting.v_norm(v); };
    CHECK(trajectory_distance(from_zero, from_offset, v_norm) <= 10.0 * config.lambda_tol);

    // measured contraction ratio stays below the ledger bound with margin
    const ContractionReport report =
        contraction_report(material, load, init, config, setting, config.probes);
    if (diag_a.measured_ratio > 0.0)
      CHECK(diag_a.measured_ratio <= report.l_K + config.grid.T * report.L_K + 0.5);
  }
}

TEST_CASE("solve_damage_trajectory saturation and stationarity") {
  MaterialModel material = demo_material();
  const DiscreteSetting setting = build_setting(generate_rect_mesh(3, 3, {}), material);
  const SolverConfig config = small_config();

  // zero velocity, positive lambda_w: damage climbs monotonically toward 1
  const Trajectory still = Trajectory::zeros(config.grid, setting.V.dof_count);
  InitialState init = zero_init(setting, 0.9);
  MaterialModel strong = material;
  strong.damage.lambda_w = 5.0;
  const Trajectory climbing = solve_damage_trajectory(still, strong, init, config, setting);
  for (int k = 1; k < config.grid.point_count(); ++k)
    CHECK((climbing.values[k] - climbing.values[k - 1]).minCoeff() >= -1e-14);
  CHECK(climbing.values.back().maxCoeff() == 1.0);
  // spatially constant state with constant source follows the pointwise
  // lumped formula clamp(xi0 + t lambda_w, 0, 1)
  for (int k = 0; k < config.grid.point_count(); ++k) {
    const double expected = std::min(1.0, 0.9 + config.grid.time(k) * strong.damage.lambda_w);
    CHECK((climbing.values[k] - Vec::Constant(setting.Y.dof_count, expected)).cwiseAbs().maxCoeff() <
          1e-10);
  }

  // zero source: constant initial damage is stationary
  MaterialModel idle = material;
  idle.damage.lambda_E = 1e-12;  // the family requires positive parameters
  idle.damage.lambda_w = 1e-12;
  const Trajectory frozen = solve_damage_trajectory(still, idle, zero_init(setting, 0.37), config, setting);
  for (const Vec& v : frozen.values)
    CHECK((v - Vec::Constant(setting.Y.dof_count, 0.37)).cwiseAbs().maxCoeff() < 1e-10);

  // strongly negative source: damage hits the lower clamp and stays
  MaterialModel crushing = material;
  crushing.damage.lambda_w = 0.001;
  crushing.damage.lambda_E = 1000.0;
  Vec shear = Vec::Zero(setting.V.dof_count);
  for (int v = 0; v < setting.mesh.vertex_count(); ++v)
    if (setting.V.node_dof[v] >= 0) shear[setting.V.node_dof[v]] = 3.0 * setting.mesh.vertices[v].x();
  const Trajectory fast = Trajectory::constant(config.grid, shear);
  const Trajectory collapsing =
      solve_damage_trajectory(fast, crushing, zero_init(setting, 0.5), config, setting);
  CHECK(collapsing.values.back().maxCoeff() == 0.0);
  for (const Vec& v : collapsing.values) {
    CHECK(v.minCoeff() >= 0.0);
    CHECK(v.maxCoeff() <= 1.0);
  }
}

TEST_CASE("solve_wear_trajectory mean growth and monotonicity") {
  MaterialModel material = demo_material();
  const DiscreteSetting setting = build_setting(generate_rect_mesh(3, 3, {}), material);
  const SolverConfig config = small_config();
  const Trajectory still = Trajectory::zeros(config.grid, setting.V.dof_count);
  const Trajectory xi = Trajectory::zeros(config.grid, setting.Y.dof_count);

  // zero source, b = 0: constant wear stays for all time
  MaterialModel inert = material;
  inert.wear = {0.0, 0.0, 0.0, 0.0};
  InitialState init = zero_init(setting);
  init.w0 = Vec::Constant(setting.curve.node_count(), 0.7);
  const Trajectory constant = solve_wear_trajectory(still, xi, inert, init, config, setting);
  for (const Vec& v : constant.values) CHECK((v - init.w0).cwiseAbs().maxCoeff() < 1e-12);

  // constant unit source: the mass-weighted mean grows by dt each step
  MaterialModel fed = material;
  fed.wear = {0.0, 0.0, 0.0, 1.0};
  const Trajectory growing = solve_wear_trajectory(still, xi, fed, zero_init(setting), config, setting);
  const Vec lumped_diag = setting.curve_mass_lumped.matrix.diagonal();
  const double total = lumped_diag.sum();
  for (int k = 0; k < config.grid.point_count(); ++k) {
    const double mean = lumped_diag.dot(growing.values[k]) / total;
    CHECK(mean == doctest::Approx(config.grid.time(k)).epsilon(1e-10));
  }

  // nonnegative source, b = 0, constant start: nodewise nondecreasing
  MaterialModel sliding = material;
  sliding.wear = {0.0, 0.1, 0.2, 0.05};
  const Trajectory xi_live = Trajectory::constant(config.grid, Vec::Constant(setting.Y.dof_count, 0.5));
  const Trajectory monotone =
      solve_wear_trajectory(still, xi_live, sliding, zero_init(setting), config, setting);
  for (int k = 1; k < config.grid.point_count(); ++k)
    CHECK((monotone.values[k] - monotone.values[k - 1]).minCoeff() >= -1e-13);
}

TEST_CASE("solve_pi_fixed_point on a fully decoupled instance stops after two sweeps") {
  MaterialModel material = demo_material();
  material.friction.mu1 = material.friction.mu2 = 0.0;  // mu independent of slip and wear
  material.kernel.damage_factor = 0.0;                  // kernel independent of damage
  material.wear = {0.0, 0.0, 0.0, 0.0};                 // no wear source at all
  const DiscreteSetting setting = build_setting(generate_rect_mesh(3, 3, {}), material);
  const InitialState init = zero_init(setting);
  const SolverConfig config = small_config();

  const SimulationResult result =
      solve_pi_fixed_point(material, compressive_load(), init, config, setting);
  CHECK(result.converged);
  CHECK(result.log.pi_diffs.size() <= 2);
}

TEST_CASE("solve_pi_fixed_point demo run satisfies the physical invariants") {
  const MaterialModel material = demo_material();
  const DiscreteSetting setting = build_setting(generate_rect_mesh(4, 4, {}), material);
  const InitialState init = zero_init(setting);
  const SolverConfig config = small_config();
  const LoadModel load = compressive_load();

  const SimulationResult result = solve_pi_fixed_point(material, load, init, config, setting);
  CHECK(result.converged);

  // damage box
  for (const Vec& v : result.xi.values) {
    CHECK(v.minCoeff() >= 0.0);
    CHECK(v.maxCoeff() <= 1.0);
  }
  // wear never drops below its start when the source is nonnegative and b = 0
  for (const Vec& v : result.wear.values) CHECK((v - init.w0).minCoeff() >= -1e-13);

  // displacement is the exact trapezoid integral of the velocity
  const Trajectory u_check = integrate_trajectory(result.eta, init.u0);
  for (std::size_t k = 0; k < u_check.values.size(); ++k)
    CHECK((u_check.values[k] - result.u.values[k]).cwiseAbs().maxCoeff() <= 1e-12);

  // stress snapshots match an independent reconstruction
  for (int k : {0, 4, 8}) {
    const Mat sigma = reconstruct_stress(result.eta, result.xi, init.u0, material, setting, k);
    CHECK((sigma - result.stress[k]).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // one extra Pi sweep moves the velocity by at most 2 pi_tol
  const Trajectory xi_extra = solve_damage_trajectory(result.eta, material, init, config, setting);
  const Trajectory w_extra =
      solve_wear_trajectory(result.eta, xi_extra, material, init, config, setting);
  const Trajectory eta_extra = solve_qvi_trajectory(xi_extra, w_extra, material, load, init, config,
                                                    setting, nullptr, &result.eta);
  auto v_norm = [&setting](const Vec& v) { return setting.v_norm(v); };
  CHECK(trajectory_distance(eta_extra, result.eta, v_norm) <= 2.0 * config.pi_tol);

  // VI certificate at the returned trajectory
  const double worst = vi_residual_certificate(result, material, load, init, config, setting, 20, 77);
  CHECK(worst >= -10.0 * config.vi_tol);

  // converged runs agree across tolerance refinement
  SolverConfig tighter = config;
  tighter.pi_tol = 1e-9;
  tighter.lambda_tol = 1e-10;
  tighter.vi_tol = 1e-12;
  const SimulationResult refined = solve_pi_fixed_point(material, load, init, tighter, setting);
  CHECK(trajectory_distance(refined.eta, result.eta, v_norm) <= 1e-5);
}

TEST_CASE("solve_pi_fixed_point rejects hypothesis violations") {
  MaterialModel material = demo_material();
  material.gap = -1.0;
  const DiscreteSetting setting = build_setting(generate_rect_mesh(2, 2, {}), material);
  CHECK_THROWS_AS(solve_pi_fixed_point(material, compressive_load(), zero_init(setting),
                                       small_config(), setting),
                  ConfigError);
}

TEST_CASE("contraction_report m0 assembly and coupling zeroing") {
  const DiscreteSetting setting = build_setting(generate_rect_mesh(3, 3, {}), demo_material());
  const SolverConfig config = small_config();
  const LoadModel load = compressive_load();

  const MaterialModel material = demo_material();
  const InitialState init = zero_init(setting);
  const ContractionReport report =
      contraction_report(material, load, init, config, setting, config.probes);
  CHECK(std::abs(report.m0 - report.recompute_m0()) <= 1e-12 * std::max(1.0, report.m0));
  CHECK(report.l_K == doctest::Approx(report.constants.beta / report.constants.m));
  CHECK(report.c_hat > 0.0);
  CHECK(report.d1_hat > 0.0);
  CHECK(report.d1_hat < 100.0);  // Gronwall-type envelope at T = 0.5

  // mu constant in slip and wear: beta = gamma = 0, no kernel: tail vanishes
  MaterialModel frictionless_coupling = demo_material();
  frictionless_coupling.friction.mu1 = 0.0;
  frictionless_coupling.friction.mu2 = 0.0;
  frictionless_coupling.kernel = RelaxationKernel{};
  frictionless_coupling.wear = {0.0, 0.0, 0.0, 0.0};
  const DiscreteSetting s2 = build_setting(generate_rect_mesh(3, 3, {}), frictionless_coupling);
  const ContractionReport r2 =
      contraction_report(frictionless_coupling, load, zero_init(s2), config, s2, 2);
  CHECK(r2.constants.beta == 0.0);
  CHECK(r2.constants.gamma == 0.0);
  CHECK(r2.m0 == doctest::Approx(config.grid.T * (r2.constants.L1 * r2.constants.r1J +
                                                  r2.constants.alpha * r2.constants.sJ))
                     .epsilon(1e-12));

  // compliance off: alpha = beta = gamma = 0 exactly; with no kernel,
  // m0 = T L1 r1J
  MaterialModel no_contact = demo_material();
  no_contact.compliance.L_p = 0.0;
  no_contact.kernel = RelaxationKernel{};
  const DiscreteSetting s3 = build_setting(generate_rect_mesh(3, 3, {}), no_contact);
  const ContractionReport r3 = contraction_report(no_contact, load, zero_init(s3), config, s3, 2);
  CHECK(r3.constants.alpha == 0.0);
  CHECK(r3.constants.beta == 0.0);
  CHECK(r3.constants.gamma == 0.0);
  CHECK(r3.m0 == doctest::Approx(config.grid.T * r3.constants.L1 * r3.constants.r1J).epsilon(1e-12));
}

TEST_CASE("solver config tolerance ordering is enforced") {
  SolverConfig config;
  config.vi_tol = 1e-8;  // not below lambda_tol
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = SolverConfig{};
  config.grid.T = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}
