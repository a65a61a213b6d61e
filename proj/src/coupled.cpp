#include "contactsim/coupled.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace contactsim {

void SolverConfig::validate() const {
  if (grid.T <= 0.0) throw ConfigError("grid.T must be positive");
  if (grid.n_steps < 1) throw ConfigError("grid.n_steps must be >= 1");
  if (!(vi_tol > 0.0 && lambda_tol > 0.0 && pi_tol > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (!(vi_tol < lambda_tol && lambda_tol < pi_tol))
    throw ConfigError("solver tolerances must decrease strictly inward: vi_tol < lambda_tol < pi_tol");
  if (pi_max < 1 || lambda_max < 1 || vi_max < 1 || pgs_max < 1)
    throw ConfigError("iteration caps must be >= 1");
  if (probes < 1 || trace_probes < 1) throw ConfigError("probe counts must be >= 1");
}

double ContractionReport::recompute_m0() const {
  const AbstractConstants& c = constants;
  const double base = c.beta + T * (c.L1 * c.r1J + c.alpha * c.sJ) + c.gamma * c_hat * c.L_varphi_wear;
  const double tail = (c.L1 * c.r2J * T + c.gamma * c_hat * c.L_varphi_wear) *
                      std::sqrt(d1_hat * c.L_phi_damage * T);
  return base + tail;
}

namespace {

double friction_j(const Vec& v, const std::vector<ProxGroup>& groups) {
  double j = 0.0;
  for (const ProxGroup& g : groups) {
    const Vec2 node(v[g.dof_x], v[g.dof_y]);
    const Vec2 tangent(g.normal.y(), -g.normal.x());
    j += g.weight * std::abs(node.dot(tangent));
  }
  return j;
}

struct StepProblemBuilder {
  const MaterialModel& material;
  const DiscreteSetting& setting;
  std::vector<Vec> loads;  // f(t_k)

  StepProblemBuilder(const MaterialModel& mat, const LoadModel& load, const TimeGrid& grid,
                     const DiscreteSetting& s)
      : material(mat), setting(s) {
    loads.reserve(grid.point_count());
    const SpatialField2 f0 = [&load](double t, const Vec2&) { return load.f0(t); };
    const SpatialField2 f2 = [&load](double t, const Vec2&) { return load.f2(t); };
    for (int k = 0; k < grid.point_count(); ++k)
      loads.push_back(assemble_load(s.mesh, s.V, f0, f2, grid.time(k)));
  }

  /// Elliptic VI data at step k with frozen history arguments: y enters the
  /// rhs through <y, eps(v)>_Q, the normal compliance term through the nodal
  /// lumped boundary integral, and the friction term as prox groups.
  EllipticVIProblem build(int k, const Mat& r_term, const Vec& s_term, const Vec& eta_frozen,
                          const Vec& wear_k) const {
    EllipticVIProblem prob;
    prob.matrix = setting.viscosity.matrix;
    prob.rhs = loads[k] - history_load(setting.mesh, setting.V, r_term);
    const FrictionWeights fw = friction_weights(s_term, eta_frozen, wear_k, material, setting);
    for (int i = 0; i < setting.curve.node_count(); ++i) {
      const int dof = setting.trace.vdof[i];
      if (dof < 0) continue;
      prob.rhs[dof] -= fw.normal_coeff[i] * setting.frame.normal[i].x();
      prob.rhs[dof + 1] -= fw.normal_coeff[i] * setting.frame.normal[i].y();
      if (fw.prox_weight[i] > 0.0)
        prob.friction.push_back({dof, dof + 1, setting.frame.normal[i], fw.prox_weight[i]});
    }
    return prob;
  }
};

}  // namespace

Trajectory solve_qvi_trajectory(const Trajectory& xi, const Trajectory& wear,
                                const MaterialModel& material, const LoadModel& load,
                                const InitialState& init, const SolverConfig& config,
                                const DiscreteSetting& setting, QVIDiagnostics* diag,
                                const Trajectory* initial_guess) {
  xi.check();
  wear.check();
  const TimeGrid& grid = config.grid;
  if (xi.grid.n_steps != grid.n_steps || wear.grid.n_steps != grid.n_steps)
    throw Error("solve_qvi_trajectory: trajectories on a different grid");

  const StepProblemBuilder builder(material, load, grid, setting);
  const SpectralEstimates spectrum = estimate_spectrum(setting.viscosity.matrix);
  long vi_iterations = 0;

  auto lambda_map = [&](const Trajectory& frozen) {
    const HistoryTerms hist(frozen, xi, init.u0, setting.mesh, setting.V, setting.Y, setting.trace,
                            setting.frame, material.theta_B, material.zeta_B, material.kernel);
    Trajectory next = Trajectory::zeros(grid, setting.V.dof_count);
    for (int k = 0; k < grid.point_count(); ++k) {
      const EllipticVIProblem prob =
          builder.build(k, hist.r_term(k), hist.s_term(k), frozen.values[k], wear.values[k]);
      const VISolveResult res =
          solve_elliptic_vi(prob, frozen.values[k], config.vi_tol, config.vi_max, &spectrum);
      if (!res.converged)
        throw SolverError("per-step VI did not converge at t_" + std::to_string(k) +
                          " (residual " + format_double(res.residual) + ")");
      vi_iterations += res.iterations;
      next.values[k] = res.solution;
    }
    return next;
  };

  const Trajectory start =
      initial_guess ? *initial_guess : Trajectory::zeros(grid, setting.V.dof_count);
  auto v_norm = [&setting](const Vec& v) { return setting.v_norm(v); };
  PicardResult picard =
      picard_trajectory(lambda_map, start, config.lambda_tol, config.lambda_max, v_norm);

  if (diag) {
    diag->sweep_diffs = picard.diffs;
    diag->converged = picard.converged;
    diag->sweeps = picard.iterations;
    diag->vi_iterations = vi_iterations;
    diag->measured_ratio = picard.last_ratio();
  } else if (!picard.converged) {
    throw SolverError("Lambda iteration did not converge in " + std::to_string(picard.iterations) +
                      " sweeps (last ratio " + format_double(picard.last_ratio()) + ")");
  }
  return picard.trajectory;
}

Trajectory solve_damage_trajectory(const Trajectory& kappa, const MaterialModel& material,
                                   const InitialState& init, const SolverConfig& config,
                                   const DiscreteSetting& setting) {
  kappa.check();
  Trajectory xi = Trajectory::zeros(config.grid, setting.Y.dof_count);
  xi.values[0] = init.xi0;
  ParabolicVIStepProblem prob;
  prob.lumped_mass = setting.mass_Y_lumped.matrix.diagonal();
  prob.stiffness = setting.damage_stiffness.matrix;
  prob.dt = config.grid.dt();
  for (int k = 1; k < config.grid.point_count(); ++k) {
    prob.previous = xi.values[k - 1];
    prob.source = damage_source(kappa.values[k], material, setting);
    const PGSResult res = parabolic_vi_step(prob, config.vi_tol, config.pgs_max);
    if (!res.converged)
      throw SolverError("damage step " + std::to_string(k) + " did not converge (residual " +
                        format_double(res.residual) + ")");
    xi.values[k] = res.solution;
  }
  return xi;
}

Trajectory solve_wear_trajectory(const Trajectory& kappa, const Trajectory& xi,
                                 const MaterialModel& material, const InitialState& init,
                                 const SolverConfig& config, const DiscreteSetting& setting) {
  kappa.check();
  xi.check();
  Trajectory wear = Trajectory::zeros(config.grid, setting.curve.node_count());
  wear.values[0] = init.w0;
  HeatStepProblem prob;
  prob.mass = setting.curve_mass_lumped.matrix;
  prob.diffusion = setting.curve_diffusion.matrix;
  prob.dt = config.grid.dt();
  for (int k = 1; k < config.grid.point_count(); ++k) {
    prob.previous = wear.values[k - 1];
    prob.source = wear_source(kappa.values[k], xi.values[k], material, setting);
    wear.values[k] = heat_robin_step(prob);
  }
  return wear;
}

namespace {

ContractionReport make_report(const AbstractConstants& constants, const MaterialModel& material,
                              const SolverConfig& config, const DiscreteSetting& setting,
                              int probes) {
  ContractionReport report;
  report.constants = constants;
  report.T = config.grid.T;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // c_hat: sup-norm gain of the wear solve over random bounded sources,
  // started from zero wear (the equation is linear, so differences of
  // solutions probe the same constant).
  const int n_curve = setting.curve.node_count();
  HeatStepProblem heat;
  heat.mass = setting.curve_mass_lumped.matrix;
  heat.diffusion = setting.curve_diffusion.matrix;
  heat.dt = config.grid.dt();
  for (int p = 0; p < probes; ++p) {
    double source_sup = 0.0;
    double w_sup = 0.0;
    Vec w = Vec::Zero(n_curve);
    std::vector<Vec> sources(config.grid.point_count());
    for (auto& s : sources) {
      s = Vec::NullaryExpr(n_curve, [&](Eigen::Index) { return unit(rng); });
      source_sup = std::max(source_sup, s.cwiseAbs().maxCoeff());
    }
    for (int k = 1; k < config.grid.point_count(); ++k) {
      heat.previous = w;
      heat.source = sources[k];
      w = heat_robin_step(heat);
      w_sup = std::max(w_sup, w.cwiseAbs().maxCoeff());
    }
    if (source_sup > 0.0) report.c_hat = std::max(report.c_hat, w_sup / source_sup);
  }

  // d1_hat: squared Y1 stability of the damage VI against source
  // perturbations, max over probes and time of
  // |xi1(t) - xi2(t)|_{Y1}^2 / int_0^t |p1 - p2|_{Y1}^2.
  const int n_y = setting.Y.dof_count;
  ParabolicVIStepProblem damage;
  damage.lumped_mass = setting.mass_Y_lumped.matrix.diagonal();
  damage.stiffness = setting.damage_stiffness.matrix;
  damage.dt = config.grid.dt();
  const double dt = config.grid.dt();
  for (int p = 0; p < probes; ++p) {
    std::vector<Vec> p1(config.grid.point_count()), p2(config.grid.point_count());
    for (int k = 0; k < config.grid.point_count(); ++k) {
      p1[k] = Vec::NullaryExpr(n_y, [&](Eigen::Index) { return unit(rng); });
      p2[k] = p1[k] + 0.5 * Vec::NullaryExpr(n_y, [&](Eigen::Index) { return unit(rng); });
    }
    Vec xi1 = Vec::Constant(n_y, 0.5), xi2 = xi1;
    double integral = 0.0;
    auto dp_norm_sq = [&](int k) {
      const Vec d = p1[k] - p2[k];
      return d.dot(setting.mass_Y.matrix * d);
    };
    for (int k = 1; k < config.grid.point_count(); ++k) {
      damage.previous = xi1;
      damage.source = setting.mass_Y.matrix * p1[k];
      xi1 = parabolic_vi_step(damage, config.vi_tol, config.pgs_max).solution;
      damage.previous = xi2;
      damage.source = setting.mass_Y.matrix * p2[k];
      xi2 = parabolic_vi_step(damage, config.vi_tol, config.pgs_max).solution;
      integral += 0.5 * dt * (dp_norm_sq(k - 1) + dp_norm_sq(k));
      if (integral > 0.0) {
        const Vec d = xi1 - xi2;
        report.d1_hat = std::max(report.d1_hat, d.dot(setting.mass_Y.matrix * d) / integral);
      }
    }
  }
  (void)material;

  const AbstractConstants& c = report.constants;
  report.l_K = c.m > 0.0 ? c.beta / c.m : 0.0;
  report.L_K = c.m > 0.0 ? (c.L1 * c.r1J + c.alpha * c.sJ) / c.m : 0.0;
  report.m0 = report.recompute_m0();
  report.verdict_m_gt_beta = c.m > c.beta;
  report.verdict_m_gt_m0 = c.m > report.m0;
  return report;
}

}  // namespace

ContractionReport contraction_report(const MaterialModel& material, const LoadModel& load,
                                     const InitialState& init, const SolverConfig& config,
                                     const DiscreteSetting& setting, int probes) {
  config.validate();
  const HypothesisReport hyp =
      validate_hypotheses(material, load, init, setting, config.trace_probes, config.seed);
  return make_report(hyp.constants, material, config, setting, probes);
}

SimulationResult solve_pi_fixed_point(const MaterialModel& material, const LoadModel& load,
                                      const InitialState& init, const SolverConfig& config,
                                      const DiscreteSetting& setting) {
  config.validate();
  const HypothesisReport hyp =
      validate_hypotheses(material, load, init, setting, config.trace_probes, config.seed);
  if (!hyp.all_pass) {
    std::string msg = "hypothesis validation failed:";
    for (const HypothesisCheck& c : hyp.checks)
      if (!c.pass) msg += " [" + c.name + ": " + c.message + "]";
    throw ConfigError(msg);
  }

  SimulationResult result;
  result.report = make_report(hyp.constants, material, config, setting, config.probes);

  auto v_norm = [&setting](const Vec& v) { return setting.v_norm(v); };
  Trajectory kappa = Trajectory::zeros(config.grid, setting.V.dof_count);
  bool outer_converged = false;
  bool inner_failed = false;

  for (int sweep = 1; sweep <= config.pi_max; ++sweep) {
    const Trajectory xi = solve_damage_trajectory(kappa, material, init, config, setting);
    const Trajectory wear = solve_wear_trajectory(kappa, xi, material, init, config, setting);
    QVIDiagnostics qd;
    qd.ratio_bound = result.report.l_K + config.grid.T * result.report.L_K;
    const Trajectory eta =
        solve_qvi_trajectory(xi, wear, material, load, init, config, setting, &qd, &kappa);
    result.log.qvi.push_back(qd);
    result.log.vi_iterations_total += qd.vi_iterations;
    result.report.lambda_ratios.push_back(qd.measured_ratio);
    if (!qd.converged) {
      inner_failed = true;
      kappa = eta;
      break;
    }

    const double diff = trajectory_distance(eta, kappa, v_norm);
    result.log.pi_diffs.push_back(diff);
    kappa = eta;
    if (diff <= config.pi_tol) {
      outer_converged = true;
      break;
    }
  }

  for (std::size_t i = 1; i < result.log.pi_diffs.size(); ++i)
    if (result.log.pi_diffs[i - 1] > 0.0)
      result.report.pi_ratios.push_back(result.log.pi_diffs[i] / result.log.pi_diffs[i - 1]);

  // Make the stored fields self-consistent with the final velocity, then
  // tighten the per-step VI solutions so downstream certificates see
  // near-exact steps. Two passes: the second resolves with history arguments
  // refrozen at the polished trajectory.
  result.xi = solve_damage_trajectory(kappa, material, init, config, setting);
  result.wear = solve_wear_trajectory(kappa, result.xi, material, init, config, setting);
  if (!inner_failed) {
    const double polish_tol = std::min(config.polish_tol, config.vi_tol);
    const StepProblemBuilder builder(material, load, config.grid, setting);
    const SpectralEstimates spectrum = estimate_spectrum(setting.viscosity.matrix);
    for (int pass = 0; pass < 2; ++pass) {
      const HistoryTerms hist(kappa, result.xi, init.u0, setting.mesh, setting.V, setting.Y,
                              setting.trace, setting.frame, material.theta_B, material.zeta_B,
                              material.kernel);
      for (int k = 0; k < config.grid.point_count(); ++k) {
        const EllipticVIProblem prob = builder.build(k, hist.r_term(k), hist.s_term(k),
                                                     kappa.values[k], result.wear.values[k]);
        const VISolveResult res =
            solve_elliptic_vi(prob, kappa.values[k], polish_tol, config.vi_max, &spectrum);
        if (res.converged) kappa.values[k] = res.solution;
      }
    }
  }

  result.eta = kappa;
  result.u = integrate_trajectory(result.eta, init.u0);
  result.stress.reserve(config.grid.point_count());
  for (int k = 0; k < config.grid.point_count(); ++k)
    result.stress.push_back(reconstruct_stress(result.eta, result.xi, init.u0, material, setting, k));
  result.converged = outer_converged;
  return result;
}

double vi_residual_certificate(const SimulationResult& result, const MaterialModel& material,
                               const LoadModel& load, const InitialState& init,
                               const SolverConfig& config, const DiscreteSetting& setting,
                               int directions, std::uint64_t seed) {
  const StepProblemBuilder builder(material, load, config.grid, setting);
  const HistoryTerms hist(result.eta, result.xi, init.u0, setting.mesh, setting.V, setting.Y,
                          setting.trace, setting.frame, material.theta_B, material.zeta_B,
                          material.kernel);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.grid.point_count(); ++k) {
    const Vec& eta = result.eta.values[k];
    const EllipticVIProblem prob =
        builder.build(k, hist.r_term(k), hist.s_term(k), eta, result.wear.values[k]);
    const Vec grad = prob.matrix * eta - prob.rhs;
    const double j_eta = friction_j(eta, prob.friction);
    for (int d = 0; d < directions; ++d) {
      Vec dir(eta.size());
      for (int i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
      dir /= dir.norm();
      const Vec z = eta + dir;
      worst = std::min(worst, grad.dot(z - eta) + friction_j(z, prob.friction) - j_eta);
    }
  }
  return worst;
}

}  // namespace contactsim
