#pragma once

#include <cstdint>
#include <vector>

#include "contactsim/contact_model.hpp"
#include "contactsim/history.hpp"
#include "contactsim/types.hpp"
#include "contactsim/vi_solvers.hpp"

namespace contactsim {

struct SolverConfig {
  TimeGrid grid{1.0, 32};
  // Nested loop tolerances, strictly decreasing inward so inner error does
  // not pollute outer ratio measurements.
  double pi_tol = 1e-8;
  double lambda_tol = 1e-9;
  double vi_tol = 1e-10;
  /// Error tolerance of the post-convergence polishing passes over the
  /// per-step VIs.
  double polish_tol = 1e-12;
  int pi_max = 80;
  int lambda_max = 300;
  long vi_max = 2000000;
  int pgs_max = 100000;
  int probes = 8;        // perturbation probes for the c and d1 estimates
  int trace_probes = 200;
  std::uint64_t seed = 42;

  void validate() const;  // throws ConfigError
};

/// The constant ledger: closed-form hypothesis constants, empirical estimates,
/// the derived thresholds, and the measured iteration ratios.
struct ContractionReport {
  AbstractConstants constants;
  double T = 0.0;
  double c_hat = 0.0;   // wear sup-norm stability constant (probed)
  double d1_hat = 0.0;  // damage source-stability constant (probed)
  double l_K = 0.0;     // beta / m
  double L_K = 0.0;     // (L1 r1J + alpha sJ) / m
  double m0 = 0.0;
  std::vector<double> lambda_ratios;  // last measured ratio per QVI solve
  std::vector<double> pi_ratios;
  bool verdict_m_gt_beta = false;
  bool verdict_m_gt_m0 = false;

  /// m0 from the stored components:
  /// beta + T(L1 r1J + alpha sJ) + gamma c L_varphi
  ///      + (L1 r2J T + gamma c L_varphi) sqrt(d1 L_phi T).
  double recompute_m0() const;
};

struct QVIDiagnostics {
  std::vector<double> sweep_diffs;
  bool converged = false;
  int sweeps = 0;
  long vi_iterations = 0;
  double measured_ratio = 0.0;
  double ratio_bound = 0.0;  // l_K + T L_K when the ledger is available
};

struct IterationLog {
  std::vector<double> pi_diffs;
  std::vector<QVIDiagnostics> qvi;
  long vi_iterations_total = 0;
};

struct SimulationResult {
  Trajectory eta;   // velocity
  Trajectory u;     // displacement = I eta
  Trajectory xi;    // damage
  Trajectory wear;  // wear on the curve
  std::vector<Mat> stress;  // elementwise tensors per time index
  ContractionReport report;
  IterationLog log;
  bool converged = false;
};

/// Inner Lambda iteration of the per-step quasivariational inequality: sweeps
/// solve, at every time index, the elliptic VI with history arguments
/// y = R(u, xi)(t_k), z = S u(t_k) and friction weights frozen at the current
/// trajectory iterate u, until the C(I;V) difference drops to lambda_tol.
Trajectory solve_qvi_trajectory(const Trajectory& xi, const Trajectory& wear,
                                const MaterialModel& material, const LoadModel& load,
                                const InitialState& init, const SolverConfig& config,
                                const DiscreteSetting& setting, QVIDiagnostics* diag = nullptr,
                                const Trajectory* initial_guess = nullptr);

/// Backward-Euler march of the damage parabolic VI driven by the velocity
/// trajectory kappa; all states stay in [0,1].
Trajectory solve_damage_trajectory(const Trajectory& kappa, const MaterialModel& material,
                                   const InitialState& init, const SolverConfig& config,
                                   const DiscreteSetting& setting);

/// Implicit Euler march of the wear Robin diffusion with source
/// varphi(kappa(t), xi(t)).
Trajectory solve_wear_trajectory(const Trajectory& kappa, const Trajectory& xi,
                                 const MaterialModel& material, const InitialState& init,
                                 const SolverConfig& config, const DiscreteSetting& setting);

/// Outer Pi iteration: kappa -> (damage, wear, velocity); wear is driven by
/// the outer iterate, and the iteration runs until the C(I;V) difference of
/// the velocity drops to pi_tol. The m > m0 verdict is reported but
/// convergence is attempted regardless.
SimulationResult solve_pi_fixed_point(const MaterialModel& material, const LoadModel& load,
                                      const InitialState& init, const SolverConfig& config,
                                      const DiscreteSetting& setting);

/// Fills the ledger: closed-form constants, probed c and d1 estimates, the
/// derived thresholds and the verdicts. No time marching beyond probe solves.
ContractionReport contraction_report(const MaterialModel& material, const LoadModel& load,
                                     const InitialState& init, const SolverConfig& config,
                                     const DiscreteSetting& setting, int probes);

/// Worst violation of the discrete inequality
///   <M eta - rhs, z - eta> + j(z) - j(eta) >= 0
/// over `directions` random test vectors per time step, with the history
/// arguments frozen at the returned velocity. Nonnegative results certify the
/// inequality; small negative values are solver tolerance.
double vi_residual_certificate(const SimulationResult& result, const MaterialModel& material,
                               const LoadModel& load, const InitialState& init,
                               const SolverConfig& config, const DiscreteSetting& setting,
                               int directions, std::uint64_t seed);

}  // namespace contactsim
