#pragma once

#include <optional>
#include <vector>

#include "contactsim/history.hpp"
#include "contactsim/types.hpp"

namespace contactsim {

/// One contact node's nonsmooth friction term weight * |v_tau| acting on the
/// dof pair (dof_x, dof_y) in the orthonormal (normal, tangent) frame.
struct ProxGroup {
  int dof_x = -1;
  int dof_y = -1;
  Vec2 normal = Vec2::Zero();
  double weight = 0.0;  // >= 0
};

struct BoxConstraint {
  Vec lower;
  Vec upper;
};

struct EllipticVIProblem {
  SpMat matrix;  // SPD
  Vec rhs;
  std::vector<ProxGroup> friction;
  std::optional<BoxConstraint> box;
};

/// Group soft-threshold of the tangential part: the tangential component
/// shrinks by weight (to zero inside the threshold), the normal component
/// passes through. This is the prox of weight * |v_tau| at the node.
Vec2 prox_friction_node(const Vec2& z, const Vec2& normal, double weight);

struct SpectralEstimates {
  double m_hat = 0.0;  // smallest eigenvalue estimate
  double L_hat = 0.0;  // largest eigenvalue estimate
};

SpectralEstimates estimate_spectrum(const SpMat& matrix, int min_iters = 20);

struct VISolveResult {
  Vec solution;
  bool converged = false;
  long iterations = 0;
  double residual = 0.0;  // ||v - Prox_{rho j}(v - rho (Mv - rhs))|| with rho = m/L^2
  SpectralEstimates spectrum;
};

/// Forward-backward solve of the elliptic VI
///   <Mv, z-v> + j(z) - j(v) >= <rhs, z-v>   for all z,
/// j = sum of friction terms plus the box indicator. The iteration is the
/// prox map v -> Prox_{rho j}(v - rho (Mv - rhs)) accelerated with Nesterov
/// momentum and gradient restart; convergence is certified through the
/// fixed-point residual of the plain map at rho = m_hat / L_hat^2, pushed far
/// enough that the solution error itself is below tol.
VISolveResult solve_elliptic_vi(const EllipticVIProblem& prob, const Vec& init, double tol,
                                long max_iter, const SpectralEstimates* estimates = nullptr);

struct ParabolicVIStepProblem {
  Vec lumped_mass;   // diagonal of the lumped Y1 mass
  SpMat stiffness;   // kappa-scaled damage stiffness
  Vec previous;      // xi^{k-1}, componentwise in [0,1]
  Vec source;        // load-vector form (already integrated against the basis)
  double dt = 0.0;
};

struct PGSResult {
  Vec solution;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

/// Backward-Euler damage step: projected Gauss-Seidel on the box-constrained
/// convex quadratic (M/dt + G) xi = M xi_prev / dt + source, xi in [0,1]^n.
/// The clamp is the last arithmetic operation on every component.
PGSResult parabolic_vi_step(const ParabolicVIStepProblem& prob, double tol, int max_iter);

struct HeatStepProblem {
  SpMat mass;       // curve mass (lumped or consistent)
  SpMat diffusion;  // curve stiffness including the Robin endpoint terms
  Vec previous;
  Vec source;  // nodal values of the wear source
  double dt = 0.0;
};

/// Implicit Euler Robin step: (M/dt + K_b) w = M w_prev / dt + M source.
/// Throws SolverError when the system is numerically singular (possible for
/// b < 0).
Vec heat_robin_step(const HeatStepProblem& prob);

/// Max over time and nodes of |w|; the discrete sup-norm diagnostic.
double sup_norm_estimate(const Trajectory& traj);

}  // namespace contactsim
