#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contactsim/assembly.hpp"
#include "contactsim/geometry.hpp"
#include "contactsim/history.hpp"
#include "contactsim/types.hpp"

namespace contactsim {

/// Normal compliance p(r) = min(p_star, L_p * max(r, 0)): zero without
/// penetration, Lipschitz L_p, bounded by p_star.
struct ComplianceLaw {
  double L_p = 1.0;
  double p_star = 1.0;

  double operator()(double penetration) const {
    return std::min(p_star, L_p * std::max(penetration, 0.0));
  }
};

/// Friction coefficient mu(slip, wear) = clamp(mu0 + mu1*slip + mu2*wear, 0, mu_star).
struct FrictionLaw {
  double mu0 = 0.3;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu_star = 1.0;

  double operator()(double slip, double wear) const {
    return std::min(mu_star, std::max(0.0, mu0 + mu1 * slip + mu2 * wear));
  }
  double lipschitz() const { return std::max(std::abs(mu1), std::abs(mu2)); }
};

/// Damage source phi(eps) = max(phi_min, lambda_w - 0.5 * lambda_E |eps|^2).
/// The floor makes the quadratic family globally Lipschitz with the exact
/// constant sqrt(2 lambda_E (lambda_w - phi_min)).
struct DamageLaw {
  double kappa = 0.1;     // damage diffusion, > 0
  double lambda_E = 1.0;  // > 0
  double lambda_w = 1.0;  // > 0
  double phi_min = -1e6;

  double source(double strain_sq) const {
    return std::max(phi_min, lambda_w - 0.5 * lambda_E * strain_sq);
  }
  double lipschitz() const { return std::sqrt(2.0 * lambda_E * std::max(0.0, lambda_w - phi_min)); }
};

/// Wear source varphi(eta, xi) = c1 |eta_tau| + c2 xi + c3 and the Robin
/// coefficient b of the wear diffusion on the contact curve.
struct WearLaw {
  double robin_b = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double lipschitz() const { return std::max(std::abs(c1), std::abs(c2)); }
};

struct MaterialModel {
  double theta_A = 1.0;  // viscosity A e = 2 theta_A e + zeta_A tr(e) I
  double zeta_A = 0.0;
  double theta_B = 0.0;  // elasticity, same isotropic form
  double zeta_B = 0.0;
  RelaxationKernel kernel;
  ComplianceLaw compliance;
  FrictionLaw friction;
  double gap = 0.0;  // soft-layer thickness on Gamma3, >= 0
  DamageLaw damage;
  WearLaw wear;
  /// Strain magnitude covered by the kernel damage-modulation Lipschitz
  /// certificate (the modulated kernel is Lipschitz in xi only on bounded
  /// strain sets).
  double strain_bound = 1.0;

  double L_A() const { return 2.0 * (theta_A + zeta_A); }
  double m_A() const { return 2.0 * theta_A; }
  double L_B() const { return 2.0 * (theta_B + zeta_B); }
  double L_C() const {
    return kernel.scale_max() * std::max(1.0, kernel.damage_factor * strain_bound);
  }
};

/// Time profile from the closed family {constant, linear in t, sinusoidal in t}.
struct TimeProfile {
  enum class Kind { Constant, LinearInT, Sinusoidal };
  Kind kind = Kind::Constant;
  Vec2 base = Vec2::Zero();
  Vec2 rate = Vec2::Zero();  // slope (linear) or amplitude (sinusoidal)
  double freq = 1.0;

  Vec2 operator()(double t) const;
};

struct LoadModel {
  TimeProfile f0;  // body force
  TimeProfile f2;  // Gamma2 traction
};

struct InitialState {
  Vec u0;   // V dofs
  Vec w0;   // curve nodes
  Vec xi0;  // Y nodes, strictly inside (0,1)
};

/// Assembled discrete instantiation of the contact problem: spaces, operators
/// and traces shared by all solvers. Immutable after construction.
struct DiscreteSetting {
  Mesh2D mesh;
  CurveMesh curve;
  BoundaryFrame frame;
  DiscreteSpace V, Y, W;
  CurveTrace trace;
  SparseOperator viscosity;      // per-step VI operator
  SparseOperator strain_gram;    // V inner product
  SparseOperator mass_Y;
  SparseOperator mass_Y_lumped;
  SparseOperator damage_stiffness;
  SparseOperator curve_mass;
  SparseOperator curve_mass_lumped;
  SparseOperator curve_diffusion;  // includes the Robin b term
  Vec curve_weight;                // lumped curve mass diagonal (nodal omega_i)

  double v_norm(const Vec& v) const;
  double y1_norm(const Vec& v) const;
  double z_norm(const Vec& v) const;  // scalar L2 on the curve
};

DiscreteSetting build_setting(Mesh2D mesh, const MaterialModel& material);

/// Per curve node: linear normal-compliance coefficient omega_i p(S_i - g)
/// (moved to the VI right-hand side) and the friction prox weight
/// lambda_i = omega_i mu(|eta_tau,i|, w_i) p(S_i - g) >= 0.
struct FrictionWeights {
  Vec normal_coeff;
  Vec prox_weight;
};

FrictionWeights friction_weights(const Vec& s_val, const Vec& eta, const Vec& wear,
                                 const MaterialModel& material, const DiscreteSetting& setting);

/// Damage source load vector: per element phi(|eps(eta)|^2) distributed to the
/// vertices with P1 mass weighting (area/3 each).
Vec damage_source(const Vec& eta, const MaterialModel& material, const DiscreteSetting& setting);

/// Nodal wear source varphi on the curve: c1 |eta_tau,i| + c2 xi_i + c3.
Vec wear_source(const Vec& eta, const Vec& xi, const MaterialModel& material,
                const DiscreteSetting& setting);

/// Stress sigma(t_k) = A eps(eta(t_k)) + R(eta, xi)(t_k), elementwise tensors.
Mat reconstruct_stress(const Trajectory& eta, const Trajectory& xi, const Vec& u0,
                       const MaterialModel& material, const DiscreteSetting& setting, int k);

/// The abstract constants of the hypothesis set, with the Theorem 4.1
/// identifications L1 = 1, L2 = L_A, m = m_A, alpha = L_p |rho| (1 + mu*),
/// beta = L_mu p* |rho|^2, gamma = L_mu p* |rho|, r1J = L_B + L_C, r2J = L_C,
/// sJ = 1. |rho| is the empirically probed trace norm.
struct AbstractConstants {
  double L_A = 0, m_A = 0, L_B = 0, L_C = 0;
  double L_p = 0, p_star = 0, L_mu = 0, mu_star = 0;
  double L_phi_damage = 0, L_varphi_wear = 0;
  double trace_norm = 0;
  double L1 = 0, L2 = 0, m = 0, alpha = 0, beta = 0, gamma = 0, r1J = 0, r2J = 0, sJ = 0;
  double g1 = 0, g2 = 0;  // = kappa
};

struct HypothesisCheck {
  std::string name;
  bool pass = false;
  std::string message;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  AbstractConstants constants;
  bool all_pass = false;
};

HypothesisReport validate_hypotheses(const MaterialModel& material, const LoadModel& load,
                                     const InitialState& init, const DiscreteSetting& setting,
                                     int trace_probes = 200, std::uint64_t seed = 42);

}  // namespace contactsim
