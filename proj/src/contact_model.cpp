#include "contactsim/contact_model.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>

namespace contactsim {

Vec2 TimeProfile::operator()(double t) const {
  switch (kind) {
    case Kind::Constant: return base;
    case Kind::LinearInT: return base + t * rate;
    case Kind::Sinusoidal: return base + std::sin(2.0 * M_PI * freq * t) * rate;
  }
  return base;
}

double DiscreteSetting::v_norm(const Vec& v) const {
  return std::sqrt(std::max(0.0, v.dot(strain_gram.matrix * v)));
}

double DiscreteSetting::y1_norm(const Vec& v) const {
  return std::sqrt(std::max(0.0, v.dot(mass_Y.matrix * v)));
}

double DiscreteSetting::z_norm(const Vec& v) const {
  return std::sqrt(std::max(0.0, v.dot(curve_mass.matrix * v)));
}

DiscreteSetting build_setting(Mesh2D mesh, const MaterialModel& material) {
  validate_mesh(mesh);
  DiscreteSetting s;
  s.mesh = std::move(mesh);
  s.curve = extract_curve(s.mesh);
  s.frame = boundary_frame(s.mesh, s.curve);
  s.V = make_velocity_space(s.mesh);
  s.Y = make_damage_space(s.mesh);
  s.W = make_wear_space(s.curve);
  s.trace = make_curve_trace(s.curve, s.V);
  s.viscosity = assemble_viscosity(s.mesh, s.V, material.theta_A, material.zeta_A);
  s.strain_gram = assemble_strain_product(s.mesh, s.V);
  s.mass_Y = assemble_mass(s.mesh, s.Y);
  s.mass_Y_lumped = lumped(s.mass_Y);
  s.damage_stiffness = assemble_damage_stiffness(s.mesh, s.Y, material.damage.kappa);
  s.curve_mass = assemble_mass(s.curve);
  s.curve_mass_lumped = lumped(s.curve_mass);
  s.curve_diffusion = assemble_curve_diffusion(s.curve, material.wear.robin_b);
  s.curve_weight = s.curve_mass_lumped.matrix.diagonal();
  return s;
}

FrictionWeights friction_weights(const Vec& s_val, const Vec& eta, const Vec& wear,
                                 const MaterialModel& material, const DiscreteSetting& setting) {
  const int n = setting.curve.node_count();
  if (s_val.size() != n || wear.size() != n)
    throw Error("friction_weights: curve dimension mismatch");
  FrictionWeights out;
  out.normal_coeff = Vec::Zero(n);
  out.prox_weight = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double pressure = material.compliance(s_val[i] - material.gap);
    const double slip = std::abs(setting.trace.vector_at(eta, i).dot(setting.frame.tangent[i]));
    out.normal_coeff[i] = setting.curve_weight[i] * pressure;
    out.prox_weight[i] = setting.curve_weight[i] * material.friction(slip, wear[i]) * pressure;
  }
  return out;
}

Vec damage_source(const Vec& eta, const MaterialModel& material, const DiscreteSetting& setting) {
  const Mat strains = element_strains(setting.mesh, setting.V, eta);
  Vec source = Vec::Zero(setting.Y.dof_count);
  for (int t = 0; t < setting.mesh.triangle_count(); ++t) {
    const double strain_sq =
        strains(t, 0) * strains(t, 0) + strains(t, 1) * strains(t, 1) + 2.0 * strains(t, 2) * strains(t, 2);
    const double phi = material.damage.source(strain_sq);
    const double share = setting.mesh.signed_area(t) / 3.0;
    for (int v : setting.mesh.triangles[t]) source[setting.Y.node_dof[v]] += share * phi;
  }
  return source;
}

Vec wear_source(const Vec& eta, const Vec& xi, const MaterialModel& material,
                const DiscreteSetting& setting) {
  const int n = setting.curve.node_count();
  Vec source(n);
  for (int i = 0; i < n; ++i) {
    const double slip = std::abs(setting.trace.vector_at(eta, i).dot(setting.frame.tangent[i]));
    const double xi_i = xi[setting.Y.node_dof[setting.curve.node_ids[i]]];
    source[i] = material.wear.c1 * slip + material.wear.c2 * xi_i + material.wear.c3;
  }
  return source;
}

Mat reconstruct_stress(const Trajectory& eta, const Trajectory& xi, const Vec& u0,
                       const MaterialModel& material, const DiscreteSetting& setting, int k) {
  Mat stress =
      isotropic_stress(element_strains(setting.mesh, setting.V, eta.values[k]), material.theta_A,
                       material.zeta_A);
  stress += apply_R(eta, xi, u0, setting.mesh, setting.V, material.theta_B, material.zeta_B,
                    material.kernel, k);
  return stress;
}

namespace {

// Nodal (lumped) L2 norm of the curve trace of a V field; the same quadrature
// the friction functional uses, so the estimated |rho| upper-bounds every
// discrete trace ratio appearing in the j estimates.
double trace_norm_sq(const DiscreteSetting& setting, const Vec& v) {
  double sum = 0.0;
  for (int i = 0; i < setting.curve.node_count(); ++i)
    sum += setting.curve_weight[i] * setting.trace.vector_at(v, i).squaredNorm();
  return sum;
}

double probe_trace_norm(const DiscreteSetting& setting, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = 0.0;
  for (int p = 0; p < probes; ++p) {
    Vec v(setting.V.dof_count);
    for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    const double vn = setting.v_norm(v);
    if (vn == 0.0) continue;
    best = std::max(best, std::sqrt(trace_norm_sq(setting, v)) / vn);
  }

  // Random probing alone under-estimates the operator norm; refine with the
  // generalized eigen iteration x <- G^{-1} T x so the recorded value bounds
  // every field ratio to roundoff.
  Eigen::SimplicialLDLT<SpMat> gram(setting.strain_gram.matrix);
  if (gram.info() == Eigen::Success) {
    Vec x = Vec::Ones(setting.V.dof_count);
    double rayleigh = 0.0;
    for (int it = 0; it < 500; ++it) {
      Vec tx = Vec::Zero(setting.V.dof_count);
      for (int i = 0; i < setting.curve.node_count(); ++i) {
        const int dof = setting.trace.vdof[i];
        if (dof < 0) continue;
        tx[dof] = setting.curve_weight[i] * x[dof];
        tx[dof + 1] = setting.curve_weight[i] * x[dof + 1];
      }
      x = gram.solve(tx);
      const double xn = x.norm();
      if (xn == 0.0) break;
      x /= xn;
      const double next = trace_norm_sq(setting, x) / std::max(1e-300, x.dot(setting.strain_gram.matrix * x));
      if (it > 20 && std::abs(next - rayleigh) <= 1e-13 * std::abs(next)) {
        rayleigh = next;
        break;
      }
      rayleigh = next;
    }
    best = std::max(best, std::sqrt(std::max(0.0, rayleigh)));
  }
  return best;
}

}  // namespace

HypothesisReport validate_hypotheses(const MaterialModel& material, const LoadModel& load,
                                     const InitialState& init, const DiscreteSetting& setting,
                                     int trace_probes, std::uint64_t seed) {
  HypothesisReport report;
  auto check = [&report](const std::string& name, bool pass, const std::string& message) {
    report.checks.push_back({name, pass, message});
  };

  check("H(A)(b) m_A > 0", material.theta_A > 0.0,
        "viscosity theta_A = " + format_double(material.theta_A));
  check("H(A)(a) L_A finite", material.zeta_A >= 0.0 && std::isfinite(material.L_A()),
        "L_A = " + format_double(material.L_A()));
  check("H(B)(a) L_B finite", material.theta_B >= 0.0 && material.zeta_B >= 0.0,
        "L_B = " + format_double(material.L_B()));
  check("H(B)(c) B(0) in Q", true, "linear isotropic elasticity vanishes at zero strain");
  check("H(C)(a) L_C finite",
        material.kernel.rate >= 0.0 && material.kernel.damage_factor >= 0.0 &&
            material.kernel.damage_factor <= 1.0 && std::isfinite(material.L_C()),
        "L_C = " + format_double(material.L_C()) + " on strains up to " +
            format_double(material.strain_bound));
  check("H(p)(a) L_p >= 0", material.compliance.L_p >= 0.0,
        "L_p = " + format_double(material.compliance.L_p));
  check("H(p)(b) p <= p*", material.compliance.p_star > 0.0,
        "p* = " + format_double(material.compliance.p_star));
  check("H(p)(d) p(b) = 0 for b <= 0", material.compliance(-1.0) == 0.0 && material.compliance(0.0) == 0.0,
        "clamped compliance family");
  check("H(g') g >= 0", material.gap >= 0.0, "gap = " + format_double(material.gap));
  check("H(mu)(a) L_mu finite", std::isfinite(material.friction.lipschitz()),
        "L_mu = " + format_double(material.friction.lipschitz()));
  check("H(mu)(b) mu <= mu*", material.friction.mu_star > 0.0 && material.friction.mu0 >= 0.0,
        "mu* = " + format_double(material.friction.mu_star));
  check("H(varphi')(a) L_varphi finite", std::isfinite(material.wear.lipschitz()),
        "L_varphi = " + format_double(material.wear.lipschitz()));
  check("wear Robin coefficient b in R", true,
        "b = " + format_double(material.wear.robin_b) +
            (material.wear.robin_b < 0.0 ? " (negative: accepted, diffusion may be indefinite)"
                                         : ""));
  check("H(phi')(a) L_phi finite",
        material.damage.lambda_E > 0.0 && material.damage.lambda_w > 0.0 &&
            std::isfinite(material.damage.lipschitz()),
        "L_phi = " + format_double(material.damage.lipschitz()) +
            " (floored quadratic source)");
  check("H(g)(b) kappa > 0", material.damage.kappa > 0.0,
        "g_1 = g_2 = kappa = " + format_double(material.damage.kappa));
  check("H(f) load continuous in t", true, "closed time-profile family");
  (void)load;

  bool xi0_ok = init.xi0.size() == setting.Y.dof_count;
  if (xi0_ok)
    for (int i = 0; i < init.xi0.size(); ++i)
      if (!(init.xi0[i] > 0.0 && init.xi0[i] < 1.0)) xi0_ok = false;
  check("xi(0) in (0,1)", xi0_ok, "initial damage strictly inside the box");
  check("u0 on V", init.u0.size() == setting.V.dof_count, "initial displacement dimension");
  check("w0 on curve", init.w0.size() == setting.curve.node_count(), "initial wear dimension");

  AbstractConstants& c = report.constants;
  c.L_A = material.L_A();
  c.m_A = material.m_A();
  c.L_B = material.L_B();
  c.L_C = material.L_C();
  c.L_p = material.compliance.L_p;
  c.p_star = material.compliance.p_star;
  c.L_mu = material.friction.lipschitz();
  c.mu_star = material.friction.mu_star;
  c.L_phi_damage = material.damage.lipschitz();
  c.L_varphi_wear = material.wear.lipschitz();
  c.trace_norm = probe_trace_norm(setting, trace_probes, seed);
  c.L1 = 1.0;
  c.L2 = c.L_A;
  c.m = c.m_A;
  // p never reaches p_star when L_p = 0; the effective bound is then 0 and the
  // friction coupling constants vanish with it.
  const double p_sup = material.compliance.L_p == 0.0 ? 0.0 : material.compliance.p_star;
  c.alpha = c.L_p * c.trace_norm * (1.0 + c.mu_star);
  c.beta = c.L_mu * p_sup * c.trace_norm * c.trace_norm;
  c.gamma = c.L_mu * p_sup * c.trace_norm;
  c.r1J = c.L_B + c.L_C;
  c.r2J = c.L_C;
  c.sJ = 1.0;
  c.g1 = material.damage.kappa;
  c.g2 = material.damage.kappa;

  report.all_pass = true;
  for (const HypothesisCheck& hc : report.checks) report.all_pass = report.all_pass && hc.pass;
  return report;
}

}  // namespace contactsim
