#include "contactsim/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace contactsim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number from '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
  return out;
}

long parse_integer(const std::string& key, const std::string& value) {
  const double d = parse_number(key, value);
  const long l = static_cast<long>(d);
  if (static_cast<double>(l) != d)
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  return l;
}

BoundaryLabel parse_label(const std::string& key, const std::string& value) {
  if (value == "G1") return BoundaryLabel::Gamma1;
  if (value == "G2") return BoundaryLabel::Gamma2;
  if (value == "G3") return BoundaryLabel::Gamma3;
  throw ConfigError("config key '" + key + "': expected G1, G2 or G3, got '" + value + "'");
}

RelaxationKernel::Kind parse_kernel_kind(const std::string& key, const std::string& value) {
  if (value == "zero") return RelaxationKernel::Kind::Zero;
  if (value == "constant") return RelaxationKernel::Kind::Constant;
  if (value == "exponential") return RelaxationKernel::Kind::Exponential;
  throw ConfigError("config key '" + key + "': expected zero, constant or exponential");
}

TimeProfile::Kind parse_profile_kind(const std::string& key, const std::string& value) {
  if (value == "constant") return TimeProfile::Kind::Constant;
  if (value == "linear") return TimeProfile::Kind::LinearInT;
  if (value == "sinusoidal") return TimeProfile::Kind::Sinusoidal;
  throw ConfigError("config key '" + key + "': expected constant, linear or sinusoidal");
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"seed", [&](const std::string& k, const std::string& v) { cfg.solver.seed = parse_integer(k, v); }},
      {"mesh.file", [&](const std::string&, const std::string& v) { cfg.mesh_file = v; }},
      {"mesh.nx", [&](const std::string& k, const std::string& v) { cfg.nx = static_cast<int>(parse_integer(k, v)); }},
      {"mesh.ny", [&](const std::string& k, const std::string& v) { cfg.ny = static_cast<int>(parse_integer(k, v)); }},
      {"mesh.left", [&](const std::string& k, const std::string& v) { cfg.labels.left = parse_label(k, v); }},
      {"mesh.right", [&](const std::string& k, const std::string& v) { cfg.labels.right = parse_label(k, v); }},
      {"mesh.bottom", [&](const std::string& k, const std::string& v) { cfg.labels.bottom = parse_label(k, v); }},
      {"mesh.top", [&](const std::string& k, const std::string& v) { cfg.labels.top = parse_label(k, v); }},
      {"grid.T", [&](const std::string& k, const std::string& v) { cfg.solver.grid.T = parse_number(k, v); }},
      {"grid.n_steps", [&](const std::string& k, const std::string& v) { cfg.solver.grid.n_steps = static_cast<int>(parse_integer(k, v)); }},
      {"material.theta_A", [&](const std::string& k, const std::string& v) { cfg.material.theta_A = parse_number(k, v); }},
      {"material.zeta_A", [&](const std::string& k, const std::string& v) { cfg.material.zeta_A = parse_number(k, v); }},
      {"material.theta_B", [&](const std::string& k, const std::string& v) { cfg.material.theta_B = parse_number(k, v); }},
      {"material.zeta_B", [&](const std::string& k, const std::string& v) { cfg.material.zeta_B = parse_number(k, v); }},
      {"material.kernel", [&](const std::string& k, const std::string& v) { cfg.material.kernel.kind = parse_kernel_kind(k, v); }},
      {"material.kernel_scale", [&](const std::string& k, const std::string& v) { cfg.material.kernel.scale = parse_number(k, v); }},
      {"material.kernel_rate", [&](const std::string& k, const std::string& v) { cfg.material.kernel.rate = parse_number(k, v); }},
      {"material.kernel_damage_factor", [&](const std::string& k, const std::string& v) { cfg.material.kernel.damage_factor = parse_number(k, v); }},
      {"material.strain_bound", [&](const std::string& k, const std::string& v) { cfg.material.strain_bound = parse_number(k, v); }},
      {"material.L_p", [&](const std::string& k, const std::string& v) { cfg.material.compliance.L_p = parse_number(k, v); }},
      {"material.p_star", [&](const std::string& k, const std::string& v) { cfg.material.compliance.p_star = parse_number(k, v); }},
      {"material.mu0", [&](const std::string& k, const std::string& v) { cfg.material.friction.mu0 = parse_number(k, v); }},
      {"material.mu1", [&](const std::string& k, const std::string& v) { cfg.material.friction.mu1 = parse_number(k, v); }},
      {"material.mu2", [&](const std::string& k, const std::string& v) { cfg.material.friction.mu2 = parse_number(k, v); }},
      {"material.mu_star", [&](const std::string& k, const std::string& v) { cfg.material.friction.mu_star = parse_number(k, v); }},
      {"material.gap", [&](const std::string& k, const std::string& v) { cfg.material.gap = parse_number(k, v); }},
      {"material.kappa", [&](const std::string& k, const std::string& v) { cfg.material.damage.kappa = parse_number(k, v); }},
      {"material.lambda_E", [&](const std::string& k, const std::string& v) { cfg.material.damage.lambda_E = parse_number(k, v); }},
      {"material.lambda_w", [&](const std::string& k, const std::string& v) { cfg.material.damage.lambda_w = parse_number(k, v); }},
      {"material.phi_min", [&](const std::string& k, const std::string& v) { cfg.material.damage.phi_min = parse_number(k, v); }},
      {"material.wear_b", [&](const std::string& k, const std::string& v) { cfg.material.wear.robin_b = parse_number(k, v); }},
      {"material.wear_c1", [&](const std::string& k, const std::string& v) { cfg.material.wear.c1 = parse_number(k, v); }},
      {"material.wear_c2", [&](const std::string& k, const std::string& v) { cfg.material.wear.c2 = parse_number(k, v); }},
      {"material.wear_c3", [&](const std::string& k, const std::string& v) { cfg.material.wear.c3 = parse_number(k, v); }},
      {"load.f0.kind", [&](const std::string& k, const std::string& v) { cfg.load.f0.kind = parse_profile_kind(k, v); }},
      {"load.f0.x", [&](const std::string& k, const std::string& v) { cfg.load.f0.base.x() = parse_number(k, v); }},
      {"load.f0.y", [&](const std::string& k, const std::string& v) { cfg.load.f0.base.y() = parse_number(k, v); }},
      {"load.f0.rate_x", [&](const std::string& k, const std::string& v) { cfg.load.f0.rate.x() = parse_number(k, v); }},
      {"load.f0.rate_y", [&](const std::string& k, const std::string& v) { cfg.load.f0.rate.y() = parse_number(k, v); }},
      {"load.f0.freq", [&](const std::string& k, const std::string& v) { cfg.load.f0.freq = parse_number(k, v); }},
      {"load.f2.kind", [&](const std::string& k, const std::string& v) { cfg.load.f2.kind = parse_profile_kind(k, v); }},
      {"load.f2.x", [&](const std::string& k, const std::string& v) { cfg.load.f2.base.x() = parse_number(k, v); }},
      {"load.f2.y", [&](const std::string& k, const std::string& v) { cfg.load.f2.base.y() = parse_number(k, v); }},
      {"load.f2.rate_x", [&](const std::string& k, const std::string& v) { cfg.load.f2.rate.x() = parse_number(k, v); }},
      {"load.f2.rate_y", [&](const std::string& k, const std::string& v) { cfg.load.f2.rate.y() = parse_number(k, v); }},
      {"load.f2.freq", [&](const std::string& k, const std::string& v) { cfg.load.f2.freq = parse_number(k, v); }},
      {"init.u0_x", [&](const std::string& k, const std::string& v) { cfg.init_u0_x = parse_number(k, v); }},
      {"init.u0_y", [&](const std::string& k, const std::string& v) { cfg.init_u0_y = parse_number(k, v); }},
      {"init.w0", [&](const std::string& k, const std::string& v) { cfg.init_w0 = parse_number(k, v); }},
      {"init.xi0", [&](const std::string& k, const std::string& v) { cfg.init_xi0 = parse_number(k, v); }},
      {"solver.pi_tol", [&](const std::string& k, const std::string& v) { cfg.solver.pi_tol = parse_number(k, v); }},
      {"solver.lambda_tol", [&](const std::string& k, const std::string& v) { cfg.solver.lambda_tol = parse_number(k, v); }},
      {"solver.vi_tol", [&](const std::string& k, const std::string& v) { cfg.solver.vi_tol = parse_number(k, v); }},
      {"solver.pi_max", [&](const std::string& k, const std::string& v) { cfg.solver.pi_max = static_cast<int>(parse_integer(k, v)); }},
      {"solver.lambda_max", [&](const std::string& k, const std::string& v) { cfg.solver.lambda_max = static_cast<int>(parse_integer(k, v)); }},
      {"solver.vi_max", [&](const std::string& k, const std::string& v) { cfg.solver.vi_max = parse_integer(k, v); }},
      {"solver.probes", [&](const std::string& k, const std::string& v) { cfg.solver.probes = static_cast<int>(parse_integer(k, v)); }},
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
    it->second(key, value);
  }
  return cfg;
}

void validate_run_config(const RunConfig& config) {
  if (!config.mesh_file.empty() && !std::filesystem::exists(config.mesh_file))
    throw ConfigError("mesh.file does not exist: " + config.mesh_file);
  if (config.mesh_file.empty() && (config.nx < 1 || config.ny < 1))
    throw ConfigError("mesh.nx and mesh.ny must be >= 1");
  if (config.material.theta_A <= 0.0)
    throw ConfigError("material.theta_A = " + format_double(config.material.theta_A) +
                      " violates H(A): strong monotonicity needs m_A = 2 theta_A > 0");
  if (config.material.damage.kappa <= 0.0)
    throw ConfigError("material.kappa = " + format_double(config.material.damage.kappa) +
                      " violates H(g): the damage form needs g_1 = g_2 = kappa > 0");
  if (config.material.damage.lambda_E <= 0.0 || config.material.damage.lambda_w <= 0.0)
    throw ConfigError("material.lambda_E and material.lambda_w must be > 0 (damage source family)");
  if (config.material.gap < 0.0)
    throw ConfigError("material.gap = " + format_double(config.material.gap) +
                      " violates H(g'): g(x) >= 0 a.e.");
  if (config.material.compliance.L_p < 0.0 || config.material.compliance.p_star <= 0.0)
    throw ConfigError("compliance violates H(p): needs L_p >= 0 and p* > 0");
  if (config.material.friction.mu_star <= 0.0)
    throw ConfigError("material.mu_star must be > 0 (H(mu))");
  if (!(config.init_xi0 > 0.0 && config.init_xi0 < 1.0))
    throw ConfigError("init.xi0 = " + format_double(config.init_xi0) +
                      " must lie strictly inside (0,1)");
  config.solver.validate();
}

Mesh2D config_mesh(const RunConfig& config) {
  if (!config.mesh_file.empty()) return load_mesh(config.mesh_file);
  return generate_rect_mesh(config.nx, config.ny, config.labels);
}

InitialState make_initial_state(const RunConfig& config, const DiscreteSetting& setting) {
  InitialState init;
  init.u0 = Vec::Zero(setting.V.dof_count);
  for (int i = 0; i + 1 < setting.V.dof_count; i += 2) {
    init.u0[i] = config.init_u0_x;
    init.u0[i + 1] = config.init_u0_y;
  }
  init.w0 = Vec::Constant(setting.curve.node_count(), config.init_w0);
  init.xi0 = Vec::Constant(setting.Y.dof_count, config.init_xi0);
  return init;
}

}  // namespace contactsim
