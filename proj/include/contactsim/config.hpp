#pragma once

#include <string>

#include "contactsim/contact_model.hpp"
#include "contactsim/coupled.hpp"
#include "contactsim/geometry.hpp"

namespace contactsim {

/// Run configuration parsed from the flat `key = value` text format with
/// dotted keys. Unknown keys are hard errors.
struct RunConfig {
  std::string mesh_file;  // empty: use the rectangle generator
  int nx = 8;
  int ny = 8;
  RectLabels labels;
  MaterialModel material;
  LoadModel load;
  double init_u0_x = 0.0;
  double init_u0_y = 0.0;
  double init_w0 = 0.0;
  double init_xi0 = 0.5;
  SolverConfig solver;
};

RunConfig parse_run_config(const std::string& path);

/// Hypothesis-level sanity of the configuration; throws ConfigError citing the
/// violated clause.
void validate_run_config(const RunConfig& config);

Mesh2D config_mesh(const RunConfig& config);

InitialState make_initial_state(const RunConfig& config, const DiscreteSetting& setting);

}  // namespace contactsim
