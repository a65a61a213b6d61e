#pragma once

#include <iosfwd>
#include <string>

#include "contactsim/coupled.hpp"

namespace contactsim {

/// Exit codes: 0 success, 1 config/validation error, 2 solver non-convergence
/// (outputs are still written).
int cmd_run(const std::string& config_path, const std::string& out_dir, std::ostream& out,
            std::ostream& err);

/// Suites: oracles, heat, lipschitz, all. Exit 0 iff every check passes.
int cmd_verify(const std::string& suite, std::ostream& out, std::ostream& err);

int cmd_estimate(const std::string& config_path, std::ostream& out, std::ostream& err);

int cmd_mesh_info(const std::string& mesh_path, std::ostream& out, std::ostream& err);

void print_contraction_report(const ContractionReport& report, std::ostream& out);

}  // namespace contactsim
