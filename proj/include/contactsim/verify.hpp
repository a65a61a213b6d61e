#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "contactsim/types.hpp"
#include "contactsim/vi_solvers.hpp"

namespace contactsim {

/// Small dense instance for the brute-force oracles (n <= 12).
struct OracleProblem {
  Mat matrix;  // dense SPD
  Vec rhs;
  std::vector<ProxGroup> friction;
  std::optional<BoxConstraint> box;
};

/// Exhaustive lower/free/upper enumeration for the box-constrained quadratic
/// (no friction groups, n <= 6): solves every free subsystem and keeps the
/// KKT-consistent candidate.
Vec active_set_oracle(const OracleProblem& prob);

/// Elementary forward-backward iteration with step 1/L(M) run to a high
/// iteration count (early exit only once the iterate stagnates at machine
/// precision). Ground truth for solve_elliptic_vi.
Vec proximal_gradient_oracle(const OracleProblem& prob, long iterations);

struct ConvergenceStudy {
  std::vector<std::pair<double, double>> points;  // (h or dt, error)
  double fitted_order = 0.0;
  double r_squared = 0.0;
  double target_order = 0.0;
  bool pass = false;
};

/// Least-squares log-log fit of error against resolution.
ConvergenceStudy fit_order(std::vector<std::pair<double, double>> points, double target);

struct HeatStudy {
  ConvergenceStudy spatial;   // target order 2 (>= 1.9 accepted)
  ConvergenceStudy temporal;  // target order 1 (>= 0.9 accepted)
};

/// Implicit Euler march on the unit segment against w*(s,t) = e^{-t} cos(pi s)
/// with the matched source (pi^2 - 1) e^{-t} cos(pi s); the manufactured
/// solution has zero endpoint flux, so the homogeneous Robin data is b = 0.
HeatStudy manufactured_heat_study(int levels);

/// Max ratio |op(a) - op(b)| / |a - b| over sampled pairs.
double lipschitz_probe(const std::function<Vec(const Vec&)>& op,
                       const std::function<Vec(std::mt19937_64&)>& sampler, int pairs,
                       std::uint64_t seed);

}  // namespace contactsim
