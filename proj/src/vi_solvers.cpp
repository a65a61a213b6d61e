#include "contactsim/vi_solvers.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

#include "contactsim/assembly.hpp"

namespace contactsim {

Vec2 prox_friction_node(const Vec2& z, const Vec2& normal, double weight) {
  const double z_nu = z.dot(normal);
  const Vec2 z_tau = z - z_nu * normal;
  const double tau_norm = z_tau.norm();
  if (tau_norm <= weight) return z_nu * normal;  // stick
  return z_nu * normal + (1.0 - weight / tau_norm) * z_tau;
}

SpectralEstimates estimate_spectrum(const SpMat& matrix, int min_iters) {
  SpectralEstimates est;
  est.L_hat = largest_eig_estimate(matrix, min_iters);
  est.m_hat = smallest_eig_estimate(matrix, min_iters);
  return est;
}

namespace {

// Prox of scale * j plus the box projection, applied in place.
void apply_nonsmooth(Vec& v, const EllipticVIProblem& prob, double scale) {
  for (const ProxGroup& g : prob.friction) {
    const Vec2 z(v[g.dof_x], v[g.dof_y]);
    const Vec2 p = prox_friction_node(z, g.normal, scale * g.weight);
    v[g.dof_x] = p.x();
    v[g.dof_y] = p.y();
  }
  if (prob.box) {
    v = v.cwiseMax(prob.box->lower).cwiseMin(prob.box->upper);
  }
}

void check_problem(const EllipticVIProblem& prob) {
  const int n = static_cast<int>(prob.matrix.rows());
  if (prob.matrix.cols() != n || prob.rhs.size() != n)
    throw SolverError("solve_elliptic_vi: dimension mismatch");
  for (const ProxGroup& g : prob.friction) {
    if (g.dof_x < 0 || g.dof_x >= n || g.dof_y < 0 || g.dof_y >= n)
      throw SolverError("solve_elliptic_vi: prox group dof out of range");
    if (g.weight < 0.0) throw SolverError("solve_elliptic_vi: negative friction weight");
  }
  // SPD probe: Rayleigh quotients of a few deterministic vectors.
  unsigned long long state = 0x9e3779b97f4a7c15ull;
  auto next_unit = [&state]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
  };
  for (int probe = 0; probe < 10; ++probe) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = next_unit();
    if (v.norm() == 0.0) continue;
    if (v.dot(prob.matrix * v) <= 0.0)
      throw SolverError("solve_elliptic_vi: non-SPD operator detected");
  }
}

}  // namespace

VISolveResult solve_elliptic_vi(const EllipticVIProblem& prob, const Vec& init, double tol,
                                long max_iter, const SpectralEstimates* estimates) {
  check_problem(prob);
  VISolveResult result;
  result.spectrum = estimates ? *estimates : estimate_spectrum(prob.matrix);
  const double L = result.spectrum.L_hat;
  const double m = result.spectrum.m_hat;
  if (L <= 0.0 || m <= 0.0) throw SolverError("solve_elliptic_vi: non-SPD operator detected");
  const double rho = m / (L * L);
  const double step = 1.0 / L;
  // T_rho contracts with factor sqrt(1 - (m/L)^2) <= 1 - rho m / 2, so a
  // fixed-point residual of rho m tol / 2 certifies a solution error <= tol.
  // Stopping on the error scale keeps the nested loop tolerances meaningful.
  const double stop_residual = 0.5 * tol * rho * m;

  auto forward_backward = [&](const Vec& v, double s) {
    Vec out = v - s * (prob.matrix * v - prob.rhs);
    apply_nonsmooth(out, prob, s);
    return out;
  };

  Vec x = init;
  Vec x_prev = x;
  double momentum = 1.0;
  double best_residual = std::numeric_limits<double>::infinity();
  long stalled = 0;
  // Accept on the certified error bound, or once the residual is below the
  // requested tolerance and has stopped improving (machine floor).
  auto accept = [&](double residual) {
    if (residual < 0.9 * best_residual) {
      best_residual = residual;
      stalled = 0;
    } else {
      ++stalled;
    }
    return residual <= stop_residual || (residual <= tol && stalled >= 64);
  };

  result.residual = (x - forward_backward(x, rho)).norm();
  if (accept(result.residual)) {
    result.solution = x;
    result.converged = true;
    return result;
  }

  for (long it = 1; it <= max_iter; ++it) {
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / momentum_next;
    Vec y = x + beta * (x - x_prev);
    Vec x_new = forward_backward(y, step);
    if ((y - x_new).dot(x_new - x) > 0.0) {
      // Momentum points uphill: restart from the last iterate.
      momentum = 1.0;
      y = x;
      x_new = forward_backward(y, step);
    } else {
      momentum = momentum_next;
    }
    x_prev = std::move(x);
    x = std::move(x_new);

    result.iterations = it;
    result.residual = (x - forward_backward(x, rho)).norm();
    if (accept(result.residual)) {
      result.converged = true;
      break;
    }
  }
  result.solution = std::move(x);
  return result;
}

PGSResult parabolic_vi_step(const ParabolicVIStepProblem& prob, double tol, int max_iter) {
  const int n = static_cast<int>(prob.previous.size());
  if (prob.lumped_mass.size() != n || prob.stiffness.rows() != n || prob.source.size() != n)
    throw SolverError("parabolic_vi_step: dimension mismatch");
  if (prob.dt <= 0.0) throw SolverError("parabolic_vi_step: dt must be positive");
  for (int i = 0; i < n; ++i)
    if (prob.previous[i] < 0.0 || prob.previous[i] > 1.0)
      throw SolverError("parabolic_vi_step: previous state outside [0,1]");

  const Eigen::SparseMatrix<double, Eigen::RowMajor> stiffness_rows(prob.stiffness);
  const Vec mass_over_dt = prob.lumped_mass / prob.dt;
  const Vec b = mass_over_dt.cwiseProduct(prob.previous) + prob.source;

  auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };

  PGSResult result;
  Vec x = prob.previous;
  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      double diag = mass_over_dt[i];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(stiffness_rows, i); it;
           ++it) {
        if (it.col() == i)
          diag += it.value();
        else
          off += it.value() * x[it.col()];
      }
      x[i] = clamp01((b[i] - off) / diag);
    }

    // Projected KKT residual.
    double res = 0.0;
    const Vec grad = mass_over_dt.cwiseProduct(x) + prob.stiffness * x - b;
    for (int i = 0; i < n; ++i) {
      double diag = mass_over_dt[i] + stiffness_rows.coeff(i, i);
      res = std::max(res, std::abs(x[i] - clamp01(x[i] - grad[i] / diag)));
    }
    result.iterations = sweep;
    result.residual = res;
    if (res <= tol) {
      result.converged = true;
      break;
    }
  }
  result.solution = std::move(x);
  return result;
}

Vec heat_robin_step(const HeatStepProblem& prob) {
  const int n = static_cast<int>(prob.previous.size());
  if (prob.mass.rows() != n || prob.diffusion.rows() != n || prob.source.size() != n)
    throw SolverError("heat_robin_step: dimension mismatch");
  if (prob.dt <= 0.0) throw SolverError("heat_robin_step: dt must be positive");

  const SpMat system = prob.mass / prob.dt + prob.diffusion;
  const Vec rhs = prob.mass * (prob.previous / prob.dt + prob.source);

  Eigen::SimplicialLDLT<SpMat> solver(system);
  if (solver.info() != Eigen::Success)
    throw SolverError("heat_robin_step: factorization failed (singular system)");
  const Vec w = solver.solve(rhs);
  if ((system * w - rhs).norm() > 1e-10 * (rhs.norm() + 1.0))
    throw SolverError("heat_robin_step: singular system (b < 0 makes the operator indefinite)");
  return w;
}

double sup_norm_estimate(const Trajectory& traj) {
  double sup = 0.0;
  for (const Vec& v : traj.values)
    if (v.size()) sup = std::max(sup, v.cwiseAbs().maxCoeff());
  return sup;
}

}  // namespace contactsim
