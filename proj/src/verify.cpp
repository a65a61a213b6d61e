#include "contactsim/verify.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "contactsim/assembly.hpp"
#include "contactsim/geometry.hpp"

namespace contactsim {

namespace {

void check_oracle_dims(const OracleProblem& prob, int cap) {
  const int n = static_cast<int>(prob.matrix.rows());
  if (n > cap)
    throw Error("oracle problem dimension " + std::to_string(n) + " exceeds cap " +
                std::to_string(cap));
  if (prob.matrix.cols() != n || prob.rhs.size() != n) throw Error("oracle problem dimension mismatch");
}

}  // namespace

Vec active_set_oracle(const OracleProblem& prob) {
  check_oracle_dims(prob, 6);
  if (!prob.friction.empty()) throw Error("active_set_oracle handles box constraints only");
  if (!prob.box) throw Error("active_set_oracle requires a box");
  const int n = static_cast<int>(prob.matrix.rows());
  const Vec& lo = prob.box->lower;
  const Vec& up = prob.box->upper;

  long patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 3;

  const double scale = prob.matrix.cwiseAbs().maxCoeff() + prob.rhs.cwiseAbs().maxCoeff() + 1.0;
  const double tol = 1e-11 * scale;

  bool found = false;
  Vec best;
  for (long code = 0; code < patterns; ++code) {
    // Digit 0: at lower bound, 1: free, 2: at upper bound.
    int digit[12];
    long rem = code;
    for (int i = 0; i < n; ++i) {
      digit[i] = static_cast<int>(rem % 3);
      rem /= 3;
    }

    std::vector<int> free_idx;
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      if (digit[i] == 0)
        x[i] = lo[i];
      else if (digit[i] == 2)
        x[i] = up[i];
      else
        free_idx.push_back(i);
    }

    const int nf = static_cast<int>(free_idx.size());
    if (nf > 0) {
      Mat mff(nf, nf);
      Vec rf(nf);
      for (int a = 0; a < nf; ++a) {
        rf[a] = prob.rhs[free_idx[a]];
        for (int i = 0; i < n; ++i)
          if (digit[i] != 1) rf[a] -= prob.matrix(free_idx[a], i) * x[i];
        for (int b = 0; b < nf; ++b) mff(a, b) = prob.matrix(free_idx[a], free_idx[b]);
      }
      const Vec xf = mff.ldlt().solve(rf);
      for (int a = 0; a < nf; ++a) x[free_idx[a]] = xf[a];
    }

    // Feasibility of the free block and sign conditions on the multipliers.
    bool consistent = true;
    const Vec grad = prob.matrix * x - prob.rhs;
    for (int i = 0; i < n && consistent; ++i) {
      switch (digit[i]) {
        case 0: consistent = grad[i] >= -tol; break;
        case 1: consistent = x[i] >= lo[i] - tol && x[i] <= up[i] + tol && std::abs(grad[i]) <= tol; break;
        case 2: consistent = grad[i] <= tol; break;
      }
    }
    if (!consistent) continue;
    if (found && (x - best).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw Error("active_set_oracle: multiple inconsistent KKT candidates");
    if (!found) best = x;
    found = true;
  }
  if (!found) throw Error("active_set_oracle: no KKT-consistent pattern (oracle bug for SPD input)");
  return best;
}

Vec proximal_gradient_oracle(const OracleProblem& prob, long iterations) {
  check_oracle_dims(prob, 12);
  const int n = static_cast<int>(prob.matrix.rows());

  Eigen::SelfAdjointEigenSolver<Mat> eig(prob.matrix);
  const double L = eig.eigenvalues().maxCoeff();
  if (L <= 0.0) throw Error("proximal_gradient_oracle: matrix not positive definite");
  const double step = 1.0 / L;

  Vec x = Vec::Zero(n);
  int stagnant = 0;
  for (long it = 0; it < iterations; ++it) {
    Vec next = x - step * (prob.matrix * x - prob.rhs);
    for (const ProxGroup& g : prob.friction) {
      const Vec2 z(next[g.dof_x], next[g.dof_y]);
      const Vec2 p = prox_friction_node(z, g.normal, step * g.weight);
      next[g.dof_x] = p.x();
      next[g.dof_y] = p.y();
    }
    if (prob.box) next = next.cwiseMax(prob.box->lower).cwiseMin(prob.box->upper);

    const double change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    // Further iterations cannot move a machine-stagnant fixed point.
    if (change <= 1e-16 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      if (++stagnant >= 16) break;
    } else {
      stagnant = 0;
    }
  }
  return x;
}

ConvergenceStudy fit_order(std::vector<std::pair<double, double>> points, double target) {
  ConvergenceStudy study;
  study.points = std::move(points);
  study.target_order = target;
  const int n = static_cast<int>(study.points.size());
  if (n < 2) throw Error("fit_order needs at least 2 levels");

  double sx = 0, sy = 0;
  for (const auto& [h, e] : study.points) {
    if (!(h > 0.0) || !(e > 0.0)) throw Error("fit_order: resolutions and errors must be positive");
    sx += std::log(h);
    sy += std::log(e);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [h, e] : study.points) {
    const double dx = std::log(h) - mx, dy = std::log(e) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  study.fitted_order = sxy / sxx;
  study.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  study.pass = study.fitted_order >= target;
  return study;
}

namespace {

CurveMesh unit_segment(int n_cells) {
  CurveMesh curve;
  curve.node_ids.resize(n_cells + 1);
  curve.arc_length = Vec::Zero(n_cells + 1);
  curve.endpoint_flag.assign(n_cells + 1, false);
  for (int i = 0; i <= n_cells; ++i) {
    curve.node_ids[i] = i;
    curve.arc_length[i] = static_cast<double>(i) / n_cells;
  }
  curve.endpoint_flag.front() = true;
  curve.endpoint_flag.back() = true;
  return curve;
}

// Max nodal error of the implicit Euler march against w* = e^{-t} cos(pi s).
double heat_march_error(int n_cells, int n_steps, double T) {
  const CurveMesh curve = unit_segment(n_cells);
  HeatStepProblem prob;
  prob.mass = lumped(assemble_mass(curve)).matrix;
  prob.diffusion = assemble_curve_diffusion(curve, 0.0).matrix;
  prob.dt = T / n_steps;

  const int n = n_cells + 1;
  auto exact = [&](double s, double t) { return std::exp(-t) * std::cos(M_PI * s); };
  const double source_coeff = M_PI * M_PI - 1.0;

  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = exact(curve.arc_length[i], 0.0);

  double err = 0.0;
  for (int k = 1; k <= n_steps; ++k) {
    const double t = k * prob.dt;
    Vec source(n);
    for (int i = 0; i < n; ++i) source[i] = source_coeff * std::exp(-t) * std::cos(M_PI * curve.arc_length[i]);
    prob.previous = w;
    prob.source = source;
    w = heat_robin_step(prob);
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(w[i] - exact(curve.arc_length[i], t)));
  }
  return err;
}

}  // namespace

HeatStudy manufactured_heat_study(int levels) {
  if (levels < 3) throw Error("manufactured_heat_study needs at least 3 levels");
  HeatStudy study;

  std::vector<std::pair<double, double>> spatial;
  for (int l = 0; l < levels; ++l) {
    const int n_cells = 16 << l;
    spatial.emplace_back(1.0 / n_cells, heat_march_error(n_cells, 8192, 0.1));
  }
  study.spatial = fit_order(std::move(spatial), 1.9);

  std::vector<std::pair<double, double>> temporal;
  for (int l = 0; l < levels; ++l) {
    const int n_steps = 16 << l;
    temporal.emplace_back(1.0 / n_steps, heat_march_error(1024, n_steps, 1.0));
  }
  study.temporal = fit_order(std::move(temporal), 0.9);
  return study;
}

double lipschitz_probe(const std::function<Vec(const Vec&)>& op,
                       const std::function<Vec(std::mt19937_64&)>& sampler, int pairs,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const Vec a = sampler(rng);
    const Vec b = sampler(rng);
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;
    best = std::max(best, (op(a) - op(b)).norm() / dist);
  }
  return best;
}

}  // namespace contactsim
