#include "contactsim/history.hpp"

#include <cmath>
#include <fstream>

namespace contactsim {

Trajectory Trajectory::zeros(const TimeGrid& grid, int dim) {
  Trajectory traj;
  traj.grid = grid;
  traj.values.assign(grid.point_count(), Vec::Zero(dim));
  return traj;
}

Trajectory Trajectory::constant(const TimeGrid& grid, const Vec& value) {
  Trajectory traj;
  traj.grid = grid;
  traj.values.assign(grid.point_count(), value);
  return traj;
}

void Trajectory::check() const {
  if (static_cast<int>(values.size()) != grid.point_count())
    throw Error("trajectory length " + std::to_string(values.size()) + " does not match grid (" +
                std::to_string(grid.point_count()) + " points)");
  for (const Vec& v : values)
    if (v.size() != values.front().size()) throw Error("trajectory has mixed field dimensions");
}

Trajectory integrate_trajectory(const Trajectory& velocity, const Vec& u0) {
  velocity.check();
  if (u0.size() != velocity.dim()) throw Error("integrate_trajectory: dimension mismatch");
  Trajectory out;
  out.grid = velocity.grid;
  out.values.resize(velocity.values.size());
  out.values[0] = u0;
  const double half_dt = 0.5 * velocity.grid.dt();
  for (std::size_t k = 1; k < velocity.values.size(); ++k)
    out.values[k] = out.values[k - 1] + half_dt * (velocity.values[k - 1] + velocity.values[k]);
  return out;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b,
                           const std::function<double(const Vec&)>& field_norm) {
  if (a.values.size() != b.values.size()) throw Error("trajectory_distance: grid mismatch");
  double dist = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    dist = std::max(dist, field_norm(a.values[k] - b.values[k]));
  return dist;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trajectory csv: " + path);
  out << "t";
  for (int d = 0; d < traj.dim(); ++d) out << ",dof_" << d;
  out << '\n';
  for (std::size_t k = 0; k < traj.values.size(); ++k) {
    out << format_double(traj.grid.time(static_cast<int>(k)));
    for (int d = 0; d < traj.dim(); ++d) out << ',' << format_double(traj.values[k][d]);
    out << '\n';
  }
}

double RelaxationKernel::coeff(double lag) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return scale;
    case Kind::Exponential: return scale * std::exp(-rate * lag);
  }
  return 0.0;
}

double RelaxationKernel::scale_max() const {
  // |coeff| is maximized at lag 0 for rate >= 0.
  return kind == Kind::Zero ? 0.0 : std::abs(scale);
}

HistoryState::HistoryState(const TimeGrid& grid, const RelaxationKernel& kernel, int v_dim,
                           int curve_dim, int elem_count)
    : grid_(grid),
      kernel_(kernel),
      disp_(Vec::Zero(v_dim)),
      s_(Vec::Zero(curve_dim)),
      memory_(Mat::Zero(elem_count, 3)) {}

void HistoryState::advance(const Vec& velocity, const Vec& normal_velocity,
                           const Mat& memory_sample) {
  const double dt = grid_.dt();
  if (last_ >= 0) {
    disp_ += 0.5 * dt * (prev_velocity_ + velocity);
    s_ += 0.5 * dt * (prev_normal_velocity_ + normal_velocity);
    if (kernel_.kind != RelaxationKernel::Kind::Zero) {
      // Shift the running trapezoid sum by one step: the previous endpoint
      // sample gains its full weight, everything decays by coeff(dt)/coeff(0),
      // and the new endpoint enters with half weight.
      const double decay =
          kernel_.kind == RelaxationKernel::Kind::Exponential ? std::exp(-kernel_.rate * dt) : 1.0;
      const double w_end = 0.5 * dt * kernel_.coeff(0.0);
      memory_ = decay * (memory_ + w_end * prev_sample_) + w_end * memory_sample;
    }
  }
  prev_velocity_ = velocity;
  prev_normal_velocity_ = normal_velocity;
  prev_sample_ = memory_sample;
  ++last_;
}

Vec element_means(const Mesh2D& mesh, const DiscreteSpace& Y, const Vec& nodal) {
  Vec means(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    means[t] = (nodal[Y.node_dof[tri[0]]] + nodal[Y.node_dof[tri[1]]] + nodal[Y.node_dof[tri[2]]]) / 3.0;
  }
  return means;
}

namespace {

Mat memory_sample(const Mat& strains, const Vec& xi_elem, double damage_factor) {
  if (damage_factor == 0.0) return strains;
  Mat out = strains;
  for (int e = 0; e < out.rows(); ++e) out.row(e) *= (1.0 - damage_factor * xi_elem[e]);
  return out;
}

}  // namespace

Mat apply_R(const Trajectory& velocity, const Trajectory& damage, const Vec& u0,
            const Mesh2D& mesh, const DiscreteSpace& V, double theta_B, double zeta_B,
            const RelaxationKernel& kernel, int k) {
  const Trajectory disp = integrate_trajectory(velocity, u0);
  Mat result = isotropic_stress(element_strains(mesh, V, disp.values[k]), theta_B, zeta_B);

  if (kernel.kind != RelaxationKernel::Kind::Zero && k > 0) {
    const double dt = velocity.grid.dt();
    const DiscreteSpace Y = make_damage_space(mesh);
    const double t_k = velocity.grid.time(k);
    for (int j = 0; j <= k; ++j) {
      const double w = (j == 0 || j == k) ? 0.5 * dt : dt;
      const Mat sample = memory_sample(element_strains(mesh, V, velocity.values[j]),
                                       element_means(mesh, Y, damage.values[j]),
                                       kernel.damage_factor);
      result += w * kernel.coeff(t_k - velocity.grid.time(j)) * sample;
    }
  }
  return result;
}

Vec apply_S(const Trajectory& velocity, const Vec& u0, const CurveTrace& trace,
            const BoundaryFrame& frame, int k) {
  const int n = static_cast<int>(trace.vdof.size());
  Vec result(n);
  const double dt = velocity.grid.dt();
  for (int i = 0; i < n; ++i) {
    double integral = 0.0;
    for (int j = 0; j <= k; ++j) {
      if (j == 0 && k == 0) break;
      const double w = (j == 0 || j == k) ? 0.5 * dt : dt;
      integral += w * trace.vector_at(velocity.values[j], i).dot(frame.normal[i]);
    }
    result[i] = integral + trace.vector_at(u0, i).dot(frame.normal[i]);
  }
  return result;
}

HistoryTerms::HistoryTerms(const Trajectory& velocity, const Trajectory& damage, const Vec& u0,
                           const Mesh2D& mesh, const DiscreteSpace& V, const DiscreteSpace& Y,
                           const CurveTrace& trace, const BoundaryFrame& frame, double theta_B,
                           double zeta_B, const RelaxationKernel& kernel) {
  velocity.check();
  const int n_points = velocity.grid.point_count();
  const int n_curve = static_cast<int>(trace.vdof.size());
  r_terms_.reserve(n_points);
  s_terms_.reserve(n_points);
  displacement_.reserve(n_points);

  HistoryState state(velocity.grid, kernel, V.dof_count, n_curve, mesh.triangle_count());
  for (int k = 0; k < n_points; ++k) {
    const Vec& eta = velocity.values[k];
    Vec normal_velocity(n_curve);
    for (int i = 0; i < n_curve; ++i)
      normal_velocity[i] = trace.vector_at(eta, i).dot(frame.normal[i]);
    const Mat sample = memory_sample(element_strains(mesh, V, eta),
                                     element_means(mesh, Y, damage.values[k]), kernel.damage_factor);
    state.advance(eta, normal_velocity, sample);

    Vec disp = state.displacement_integral() + u0;
    Mat r = isotropic_stress(element_strains(mesh, V, disp), theta_B, zeta_B);
    r += state.memory_integral();
    Vec s = state.normal_displacement_integral();
    for (int i = 0; i < n_curve; ++i) s[i] += trace.vector_at(u0, i).dot(frame.normal[i]);

    displacement_.push_back(std::move(disp));
    r_terms_.push_back(std::move(r));
    s_terms_.push_back(std::move(s));
  }
}

double PicardResult::last_ratio() const {
  const std::size_t n = diffs.size();
  if (n < 2 || diffs[n - 2] == 0.0) return 0.0;
  return diffs[n - 1] / diffs[n - 2];
}

PicardResult picard_trajectory(const std::function<Trajectory(const Trajectory&)>& map,
                               Trajectory init, double tol, int max_iter,
                               const std::function<double(const Vec&)>& field_norm) {
  if (tol <= 0.0) throw Error("picard_trajectory: tol must be positive");
  PicardResult result;
  Trajectory current = std::move(init);
  for (int it = 0; it < max_iter; ++it) {
    Trajectory next = map(current);
    const double diff = trajectory_distance(next, current, field_norm);
    result.diffs.push_back(diff);
    result.iterations = it + 1;
    current = std::move(next);
    if (diff <= tol) {
      result.converged = true;
      break;
    }
  }
  result.trajectory = std::move(current);
  return result;
}

}  // namespace contactsim
