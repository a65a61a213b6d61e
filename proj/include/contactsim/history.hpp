#pragma once

#include <functional>
#include <string>
#include <vector>

#include "contactsim/assembly.hpp"
#include "contactsim/geometry.hpp"
#include "contactsim/types.hpp"

namespace contactsim {

/// Uniform grid t_k = k * T / n_steps on [0, T].
struct TimeGrid {
  double T = 1.0;
  int n_steps = 1;

  double dt() const { return T / n_steps; }
  double time(int k) const { return k * dt(); }
  int point_count() const { return n_steps + 1; }
};

/// Time-indexed sequence of field vectors of one fixed dimension.
struct Trajectory {
  TimeGrid grid;
  std::vector<Vec> values;

  static Trajectory zeros(const TimeGrid& grid, int dim);
  static Trajectory constant(const TimeGrid& grid, const Vec& value);

  int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  void check() const;  // length n_steps+1, uniform dimension
};

/// Cumulative trapezoid integral; output[0] = u0. Exact for integrands affine
/// in t.
Trajectory integrate_trajectory(const Trajectory& velocity, const Vec& u0);

/// C(I;*) distance of two trajectories: max over time of field_norm(a_k - b_k).
double trajectory_distance(const Trajectory& a, const Trajectory& b,
                           const std::function<double(const Vec&)>& field_norm);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Volterra relaxation kernel C(t, e, xi) = coeff(t) * (1 - damage_factor*xi) * e
/// from the closed family {zero, constant scale, scale * exp(-rate t)}.
struct RelaxationKernel {
  enum class Kind { Zero, Constant, Exponential };
  Kind kind = Kind::Zero;
  double scale = 0.0;
  double rate = 0.0;
  double damage_factor = 0.0;  // in [0,1]; 0 switches the xi dependence off

  double coeff(double lag) const;
  double scale_max() const;  // sup_t |coeff(t)|
};

/// Incremental trapezoid accumulators for the history terms of one frozen
/// velocity trajectory:
///   displacement  I u(t_k) = int_0^{t_k} u ds + u0,
///   normal trace  S u(t_k) = (I u)_nu(t_k) on the contact curve,
///   memory        int_0^{t_k} coeff(t_k - s) X(s) ds  (per-element tensors).
/// The exponential shift identity coeff(t+dt-s) = e^{-rate dt} coeff(t-s)
/// updates the memory sum in place; advancing step by step reproduces batch
/// requadrature to roundoff.
class HistoryState {
 public:
  HistoryState(const TimeGrid& grid, const RelaxationKernel& kernel, int v_dim, int curve_dim,
               int elem_count);

  /// Push the sample at time index k (must be called for k = 0, 1, ... in order).
  /// velocity: V dofs; normal_velocity: per curve node; memory_sample: the
  /// kernel operand X(t_k) as an elementwise tensor field.
  void advance(const Vec& velocity, const Vec& normal_velocity, const Mat& memory_sample);

  int last_index() const { return last_; }
  /// I u(t_k) - u0 (the caller adds the initial displacement).
  const Vec& displacement_integral() const { return disp_; }
  const Vec& normal_displacement_integral() const { return s_; }
  const Mat& memory_integral() const { return memory_; }

 private:
  TimeGrid grid_;
  RelaxationKernel kernel_;
  int last_ = -1;
  Vec disp_, prev_velocity_;
  Vec s_, prev_normal_velocity_;
  Mat memory_, prev_sample_;
};

/// R(u, xi)(t_k) = B eps(I u(t_k)) + int_0^{t_k} C(t_k - s, eps(u(s)), xi(s)) ds
/// as an elementwise tensor field (3 columns). xi is sampled per element as
/// the vertex mean. Standalone requadrature; the driver uses HistoryTerms.
Mat apply_R(const Trajectory& velocity, const Trajectory& damage, const Vec& u0,
            const Mesh2D& mesh, const DiscreteSpace& V, double theta_B, double zeta_B,
            const RelaxationKernel& kernel, int k);

/// S u(t_k) = int_0^{t_k} u_nu ds + u0_nu per curve node.
Vec apply_S(const Trajectory& velocity, const Vec& u0, const CurveTrace& trace,
            const BoundaryFrame& frame, int k);

/// Elementwise vertex mean of a nodal scalar field.
Vec element_means(const Mesh2D& mesh, const DiscreteSpace& Y, const Vec& nodal);

/// Precomputed R and S terms of a frozen trajectory for every time index.
class HistoryTerms {
 public:
  HistoryTerms(const Trajectory& velocity, const Trajectory& damage, const Vec& u0,
               const Mesh2D& mesh, const DiscreteSpace& V, const DiscreteSpace& Y,
               const CurveTrace& trace, const BoundaryFrame& frame, double theta_B, double zeta_B,
               const RelaxationKernel& kernel);

  const Mat& r_term(int k) const { return r_terms_[k]; }
  const Vec& s_term(int k) const { return s_terms_[k]; }
  const Vec& displacement(int k) const { return displacement_[k]; }

 private:
  std::vector<Mat> r_terms_;
  std::vector<Vec> s_terms_;
  std::vector<Vec> displacement_;
};

struct PicardResult {
  Trajectory trajectory;
  std::vector<double> diffs;  // successive C-norm differences
  bool converged = false;
  int iterations = 0;

  /// Last observed successive-difference ratio (0 when fewer than 2 diffs).
  double last_ratio() const;
};

/// Banach iteration on trajectories: apply `map` until the C-norm of the
/// successive difference drops to tol. Non-convergence returns the best
/// iterate with converged = false.
PicardResult picard_trajectory(const std::function<Trajectory(const Trajectory&)>& map,
                               Trajectory init, double tol, int max_iter,
                               const std::function<double(const Vec&)>& field_norm);

}  // namespace contactsim
