#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "contactsim/assembly.hpp"
#include "contactsim/geometry.hpp"
#include "contactsim/history.hpp"

using namespace contactsim;

namespace {

double euclid(const Vec& v) { return v.norm(); }

Trajectory scalar_trajectory(const TimeGrid& grid, const std::function<double(double)>& f) {
  Trajectory traj = Trajectory::zeros(grid, 1);
  for (int k = 0; k < grid.point_count(); ++k) traj.values[k][0] = f(grid.time(k));
  return traj;
}

struct ContactFixture {
  Mesh2D mesh = generate_rect_mesh(2, 2, {});
  DiscreteSpace V = make_velocity_space(mesh);
  DiscreteSpace Y = make_damage_space(mesh);
  CurveMesh curve = extract_curve(mesh);
  BoundaryFrame frame = boundary_frame(mesh, curve);
  CurveTrace trace = make_curve_trace(curve, V);
};

}  // namespace

TEST_CASE("integrate_trajectory trapezoid exactness") {
  const TimeGrid grid{2.0, 7};
  const Vec c = Vec::Constant(3, 4.0);

  Trajectory zero = Trajectory::zeros(grid, 3);
  const Trajectory const_out = integrate_trajectory(zero, c);
  for (const Vec& v : const_out.values) CHECK((v - c).cwiseAbs().maxCoeff() == 0.0);

  Trajectory constant = Trajectory::constant(grid, Vec::Constant(2, 1.5));
  const Trajectory ramp = integrate_trajectory(constant, Vec::Zero(2));
  CHECK((ramp.values.back() - Vec::Constant(2, 3.0)).cwiseAbs().maxCoeff() < 1e-13);

  // linear integrand: int_0^1 t dt = 0.5, exact for the trapezoid rule
  const TimeGrid unit{1.0, 9};
  Trajectory linear = Trajectory::zeros(unit, 1);
  for (int k = 0; k < unit.point_count(); ++k) linear.values[k][0] = unit.time(k);
  const Trajectory integrated = integrate_trajectory(linear, Vec::Zero(1));
  CHECK(std::abs(integrated.values.back()[0] - 0.5) < 1e-13);
  // affine in t at every grid point
  for (int k = 0; k < unit.point_count(); ++k) {
    const double t = unit.time(k);
    CHECK(std::abs(integrated.values[k][0] - 0.5 * t * t) < 1e-13);
  }

  CHECK_THROWS_AS(integrate_trajectory(linear, Vec::Zero(2)), Error);
}

TEST_CASE("apply_R degenerate and constant-kernel cases") {
  ContactFixture fx;
  const TimeGrid grid{2.0, 8};

  Trajectory eta = Trajectory::zeros(grid, fx.V.dof_count);
  Trajectory xi = Trajectory::constant(grid, Vec::Constant(fx.Y.dof_count, 0.5));
  RelaxationKernel zero;
  const Mat r0 = apply_R(eta, xi, Vec::Zero(fx.V.dof_count), fx.mesh, fx.V, 0.0, 0.0, zero, 5);
  CHECK(r0.cwiseAbs().maxCoeff() == 0.0);

  // constant kernel, constant velocity: integral is t_k * eps(eta)
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec field(fx.V.dof_count);
  for (int i = 0; i < field.size(); ++i) field[i] = gauss(rng);
  eta = Trajectory::constant(grid, field);
  RelaxationKernel constant;
  constant.kind = RelaxationKernel::Kind::Constant;
  constant.scale = 1.0;
  const Mat strains = element_strains(fx.mesh, fx.V, field);
  for (int k : {1, 4, 8}) {
    const Mat rk = apply_R(eta, xi, Vec::Zero(fx.V.dof_count), fx.mesh, fx.V, 0.0, 0.0, constant, k);
    CHECK((rk - grid.time(k) * strains).cwiseAbs().maxCoeff() < 1e-13 * (1.0 + grid.time(k)));
  }
}

TEST_CASE("apply_R exponential kernel converges at second order") {
  ContactFixture fx;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec field(fx.V.dof_count);
  for (int i = 0; i < field.size(); ++i) field[i] = gauss(rng);

  RelaxationKernel kernel;
  kernel.kind = RelaxationKernel::Kind::Exponential;
  kernel.scale = 1.0;
  kernel.rate = 1.0;

  const double T = 1.0;
  const Mat strains = element_strains(fx.mesh, fx.V, field);
  auto error_at = [&](int n_steps) {
    const TimeGrid grid{T, n_steps};
    const Trajectory eta = Trajectory::constant(grid, field);
    const Trajectory xi = Trajectory::zeros(grid, fx.Y.dof_count);
    const Mat r = apply_R(eta, xi, Vec::Zero(fx.V.dof_count), fx.mesh, fx.V, 0.0, 0.0, kernel,
                          n_steps);
    // analytic: int_0^T e^{-(T-s)} ds = 1 - e^{-T}
    const Mat exact = (1.0 - std::exp(-T)) * strains;
    return (r - exact).cwiseAbs().maxCoeff();
  };
  const double e8 = error_at(8);
  const double e16 = error_at(16);
  const double e32 = error_at(32);
  const double order1 = std::log2(e8 / e16);
  const double order2 = std::log2(e16 / e32);
  CHECK(order1 >= 1.9);
  CHECK(order2 >= 1.9);
}

TEST_CASE("apply_R satisfies the discrete history Lipschitz bound") {
  ContactFixture fx;
  const TimeGrid grid{1.0, 12};
  const double theta_B = 0.3, zeta_B = 0.1;
  RelaxationKernel kernel;
  kernel.kind = RelaxationKernel::Kind::Exponential;
  kernel.scale = 0.4;
  kernel.rate = 2.0;
  kernel.damage_factor = 0.5;
  const double L_B = 2.0 * (theta_B + zeta_B);
  const double L_C = kernel.scale_max();  // damage factor only shrinks the kernel

  const SparseOperator gram = assemble_strain_product(fx.mesh, fx.V);
  auto v_norm = [&](const Vec& v) { return std::sqrt(std::max(0.0, v.dot(gram.matrix * v))); };
  auto q_norm = [&](const Mat& t) { return std::sqrt(std::max(0.0, tensor_field_inner(fx.mesh, t, t))); };

  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    Trajectory eta1 = Trajectory::zeros(grid, fx.V.dof_count);
    Trajectory eta2 = Trajectory::zeros(grid, fx.V.dof_count);
    Trajectory xi = Trajectory::zeros(grid, fx.Y.dof_count);
    for (int k = 0; k < grid.point_count(); ++k) {
      for (int i = 0; i < fx.V.dof_count; ++i) {
        eta1.values[k][i] = gauss(rng);
        eta2.values[k][i] = gauss(rng);
      }
      xi.values[k] = Vec::Constant(fx.Y.dof_count, 0.5 + 0.4 * std::sin(1.0 + k));
    }
    const int k = 12;
    const Mat r1 = apply_R(eta1, xi, Vec::Zero(fx.V.dof_count), fx.mesh, fx.V, theta_B, zeta_B, kernel, k);
    const Mat r2 = apply_R(eta2, xi, Vec::Zero(fx.V.dof_count), fx.mesh, fx.V, theta_B, zeta_B, kernel, k);
    double trapz = 0.0;
    for (int j = 0; j <= k; ++j) {
      const double w = (j == 0 || j == k) ? 0.5 : 1.0;
      trapz += w * grid.dt() * v_norm(eta1.values[j] - eta2.values[j]);
    }
    CHECK(q_norm(r1 - r2) <= (L_B + L_C) * trapz + 1e-8);
  }
}

TEST_CASE("apply_S examples") {
  ContactFixture fx;
  const TimeGrid grid{2.0, 10};

  // velocity with unit normal component on the contact line (normal (0,-1))
  Vec down = Vec::Zero(fx.V.dof_count);
  for (int n = 0; n < fx.mesh.vertex_count(); ++n)
    if (fx.V.node_dof[n] >= 0) down[fx.V.node_dof[n] + 1] = -1.0;
  const Trajectory eta = Trajectory::constant(grid, down);
  const Vec s = apply_S(eta, Vec::Zero(fx.V.dof_count), fx.trace, fx.frame, grid.n_steps);
  for (int i = 0; i < fx.curve.node_count(); ++i) {
    if (fx.trace.vdof[i] < 0) continue;  // clamped corner has zero trace
    CHECK(s[i] == doctest::Approx(2.0).epsilon(1e-13));
  }

  // zero velocity returns the initial normal displacement
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec u0(fx.V.dof_count);
  for (int i = 0; i < u0.size(); ++i) u0[i] = gauss(rng);
  const Trajectory still = Trajectory::zeros(grid, fx.V.dof_count);
  const Vec s0 = apply_S(still, u0, fx.trace, fx.frame, 7);
  for (int i = 0; i < fx.curve.node_count(); ++i)
    CHECK(s0[i] ==
          doctest::Approx(fx.trace.vector_at(u0, i).dot(fx.frame.normal[i])).epsilon(1e-14));
}

TEST_CASE("incremental history equals batch requadrature") {
  ContactFixture fx;
  const TimeGrid grid{1.5, 16};
  RelaxationKernel kernel;
  kernel.kind = RelaxationKernel::Kind::Exponential;
  kernel.scale = 0.7;
  kernel.rate = 1.3;
  kernel.damage_factor = 0.4;

  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Trajectory eta = Trajectory::zeros(grid, fx.V.dof_count);
  Trajectory xi = Trajectory::zeros(grid, fx.Y.dof_count);
  Vec u0(fx.V.dof_count);
  for (int i = 0; i < u0.size(); ++i) u0[i] = gauss(rng);
  for (int k = 0; k < grid.point_count(); ++k) {
    for (int i = 0; i < fx.V.dof_count; ++i) eta.values[k][i] = gauss(rng);
    for (int i = 0; i < fx.Y.dof_count; ++i) xi.values[k][i] = 0.5 + 0.4 * std::tanh(gauss(rng));
  }

  const HistoryTerms terms(eta, xi, u0, fx.mesh, fx.V, fx.Y, fx.trace, fx.frame, 0.25, 0.15, kernel);
  const Trajectory disp = integrate_trajectory(eta, u0);
  for (int k : {0, 1, 5, 16}) {
    const Mat batch_r = apply_R(eta, xi, u0, fx.mesh, fx.V, 0.25, 0.15, kernel, k);
    CHECK((terms.r_term(k) - batch_r).cwiseAbs().maxCoeff() < 1e-12);
    const Vec batch_s = apply_S(eta, u0, fx.trace, fx.frame, k);
    CHECK((terms.s_term(k) - batch_s).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((terms.displacement(k) - disp.values[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("picard_trajectory on the affine scalar map") {
  const TimeGrid grid{1.0, 4};
  auto map = [&grid](const Trajectory& t) {
    Trajectory out = t;
    for (Vec& v : out.values) v = 0.5 * v + Vec::Ones(1);
    return out;
  };
  const PicardResult res = picard_trajectory(map, Trajectory::zeros(grid, 1), 1e-10, 100, euclid);
  CHECK(res.converged);
  for (const Vec& v : res.trajectory.values) CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(res.last_ratio() == doctest::Approx(0.5).epsilon(1e-6));

  // contractive maps show monotone geometric decay of the logged differences
  for (std::size_t i = 1; i < res.diffs.size(); ++i)
    CHECK(res.diffs[i] <= res.diffs[0] * std::pow(0.5, static_cast<double>(i)) * 1.05);
}

TEST_CASE("picard_trajectory identity map stops after one sweep") {
  const TimeGrid grid{1.0, 3};
  auto identity = [](const Trajectory& t) { return t; };
  Trajectory init = Trajectory::constant(grid, Vec::Constant(2, 7.0));
  const PicardResult res = picard_trajectory(identity, init, 1e-12, 50, euclid);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.diffs.size() == 1);
  CHECK(res.diffs[0] == 0.0);
}

TEST_CASE("picard_trajectory solves the Volterra fixed point x = int x + 1") {
  const TimeGrid grid{1.0, 64};
  auto map = [](const Trajectory& t) {
    Trajectory out = integrate_trajectory(t, Vec::Zero(1));
    for (Vec& v : out.values) v[0] += 1.0;
    return out;
  };
  const PicardResult res = picard_trajectory(map, Trajectory::zeros(grid, 1), 1e-12, 200, euclid);
  CHECK(res.converged);
  const double dt = grid.dt();
  for (int k = 0; k < grid.point_count(); ++k)
    CHECK(std::abs(res.trajectory.values[k][0] - std::exp(grid.time(k))) <= 5.0 * dt * dt);
}

TEST_CASE("picard_trajectory flags non-convergence and keeps the best iterate") {
  const TimeGrid grid{1.0, 2};
  auto expanding = [](const Trajectory& t) {
    Trajectory out = t;
    for (Vec& v : out.values) v = 2.0 * v + Vec::Ones(1);
    return out;
  };
  const PicardResult res =
      picard_trajectory(expanding, Trajectory::zeros(grid, 1), 1e-10, 5, euclid);
  CHECK(!res.converged);
  CHECK(res.iterations == 5);
  CHECK(res.diffs.size() == 5);
}

TEST_CASE("trajectory csv export") {
  const TimeGrid grid{0.5, 2};
  Trajectory traj = Trajectory::zeros(grid, 2);
  traj.values[1] << 1.25, -0.5;
  traj.values[2] << 2.0, 0.125;
  const auto path = (std::filesystem::temp_directory_path() / "traj.csv").string();
  write_trajectory_csv(traj, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,dof_0,dof_1");
  std::getline(in, line);
  CHECK(line == "0,0,0");
  std::getline(in, line);
  CHECK(line == "0.25,1.25,-0.5");
}
