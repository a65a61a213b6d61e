#pragma once

#include <functional>
#include <string>
#include <vector>

#include "contactsim/geometry.hpp"
#include "contactsim/types.hpp"

namespace contactsim {

enum class SpaceKind { VelocityVector, DamageScalar, WearCurve };

/// Node-to-dof map for one of the three discrete spaces. For the vector space
/// node_dof holds the x-dof index (y-dof is node_dof+1) and -1 on constrained
/// Gamma1 nodes; the scalar spaces are unconstrained.
struct DiscreteSpace {
  SpaceKind kind = SpaceKind::DamageScalar;
  int components = 1;
  int dof_count = 0;
  std::vector<int> node_dof;
};

DiscreteSpace make_velocity_space(const Mesh2D& mesh, bool constrain_gamma1 = true);
DiscreteSpace make_damage_space(const Mesh2D& mesh);
DiscreteSpace make_wear_space(const CurveMesh& curve);

struct SparseOperator {
  SpMat matrix;
  bool symmetric = false;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
  /// max |M - M^T| entry, for the symmetry invariant.
  double symmetry_defect() const;
  double max_abs() const;
};

SparseOperator operator_from_triplets(int rows, int cols, const std::vector<Triplet>& entries,
                                      bool symmetric);

/// Row-sum lumping onto the diagonal.
SparseOperator lumped(const SparseOperator& op);

/// Triplet text export `i j value`, one entry per line, for oracle cross-checks.
void write_triplets(const SparseOperator& op, const std::string& path);

struct QuadratureRule {
  Mat points;   // one row per point, reference coordinates
  Vec weights;  // sums to the reference measure
  int exactness = 0;
};

/// 3-point rule on the unit triangle, exact through degree 2.
QuadratureRule triangle_rule_deg2();
/// 2-point Gauss rule on [0,1], exact through degree 3.
QuadratureRule segment_gauss2();

/// Elementwise constant strain (e11, e22, e12) of a P1 vector field,
/// one row per triangle. Constrained nodes contribute zero displacement.
Mat element_strains(const Mesh2D& mesh, const DiscreteSpace& V, const Vec& dofs);

/// Q inner product of two elementwise tensor fields:
/// sum_e area_e (a11 b11 + a22 b22 + 2 a12 b12).
double tensor_field_inner(const Mesh2D& mesh, const Mat& a, const Mat& b);

/// Isotropic constitutive map applied row-wise to element tensors:
/// e -> 2 theta e + zeta tr(e) I.
Mat isotropic_stress(const Mat& strains, double theta, double zeta);

/// int_Omega A eps(u) : eps(v) with A e = 2 theta e + zeta tr(e) I, on the
/// constrained space. SPD for theta > 0, zeta >= 0 once Gamma1 is constrained.
SparseOperator assemble_viscosity(const Mesh2D& mesh, const DiscreteSpace& V, double theta,
                                  double zeta);
SparseOperator assemble_elasticity(const Mesh2D& mesh, const DiscreteSpace& V, double theta,
                                   double zeta);

/// Gram matrix of the V inner product <u,v>_V = int eps(u) : eps(v).
SparseOperator assemble_strain_product(const Mesh2D& mesh, const DiscreteSpace& V);

/// kappa * int_Omega grad(delta) . grad(xi), scalar P1 stiffness.
SparseOperator assemble_damage_stiffness(const Mesh2D& mesh, const DiscreteSpace& Y, double kappa);

/// Scalar P1 mass matrix on the mesh (Y1 inner product).
SparseOperator assemble_mass(const Mesh2D& mesh, const DiscreteSpace& Y);
/// Scalar P1 mass matrix along the arc-length parameterized curve.
SparseOperator assemble_mass(const CurveMesh& curve);

/// 1-D P1 stiffness along arc length plus b at the flagged endpoints'
/// diagonal entries (Robin term). Positive semidefinite for b >= 0.
SparseOperator assemble_curve_diffusion(const CurveMesh& curve, double b);

using SpatialField2 = std::function<Vec2(double t, const Vec2& x)>;

/// Load vector int f0 . v dx + int_{Gamma2} f2 . v dGamma on constrained dofs.
Vec assemble_load(const Mesh2D& mesh, const DiscreteSpace& V, const SpatialField2& f0,
                  const SpatialField2& f2, double t);

/// F_i = sum_e area_e * y_e : eps(psi_i), the linear functional <y, eps(v)>_Q
/// of an elementwise tensor field y (3 columns).
Vec history_load(const Mesh2D& mesh, const DiscreteSpace& V, const Mat& tensor_field);

/// Curve-node pairs of V dofs; -1 marks nodes constrained by Gamma1.
struct CurveTrace {
  std::vector<int> vdof;
  Vec2 vector_at(const Vec& field, int node) const {
    const int d = vdof[node];
    return d < 0 ? Vec2::Zero() : Vec2(field[d], field[d + 1]);
  }
};

CurveTrace make_curve_trace(const CurveMesh& curve, const DiscreteSpace& V);

/// Rayleigh-quotient estimates via power iteration; at least `min_iters`
/// iterations, continuing until the quotient stagnates.
double largest_eig_estimate(const SpMat& m, int min_iters = 20);
double smallest_eig_estimate(const SpMat& m, int min_iters = 20);

}  // namespace contactsim
