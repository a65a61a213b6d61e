#include "contactsim/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <fstream>

namespace contactsim {

namespace {

struct TriangleGeometry {
  double area = 0.0;
  Vec2 grad[3];  // gradients of the barycentric coordinates
};

TriangleGeometry triangle_geometry(const Mesh2D& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2& p0 = mesh.vertices[tri[0]];
  const Vec2& p1 = mesh.vertices[tri[1]];
  const Vec2& p2 = mesh.vertices[tri[2]];
  TriangleGeometry g;
  const double twice_area = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  g.area = 0.5 * twice_area;
  g.grad[0] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / twice_area;
  g.grad[1] = Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / twice_area;
  g.grad[2] = Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / twice_area;
  return g;
}

// Strain (e11, e22, e12) of the P1 basis function of local node i moved in
// direction d, constant over the element.
Eigen::Vector3d basis_strain(const TriangleGeometry& g, int i, int d) {
  const Vec2& gr = g.grad[i];
  if (d == 0) return {gr.x(), 0.0, 0.5 * gr.y()};
  return {0.0, gr.y(), 0.5 * gr.x()};
}

std::vector<bool> gamma1_nodes(const Mesh2D& mesh) {
  std::vector<bool> constrained(mesh.vertex_count(), false);
  for (const BoundaryEdge& be : mesh.boundary_edges)
    if (be.label == BoundaryLabel::Gamma1) {
      constrained[be.a] = true;
      constrained[be.b] = true;
    }
  return constrained;
}

SparseOperator assemble_isotropic_form(const Mesh2D& mesh, const DiscreteSpace& V, double theta,
                                       double zeta) {
  std::vector<Triplet> entries;
  entries.reserve(36 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int dof_i = V.node_dof[tri[i]];
      if (dof_i < 0) continue;
      for (int di = 0; di < 2; ++di) {
        const Eigen::Vector3d si = basis_strain(g, i, di);
        for (int j = 0; j < 3; ++j) {
          const int dof_j = V.node_dof[tri[j]];
          if (dof_j < 0) continue;
          for (int dj = 0; dj < 2; ++dj) {
            const Eigen::Vector3d sj = basis_strain(g, j, dj);
            // A eps : eps' = 2 theta (e11 e11' + e22 e22' + 2 e12 e12') + zeta tr tr'
            const double dot = si[0] * sj[0] + si[1] * sj[1] + 2.0 * si[2] * sj[2];
            const double trace = (si[0] + si[1]) * (sj[0] + sj[1]);
            const double value = g.area * (2.0 * theta * dot + zeta * trace);
            if (value != 0.0) entries.emplace_back(dof_i + di, dof_j + dj, value);
          }
        }
      }
    }
  }
  return operator_from_triplets(V.dof_count, V.dof_count, entries, true);
}

}  // namespace

DiscreteSpace make_velocity_space(const Mesh2D& mesh, bool constrain_gamma1) {
  DiscreteSpace space;
  space.kind = SpaceKind::VelocityVector;
  space.components = 2;
  space.node_dof.assign(mesh.vertex_count(), -1);
  const std::vector<bool> constrained =
      constrain_gamma1 ? gamma1_nodes(mesh) : std::vector<bool>(mesh.vertex_count(), false);
  int next = 0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (constrained[v]) continue;
    space.node_dof[v] = next;
    next += 2;
  }
  space.dof_count = next;
  return space;
}

DiscreteSpace make_damage_space(const Mesh2D& mesh) {
  DiscreteSpace space;
  space.kind = SpaceKind::DamageScalar;
  space.components = 1;
  space.dof_count = mesh.vertex_count();
  space.node_dof.resize(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) space.node_dof[v] = v;
  return space;
}

DiscreteSpace make_wear_space(const CurveMesh& curve) {
  DiscreteSpace space;
  space.kind = SpaceKind::WearCurve;
  space.components = 1;
  space.dof_count = curve.node_count();
  space.node_dof.resize(curve.node_count());
  for (int v = 0; v < curve.node_count(); ++v) space.node_dof[v] = v;
  return space;
}

double SparseOperator::symmetry_defect() const {
  SpMat diff = SpMat(matrix.transpose()) - matrix;
  double defect = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it) defect = std::max(defect, std::abs(it.value()));
  return defect;
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

SparseOperator operator_from_triplets(int rows, int cols, const std::vector<Triplet>& entries,
                                      bool symmetric) {
  SparseOperator op;
  op.matrix.resize(rows, cols);
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  op.matrix.makeCompressed();
  op.symmetric = symmetric;
  return op;
}

SparseOperator lumped(const SparseOperator& op) {
  std::vector<Triplet> entries;
  entries.reserve(op.rows());
  const Vec row_sums = op.matrix * Vec::Ones(op.cols());
  for (int i = 0; i < op.rows(); ++i) entries.emplace_back(i, i, row_sums[i]);
  return operator_from_triplets(op.rows(), op.cols(), entries, true);
}

void write_triplets(const SparseOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write triplet file: " + path);
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(op.matrix, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

QuadratureRule triangle_rule_deg2() {
  QuadratureRule rule;
  rule.points.resize(3, 2);
  rule.points << 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0;
  rule.weights = Vec::Constant(3, 1.0 / 6.0);
  rule.exactness = 2;
  return rule;
}

QuadratureRule segment_gauss2() {
  QuadratureRule rule;
  const double off = 0.5 / std::sqrt(3.0);
  rule.points.resize(2, 1);
  rule.points << 0.5 - off, 0.5 + off;
  rule.weights = Vec::Constant(2, 0.5);
  rule.exactness = 3;
  return rule;
}

Mat element_strains(const Mesh2D& mesh, const DiscreteSpace& V, const Vec& dofs) {
  if (dofs.size() != V.dof_count) throw Error("element_strains: dof dimension mismatch");
  Mat strains = Mat::Zero(mesh.triangle_count(), 3);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int dof = V.node_dof[tri[i]];
      if (dof < 0) continue;
      const double ux = dofs[dof], uy = dofs[dof + 1];
      strains(t, 0) += g.grad[i].x() * ux;
      strains(t, 1) += g.grad[i].y() * uy;
      strains(t, 2) += 0.5 * (g.grad[i].y() * ux + g.grad[i].x() * uy);
    }
  }
  return strains;
}

double tensor_field_inner(const Mesh2D& mesh, const Mat& a, const Mat& b) {
  double sum = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    sum += mesh.signed_area(t) * (a(t, 0) * b(t, 0) + a(t, 1) * b(t, 1) + 2.0 * a(t, 2) * b(t, 2));
  return sum;
}

Mat isotropic_stress(const Mat& strains, double theta, double zeta) {
  Mat out(strains.rows(), 3);
  for (int e = 0; e < strains.rows(); ++e) {
    const double trace = strains(e, 0) + strains(e, 1);
    out(e, 0) = 2.0 * theta * strains(e, 0) + zeta * trace;
    out(e, 1) = 2.0 * theta * strains(e, 1) + zeta * trace;
    out(e, 2) = 2.0 * theta * strains(e, 2);
  }
  return out;
}

SparseOperator assemble_viscosity(const Mesh2D& mesh, const DiscreteSpace& V, double theta,
                                  double zeta) {
  if (theta <= 0.0 || zeta < 0.0)
    throw Error("assemble_viscosity: requires theta > 0 and zeta >= 0");
  return assemble_isotropic_form(mesh, V, theta, zeta);
}

SparseOperator assemble_elasticity(const Mesh2D& mesh, const DiscreteSpace& V, double theta,
                                   double zeta) {
  if (theta < 0.0 || zeta < 0.0)
    throw Error("assemble_elasticity: requires theta >= 0 and zeta >= 0");
  return assemble_isotropic_form(mesh, V, theta, zeta);
}

SparseOperator assemble_strain_product(const Mesh2D& mesh, const DiscreteSpace& V) {
  return assemble_isotropic_form(mesh, V, 0.5, 0.0);
}

SparseOperator assemble_damage_stiffness(const Mesh2D& mesh, const DiscreteSpace& Y, double kappa) {
  if (kappa <= 0.0) throw Error("assemble_damage_stiffness: kappa must be > 0");
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        entries.emplace_back(Y.node_dof[tri[i]], Y.node_dof[tri[j]],
                             kappa * g.area * g.grad[i].dot(g.grad[j]));
  }
  return operator_from_triplets(Y.dof_count, Y.dof_count, entries, true);
}

SparseOperator assemble_mass(const Mesh2D& mesh, const DiscreteSpace& Y) {
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double area = mesh.signed_area(t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        entries.emplace_back(Y.node_dof[tri[i]], Y.node_dof[tri[j]],
                             area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
  }
  return operator_from_triplets(Y.dof_count, Y.dof_count, entries, true);
}

SparseOperator assemble_mass(const CurveMesh& curve) {
  const int n = curve.node_count();
  std::vector<Triplet> entries;
  const int n_segments = curve.closed ? n : n - 1;
  for (int s = 0; s < n_segments; ++s) {
    const int i = s;
    const int j = (s + 1) % n;
    const double seg = curve.segment_length(s);
    entries.emplace_back(i, i, seg / 3.0);
    entries.emplace_back(j, j, seg / 3.0);
    entries.emplace_back(i, j, seg / 6.0);
    entries.emplace_back(j, i, seg / 6.0);
  }
  return operator_from_triplets(n, n, entries, true);
}

SparseOperator assemble_curve_diffusion(const CurveMesh& curve, double b) {
  const int n = curve.node_count();
  std::vector<Triplet> entries;
  const int n_segments = curve.closed ? n : n - 1;
  for (int s = 0; s < n_segments; ++s) {
    const int i = s;
    const int j = (s + 1) % n;
    const double k = 1.0 / curve.segment_length(s);
    entries.emplace_back(i, i, k);
    entries.emplace_back(j, j, k);
    entries.emplace_back(i, j, -k);
    entries.emplace_back(j, i, -k);
  }
  for (int i = 0; i < n; ++i)
    if (curve.endpoint_flag[i]) entries.emplace_back(i, i, b);
  return operator_from_triplets(n, n, entries, true);
}

Vec assemble_load(const Mesh2D& mesh, const DiscreteSpace& V, const SpatialField2& f0,
                  const SpatialField2& f2, double t) {
  Vec load = Vec::Zero(V.dof_count);

  if (f0) {
    const QuadratureRule rule = triangle_rule_deg2();
    for (int tr = 0; tr < mesh.triangle_count(); ++tr) {
      const auto& tri = mesh.triangles[tr];
      const Vec2& p0 = mesh.vertices[tri[0]];
      const Vec2& p1 = mesh.vertices[tri[1]];
      const Vec2& p2 = mesh.vertices[tri[2]];
      const double twice_area = 2.0 * mesh.signed_area(tr);
      for (int q = 0; q < rule.weights.size(); ++q) {
        const double xi = rule.points(q, 0), eta = rule.points(q, 1);
        const double lambda[3] = {1.0 - xi - eta, xi, eta};
        const Vec2 x = lambda[0] * p0 + lambda[1] * p1 + lambda[2] * p2;
        const Vec2 f = f0(t, x);
        for (int i = 0; i < 3; ++i) {
          const int dof = V.node_dof[tri[i]];
          if (dof < 0) continue;
          const double w = twice_area * rule.weights[q] * lambda[i];
          load[dof] += w * f.x();
          load[dof + 1] += w * f.y();
        }
      }
    }
  }

  if (f2) {
    const QuadratureRule rule = segment_gauss2();
    for (const BoundaryEdge& be : mesh.boundary_edges) {
      if (be.label != BoundaryLabel::Gamma2) continue;
      const Vec2& pa = mesh.vertices[be.a];
      const Vec2& pb = mesh.vertices[be.b];
      const double len = (pb - pa).norm();
      for (int q = 0; q < rule.weights.size(); ++q) {
        const double s = rule.points(q, 0);
        const Vec2 x = (1.0 - s) * pa + s * pb;
        const Vec2 f = f2(t, x);
        const double shape[2] = {1.0 - s, s};
        const int nodes[2] = {be.a, be.b};
        for (int i = 0; i < 2; ++i) {
          const int dof = V.node_dof[nodes[i]];
          if (dof < 0) continue;
          const double w = len * rule.weights[q] * shape[i];
          load[dof] += w * f.x();
          load[dof + 1] += w * f.y();
        }
      }
    }
  }
  return load;
}

Vec history_load(const Mesh2D& mesh, const DiscreteSpace& V, const Mat& tensor_field) {
  Vec load = Vec::Zero(V.dof_count);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int dof = V.node_dof[tri[i]];
      if (dof < 0) continue;
      for (int d = 0; d < 2; ++d) {
        const Eigen::Vector3d s = basis_strain(g, i, d);
        load[dof + d] += g.area * (tensor_field(t, 0) * s[0] + tensor_field(t, 1) * s[1] +
                                   2.0 * tensor_field(t, 2) * s[2]);
      }
    }
  }
  return load;
}

CurveTrace make_curve_trace(const CurveMesh& curve, const DiscreteSpace& V) {
  CurveTrace trace;
  trace.vdof.resize(curve.node_count());
  for (int i = 0; i < curve.node_count(); ++i) trace.vdof[i] = V.node_dof[curve.node_ids[i]];
  return trace;
}

namespace {

Vec deterministic_start(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * std::sin(1.0 + i);
  return v / v.norm();
}

}  // namespace

double largest_eig_estimate(const SpMat& m, int min_iters) {
  Vec v = deterministic_start(static_cast<int>(m.rows()));
  double rayleigh = 0.0;
  const int max_iters = std::max(min_iters, 500);
  for (int it = 0; it < max_iters; ++it) {
    Vec w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = v.dot(m * v);
    if (it >= min_iters && std::abs(next - rayleigh) <= 1e-13 * std::abs(next)) return next;
    rayleigh = next;
  }
  return rayleigh;
}

double smallest_eig_estimate(const SpMat& m, int min_iters) {
  Eigen::SimplicialLDLT<SpMat> solver(m);
  if (solver.info() != Eigen::Success)
    throw SolverError("smallest_eig_estimate: factorization failed (matrix not SPD?)");
  Vec v = deterministic_start(static_cast<int>(m.rows()));
  double rayleigh = 0.0;
  const int max_iters = std::max(min_iters, 500);
  for (int it = 0; it < max_iters; ++it) {
    Vec w = solver.solve(v);
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
    const double next = v.dot(m * v);
    if (it >= min_iters && std::abs(next - rayleigh) <= 1e-13 * std::abs(next)) return next;
    rayleigh = next;
  }
  return rayleigh;
}

}  // namespace contactsim
