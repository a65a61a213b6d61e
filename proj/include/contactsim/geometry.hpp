#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "contactsim/types.hpp"

namespace contactsim {

enum class BoundaryLabel { Gamma1, Gamma2, Gamma3 };

const char* label_name(BoundaryLabel label);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryLabel label = BoundaryLabel::Gamma2;
};

/// Triangulated 2-D domain with a labeled boundary decomposition.
///
/// Validity (checked by validate_mesh): triangles uniformly counterclockwise,
/// every labeled edge is an edge of exactly one triangle, the labels cover
/// the hull exactly once, and the Gamma1 set is nonempty.
struct Mesh2D {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  /// Signed area of triangle t (positive for counterclockwise).
  double signed_area(int t) const;
};

void validate_mesh(const Mesh2D& mesh);

Mesh2D load_mesh(const std::string& path);
void save_mesh(const Mesh2D& mesh, const std::string& path);

struct RectLabels {
  BoundaryLabel left = BoundaryLabel::Gamma1;
  BoundaryLabel right = BoundaryLabel::Gamma2;
  BoundaryLabel bottom = BoundaryLabel::Gamma3;
  BoundaryLabel top = BoundaryLabel::Gamma2;
};

/// Structured triangulation of [0,1]^2 with nx-by-ny cells, each split along
/// its diagonal: (nx+1)(ny+1) vertices, 2*nx*ny triangles.
Mesh2D generate_rect_mesh(int nx, int ny, const RectLabels& labels);

/// The contact curve: Gamma3 nodes ordered along the chain with a cumulative
/// arc-length coordinate. Exactly 0 (closed) or 2 (open) endpoint flags set.
struct CurveMesh {
  std::vector<int> node_ids;
  Vec arc_length;
  std::vector<bool> endpoint_flag;
  bool closed = false;
  double closing_length = 0.0;  // wrap segment of a closed curve, 0 otherwise

  int node_count() const { return static_cast<int>(node_ids.size()); }
  double length() const {
    return (arc_length.size() ? arc_length[arc_length.size() - 1] : 0.0) + closing_length;
  }
  /// Length of segment s (s = node_count()-1 is the wrap segment when closed).
  double segment_length(int s) const {
    return s + 1 < arc_length.size() ? arc_length[s + 1] - arc_length[s] : closing_length;
  }
};

CurveMesh extract_curve(const Mesh2D& mesh);

/// Outward unit normal and tangent (normal rotated -90 degrees) per curve node.
struct BoundaryFrame {
  std::vector<Vec2> normal;
  std::vector<Vec2> tangent;
};

BoundaryFrame boundary_frame(const Mesh2D& mesh, const CurveMesh& curve);

struct NormalTangential {
  double nu = 0.0;
  double tau = 0.0;
};

/// v = nu * normal + tau * tangent; exact decomposition in the orthonormal frame.
NormalTangential split_normal_tangential(const Vec2& v, const Vec2& normal, const Vec2& tangent);

/// Sum of signed triangle areas.
double mesh_area(const Mesh2D& mesh);

/// Shoelace area over the labeled boundary edges, oriented consistently with
/// their triangles. Equals mesh_area for a valid mesh by Green's theorem.
double boundary_shoelace_area(const Mesh2D& mesh);

}  // namespace contactsim
