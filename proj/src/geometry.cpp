#include "contactsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace contactsim {

namespace {

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Directed edges of triangle t in counterclockwise order.
std::array<std::pair<int, int>, 3> directed_edges(const std::array<int, 3>& tri) {
  return {{{tri[0], tri[1]}, {tri[1], tri[2]}, {tri[2], tri[0]}}};
}

}  // namespace

const char* label_name(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::Gamma1: return "G1";
    case BoundaryLabel::Gamma2: return "G2";
    case BoundaryLabel::Gamma3: return "G3";
  }
  return "?";
}

double Mesh2D::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Vec2& p0 = vertices[tri[0]];
  const Vec2& p1 = vertices[tri[1]];
  const Vec2& p2 = vertices[tri[2]];
  return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
}

double mesh_area(const Mesh2D& mesh) {
  double area = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) area += mesh.signed_area(t);
  return area;
}

void validate_mesh(const Mesh2D& mesh) {
  const int nv = mesh.vertex_count();
  if (nv < 3) throw MeshError("mesh has fewer than 3 vertices");

  for (int t = 0; t < mesh.triangle_count(); ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= nv)
        throw MeshError("triangle " + std::to_string(t) + " references vertex " + std::to_string(v) +
                        " out of range");
    if (mesh.signed_area(t) <= 0.0)
      throw MeshError("triangle " + std::to_string(t) + " is not counterclockwise (signed area " +
                      format_double(mesh.signed_area(t)) + ")");
  }

  // Count how many triangles share each undirected edge.
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& tri : mesh.triangles)
    for (const auto& [a, b] : directed_edges(tri)) edge_use[edge_key(a, b)] += 1;

  std::map<std::pair<int, int>, int> labeled;
  bool gamma1_seen = false;
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const BoundaryEdge& be = mesh.boundary_edges[e];
    if (be.a < 0 || be.a >= nv || be.b < 0 || be.b >= nv || be.a == be.b)
      throw MeshError("boundary edge " + std::to_string(e) + " has invalid vertices");
    auto it = edge_use.find(edge_key(be.a, be.b));
    if (it == edge_use.end())
      throw MeshError("boundary edge " + std::to_string(e) + " is not an edge of any triangle");
    if (it->second != 1)
      throw MeshError("boundary edge " + std::to_string(e) + " is shared by " +
                      std::to_string(it->second) + " triangles");
    if (++labeled[edge_key(be.a, be.b)] > 1)
      throw MeshError("boundary edge (" + std::to_string(be.a) + "," + std::to_string(be.b) +
                      ") is labeled more than once");
    if (be.label == BoundaryLabel::Gamma1) gamma1_seen = true;
  }

  for (const auto& [key, count] : edge_use)
    if (count == 1 && !labeled.count(key))
      throw MeshError("hull edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                      ") carries no boundary label");

  if (!gamma1_seen) throw MeshError("Gamma1 empty: at least one edge must carry label G1");
}

Mesh2D load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path);

  Mesh2D mesh;
  std::string line;
  int line_no = 0;
  bool header_seen = false;

  auto fail = [&](const std::string& msg) {
    throw MeshError(path + ":" + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;

    if (!header_seen) {
      std::string version;
      if (tag != "mesh2d" || !(ls >> version) || version != "v1")
        fail("expected header 'mesh2d v1'");
      header_seen = true;
      continue;
    }

    if (tag == "v") {
      double x, y;
      if (!(ls >> x >> y)) fail("malformed vertex line");
      mesh.vertices.emplace_back(x, y);
    } else if (tag == "t") {
      int i, j, k;
      if (!(ls >> i >> j >> k)) fail("malformed triangle line");
      mesh.triangles.push_back({i, j, k});
    } else if (tag == "b") {
      int i, j;
      std::string label;
      if (!(ls >> i >> j >> label)) fail("malformed boundary line");
      BoundaryEdge be;
      be.a = i;
      be.b = j;
      if (label == "G1")
        be.label = BoundaryLabel::Gamma1;
      else if (label == "G2")
        be.label = BoundaryLabel::Gamma2;
      else if (label == "G3")
        be.label = BoundaryLabel::Gamma3;
      else
        fail("unknown boundary label '" + label + "'");
      mesh.boundary_edges.push_back(be);
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (!header_seen) throw MeshError(path + ": missing 'mesh2d v1' header");

  validate_mesh(mesh);
  return mesh;
}

void save_mesh(const Mesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file: " + path);
  out << "mesh2d v1\n";
  for (const Vec2& v : mesh.vertices)
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
  for (const auto& t : mesh.triangles) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const BoundaryEdge& be : mesh.boundary_edges)
    out << "b " << be.a << ' ' << be.b << ' ' << label_name(be.label) << '\n';
  if (!out) throw MeshError("write failed: " + path);
}

Mesh2D generate_rect_mesh(int nx, int ny, const RectLabels& labels) {
  if (nx < 1 || ny < 1) throw MeshError("generate_rect_mesh requires nx, ny >= 1");

  Mesh2D mesh;
  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(static_cast<double>(i) / nx, static_cast<double>(j) / ny);

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }

  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), labels.bottom});
    mesh.boundary_edges.push_back({vid(i + 1, ny), vid(i, ny), labels.top});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({vid(0, j + 1), vid(0, j), labels.left});
    mesh.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), labels.right});
  }

  validate_mesh(mesh);
  return mesh;
}

namespace {

// Orient {a,b} the way its (unique) triangle traverses it, so the domain lies
// on the left and (dy, -dx) points outward.
std::pair<int, int> oriented_boundary_edge(const Mesh2D& mesh, int a, int b) {
  for (const auto& tri : mesh.triangles)
    for (const auto& [u, v] : directed_edges(tri)) {
      if (u == a && v == b) return {a, b};
      if (u == b && v == a) return {b, a};
    }
  throw MeshError("boundary edge (" + std::to_string(a) + "," + std::to_string(b) +
                  ") not found in any triangle");
}

Vec2 outward_edge_normal(const Mesh2D& mesh, int from, int to) {
  const Vec2 d = mesh.vertices[to] - mesh.vertices[from];
  const double len = d.norm();
  if (len == 0.0)
    throw MeshError("degenerate boundary edge (" + std::to_string(from) + "," + std::to_string(to) + ")");
  return Vec2(d.y(), -d.x()) / len;
}

}  // namespace

double boundary_shoelace_area(const Mesh2D& mesh) {
  double twice_area = 0.0;
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    const auto [from, to] = oriented_boundary_edge(mesh, be.a, be.b);
    const Vec2& p = mesh.vertices[from];
    const Vec2& q = mesh.vertices[to];
    twice_area += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice_area;
}

CurveMesh extract_curve(const Mesh2D& mesh) {
  std::map<int, std::vector<int>> adjacency;  // node -> neighbors along Gamma3
  int n_edges = 0;
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    if (be.label != BoundaryLabel::Gamma3) continue;
    adjacency[be.a].push_back(be.b);
    adjacency[be.b].push_back(be.a);
    ++n_edges;
  }
  if (n_edges == 0) throw MeshError("Gamma3 not a single chain: no G3 edges");

  std::vector<int> endpoints;
  for (const auto& [node, nbrs] : adjacency) {
    if (nbrs.size() > 2) throw MeshError("Gamma3 not a single chain: branching at node " + std::to_string(node));
    if (nbrs.size() == 1) endpoints.push_back(node);
  }

  CurveMesh curve;
  curve.closed = endpoints.empty();
  if (!curve.closed && endpoints.size() != 2)
    throw MeshError("Gamma3 not a single chain: " + std::to_string(endpoints.size()) + " endpoints");

  int start;
  if (curve.closed) {
    start = adjacency.begin()->first;
  } else {
    start = *std::min_element(endpoints.begin(), endpoints.end());
  }

  curve.node_ids.push_back(start);
  int prev = -1, current = start;
  while (true) {
    const auto& nbrs = adjacency.at(current);
    int next = -1;
    for (int n : nbrs)
      if (n != prev) {
        // Deterministic direction at the start of a closed curve.
        if (next == -1 || n < next) next = n;
      }
    if (next == -1) break;  // open curve end
    if (next == start && curve.closed) break;
    prev = current;
    current = next;
    curve.node_ids.push_back(current);
  }

  const std::size_t expected_nodes = curve.closed ? n_edges : n_edges + 1;
  if (curve.node_ids.size() != expected_nodes)
    throw MeshError("Gamma3 not a single chain: disconnected pieces");

  const int n = curve.node_count();
  curve.arc_length = Vec::Zero(n);
  for (int i = 1; i < n; ++i) {
    const double seg = (mesh.vertices[curve.node_ids[i]] - mesh.vertices[curve.node_ids[i - 1]]).norm();
    if (seg == 0.0) throw MeshError("degenerate Gamma3 edge at curve node " + std::to_string(i));
    curve.arc_length[i] = curve.arc_length[i - 1] + seg;
  }

  if (curve.closed) {
    curve.closing_length =
        (mesh.vertices[curve.node_ids[0]] - mesh.vertices[curve.node_ids[n - 1]]).norm();
    if (curve.closing_length == 0.0) throw MeshError("degenerate Gamma3 closing edge");
  }

  curve.endpoint_flag.assign(n, false);
  if (!curve.closed) {
    curve.endpoint_flag.front() = true;
    curve.endpoint_flag.back() = true;
  }
  return curve;
}

BoundaryFrame boundary_frame(const Mesh2D& mesh, const CurveMesh& curve) {
  const int n = curve.node_count();
  BoundaryFrame frame;
  frame.normal.resize(n);
  frame.tangent.resize(n);

  // Outward normal of the Gamma3 segment between curve positions i and i+1.
  auto segment_normal = [&](int i, int j) {
    const auto [from, to] = oriented_boundary_edge(mesh, curve.node_ids[i], curve.node_ids[j]);
    return outward_edge_normal(mesh, from, to);
  };

  for (int i = 0; i < n; ++i) {
    Vec2 sum = Vec2::Zero();
    if (curve.closed) {
      const int before = (i + n - 1) % n;
      const int after = (i + 1) % n;
      sum = segment_normal(before, i) + segment_normal(i, after);
    } else {
      if (i > 0) sum += segment_normal(i - 1, i);
      if (i < n - 1) sum += segment_normal(i, i + 1);
    }
    const double len = sum.norm();
    if (len < 1e-14)
      throw MeshError("cannot average opposing edge normals at curve node " + std::to_string(i));
    frame.normal[i] = sum / len;
    // Rotate by -90 degrees: (x,y) -> (y,-x).
    frame.tangent[i] = Vec2(frame.normal[i].y(), -frame.normal[i].x());
  }
  return frame;
}

NormalTangential split_normal_tangential(const Vec2& v, const Vec2& normal, const Vec2& tangent) {
  return {v.dot(normal), v.dot(tangent)};
}

}  // namespace contactsim
