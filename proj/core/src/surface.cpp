#include "conformax/surface.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "conformax/errors.hpp"

namespace conformax {

namespace {

double wrap_delta(double d, double period) {
  // shortest signed displacement between periodic images
  d = std::fmod(d, period);
  if (d > 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

double wrap_coord(double x, double period) {
  x = std::fmod(x, period);
  if (x < 0.0) x += period;
  return x;
}

double triangle_area_from_corners(const std::array<Vec3, 3>& c) {
  return 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
}

}  // namespace

std::array<Vec3, 3> TriangleMesh::triangle_corners(Index t) const {
  std::array<Vec3, 3> c;
  c[0] = vertices.row(triangles(t, 0));
  if (kind == SurfaceKind::RoundSphere) {
    c[1] = vertices.row(triangles(t, 1));
    c[2] = vertices.row(triangles(t, 2));
    return c;
  }
  for (int i = 1; i < 3; ++i) {
    Vec3 p = vertices.row(triangles(t, i));
    c[i] = Vec3(c[0].x() + wrap_delta(p.x() - c[0].x(), width),
                c[0].y() + wrap_delta(p.y() - c[0].y(), height), 0.0);
  }
  return c;
}

double TriangleMesh::geodesic_distance(Index a, Index b) const {
  return geodesic_distance_to_point(vertices.row(a), b);
}

double TriangleMesh::geodesic_distance_to_point(const Vec3& p, Index v) const {
  Vec3 q = vertices.row(v);
  if (kind == SurfaceKind::RoundSphere) {
    const Vec3 pn = p / p.norm(), qn = q / q.norm();
    return radius * std::atan2(pn.cross(qn).norm(), pn.dot(qn));
  }
  const double dx = wrap_delta(q.x() - p.x(), width);
  const double dy = wrap_delta(q.y() - p.y(), height);
  return std::hypot(dx, dy);
}

double TriangleMesh::ball_radius_limit() const {
  if (kind == SurfaceKind::RoundSphere) return std::numbers::pi * radius;
  return 0.5 * std::min(width, height);
}

int TriangleMesh::euler_characteristic() const {
  std::set<std::pair<Index, Index>> edges;
  for (Index t = 0; t < triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      Index a = triangles(t, e), b = triangles(t, (e + 1) % 3);
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return vertex_count() - static_cast<int>(edges.size()) + triangle_count();
}

VecX TriangleMesh::vertex_area_weights() const {
  VecX w = VecX::Zero(vertex_count());
  for (Index t = 0; t < triangle_count(); ++t) {
    const double third = triangle_areas[t] / 3.0;
    for (int i = 0; i < 3; ++i) w[triangles(t, i)] += third;
  }
  return w;
}

double TriangleMesh::mean_edge_length() const {
  std::set<std::pair<Index, Index>> seen;
  double sum = 0.0;
  for (Index t = 0; t < triangle_count(); ++t) {
    const auto c = triangle_corners(t);
    for (int e = 0; e < 3; ++e) {
      Index a = triangles(t, e), b = triangles(t, (e + 1) % 3);
      if (seen.insert({std::min(a, b), std::max(a, b)}).second) {
        sum += (c[(e + 1) % 3] - c[e]).norm();
      }
    }
  }
  return seen.empty() ? 0.0 : sum / static_cast<double>(seen.size());
}

bool TriangleMesh::is_boundary_vertex(Index v) const {
  return std::binary_search(boundary_vertices.begin(), boundary_vertices.end(), v);
}

void TriangleMesh::refresh_areas() {
  triangle_areas.resize(triangle_count());
  for (Index t = 0; t < triangle_count(); ++t) {
    triangle_areas[t] = triangle_area_from_corners(triangle_corners(t));
  }
}

TriangleMesh build_sphere_mesh(int subdivision_level) {
  if (subdivision_level < 0) {
    throw ConfigurationError("subdivision level must be nonnegative");
  }
  if (subdivision_level > kMaxSubdivisionLevel) {
    std::ostringstream msg;
    msg << "subdivision level " << subdivision_level << " exceeds cap "
        << kMaxSubdivisionLevel;
    throw CapacityError(msg.str());
  }

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<Index, 3>> faces = {
      {0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivision_level; ++level) {
    std::map<std::pair<Index, Index>, Index> midpoint;
    auto mid = [&](Index a, Index b) -> Index {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      const Index id = static_cast<Index>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<Index, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const Index ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriangleMesh mesh;
  mesh.kind = SurfaceKind::RoundSphere;
  mesh.radius = 1.0;
  mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (Index v = 0; v < mesh.vertex_count(); ++v) mesh.vertices.row(v) = verts[v];
  mesh.triangles.resize(static_cast<Index>(faces.size()), 3);
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    // outward orientation: flip if the face normal points inward
    const Vec3 a = verts[faces[t][0]], b = verts[faces[t][1]], c = verts[faces[t][2]];
    if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(faces[t][1], faces[t][2]);
    for (int i = 0; i < 3; ++i) mesh.triangles(t, i) = faces[t][i];
  }
  mesh.refresh_areas();
  return mesh;
}

TriangleMesh build_torus_mesh(int nx, int ny, double width, double height) {
  if (nx < 3 || ny < 3) {
    throw DegenerateMeshError("torus grid needs nx, ny >= 3");
  }
  if (width <= 0.0 || height <= 0.0) {
    throw DegenerateMeshError("torus dimensions must be positive");
  }

  TriangleMesh mesh;
  mesh.kind = SurfaceKind::FlatTorus;
  mesh.width = width;
  mesh.height = height;
  mesh.vertices.resize(static_cast<Index>(nx) * ny, 3);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.vertices.row(j * nx + i) =
          Vec3(width * i / nx, height * j / ny, 0.0);
    }
  }
  mesh.triangles.resize(2 * static_cast<Index>(nx) * ny, 3);
  Index t = 0;
  auto vid = [&](int i, int j) { return static_cast<Index>(((j + ny) % ny) * nx + (i + nx) % nx); };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Index v00 = vid(i, j), v10 = vid(i + 1, j);
      const Index v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.row(t++) << v00, v10, v11;
      mesh.triangles.row(t++) << v00, v11, v01;
    }
  }
  mesh.refresh_areas();
  return mesh;
}

std::vector<Index> vertices_within(const TriangleMesh& mesh, Index center,
                                   double radius) {
  std::vector<Index> inside;
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    if (mesh.geodesic_distance(center, v) <= radius) inside.push_back(v);
  }
  return inside;
}

namespace {

// Snap a submesh boundary vertex onto the geodesic circle of the given
// radius around the center, moving it along the geodesic through the vertex.
Vec3 snap_to_circle(const TriangleMesh& parent, Index center, const Vec3& p,
                    double radius) {
  const Vec3 c = parent.vertices.row(center);
  if (parent.kind == SurfaceKind::RoundSphere) {
    Vec3 tangent = p - p.dot(c) / c.squaredNorm() * c;
    const double tn = tangent.norm();
    if (tn < 1e-14) return p;  // antipodal or coincident; leave in place
    tangent /= tn;
    const double ang = radius / parent.radius;
    return parent.radius * (std::cos(ang) * c.normalized() + std::sin(ang) * tangent);
  }
  Vec3 d(wrap_delta(p.x() - c.x(), parent.width),
         wrap_delta(p.y() - c.y(), parent.height), 0.0);
  const double dn = d.norm();
  if (dn < 1e-14) return p;
  const Vec3 q = c + (radius / dn) * d;
  return Vec3(wrap_coord(q.x(), parent.width), wrap_coord(q.y(), parent.height), 0.0);
}

}  // namespace

Submesh geodesic_ball(const TriangleMesh& mesh, Index center, double radius) {
  if (center < 0 || center >= mesh.vertex_count()) {
    throw ConfigurationError("geodesic_ball: center vertex out of range");
  }
  if (radius <= 0.0 || radius >= mesh.ball_radius_limit()) {
    std::ostringstream msg;
    msg << "geodesic_ball: radius " << radius << " outside (0, "
        << mesh.ball_radius_limit() << ")";
    throw DegenerateBallError(msg.str());
  }

  std::vector<char> in(mesh.vertex_count(), 0);
  for (Index v : vertices_within(mesh, center, radius)) in[v] = 1;

  std::vector<Index> tris;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    if (in[mesh.triangles(t, 0)] && in[mesh.triangles(t, 1)] &&
        in[mesh.triangles(t, 2)]) {
      tris.push_back(t);
    }
  }
  if (tris.empty()) {
    throw DegenerateBallError("geodesic_ball: no triangle fits inside the radius");
  }

  std::vector<Index> local(mesh.vertex_count(), -1);
  Submesh sub;
  sub.center_parent = center;
  sub.radius = radius;
  sub.mesh.kind = mesh.kind;
  sub.mesh.radius = mesh.radius;
  sub.mesh.width = mesh.width;
  sub.mesh.height = mesh.height;

  for (Index t : tris) {
    for (int i = 0; i < 3; ++i) {
      const Index v = mesh.triangles(t, i);
      if (local[v] < 0) {
        local[v] = static_cast<Index>(sub.parent_vertex.size());
        sub.parent_vertex.push_back(v);
      }
    }
  }
  sub.mesh.vertices.resize(static_cast<Index>(sub.parent_vertex.size()), 3);
  for (Index v = 0; v < sub.mesh.vertex_count(); ++v) {
    sub.mesh.vertices.row(v) = mesh.vertices.row(sub.parent_vertex[v]);
  }
  sub.mesh.triangles.resize(static_cast<Index>(tris.size()), 3);
  for (Index t = 0; t < sub.mesh.triangle_count(); ++t) {
    for (int i = 0; i < 3; ++i) {
      sub.mesh.triangles(t, i) = local[mesh.triangles(tris[t], i)];
    }
  }

  // topological boundary of the patch: vertices on edges seen by one triangle
  std::map<std::pair<Index, Index>, int> edge_count;
  for (Index t = 0; t < sub.mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      Index a = sub.mesh.triangles(t, e), b = sub.mesh.triangles(t, (e + 1) % 3);
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::set<Index> boundary;
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      boundary.insert(edge.first);
      boundary.insert(edge.second);
    }
  }
  sub.mesh.boundary_vertices.assign(boundary.begin(), boundary.end());
  if (sub.interior_count() <= 0) {
    throw DegenerateBallError("geodesic_ball: ball has no interior vertices");
  }

  for (Index v : sub.mesh.boundary_vertices) {
    sub.mesh.vertices.row(v) =
        snap_to_circle(mesh, center, Vec3(sub.mesh.vertices.row(v)), radius);
  }
  sub.mesh.refresh_areas();
  for (Index t = 0; t < sub.mesh.triangle_count(); ++t) {
    if (!(sub.mesh.triangle_areas[t] > 0.0)) {
      throw DegenerateBallError("geodesic_ball: boundary snap degenerated a triangle");
    }
  }
  return sub;
}

Submesh whole_mesh_submesh(const TriangleMesh& mesh) {
  Submesh sub;
  sub.mesh = mesh;
  sub.mesh.boundary_vertices.clear();
  sub.parent_vertex.resize(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) sub.parent_vertex[v] = v;
  return sub;
}

void validate_mesh(const TriangleMesh& mesh) {
  if (mesh.triangle_areas.size() != mesh.triangle_count()) {
    throw DegenerateMeshError("triangle_areas out of sync with triangles");
  }
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    if (!(mesh.triangle_areas[t] > 0.0)) {
      std::ostringstream msg;
      msg << "triangle " << t << " has nonpositive area " << mesh.triangle_areas[t];
      throw DegenerateMeshError(msg.str());
    }
  }
  // edge-manifold and consistently oriented: every directed edge at most
  // once, every undirected edge in at most two triangles
  std::set<std::pair<Index, Index>> directed;
  std::map<std::pair<Index, Index>, int> undirected;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      Index a = mesh.triangles(t, e), b = mesh.triangles(t, (e + 1) % 3);
      if (a == b) throw DegenerateMeshError("triangle with repeated vertex");
      if (!directed.insert({a, b}).second) {
        throw DegenerateMeshError("inconsistent orientation: repeated directed edge");
      }
      ++undirected[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [edge, count] : undirected) {
    if (count > 2) throw DegenerateMeshError("non-manifold edge");
  }
}

void write_off(const TriangleMesh& mesh, std::ostream& out) {
  out << "OFF\n";
  out << mesh.vertex_count() << ' ' << mesh.triangle_count() << " 0\n";
  const auto flags = out.flags();
  out.precision(17);
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    out << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' '
        << mesh.vertices(v, 2) << '\n';
  }
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    out << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' '
        << mesh.triangles(t, 2) << '\n';
  }
  out.flags(flags);
}

void write_off(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_off(mesh, out);
}

}  // namespace conformax
