#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace conformax {

using Index = std::int32_t;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using MatX3i = Eigen::Matrix<Index, Eigen::Dynamic, 3, Eigen::RowMajor>;

enum class SurfaceKind { RoundSphere, FlatTorus };

/// Triangle mesh over one of the two supported background geometries.
///
/// Sphere vertices are embedded 3D points on the sphere of the given radius.
/// Torus vertices live in the fundamental domain [0,width) x [0,height)
/// (stored with z = 0) with periodic identification; triangles that wrap
/// around are handled by unwrapping corners to the nearest periodic image.
struct TriangleMesh {
  SurfaceKind kind = SurfaceKind::RoundSphere;
  double radius = 1.0;  ///< sphere radius (RoundSphere only)
  double width = 0.0;   ///< fundamental domain width (FlatTorus only)
  double height = 0.0;  ///< fundamental domain height (FlatTorus only)

  MatX3 vertices;
  MatX3i triangles;
  VecX triangle_areas;
  std::vector<Index> boundary_vertices;  ///< sorted; nonempty only for submeshes

  Index vertex_count() const { return static_cast<Index>(vertices.rows()); }
  Index triangle_count() const { return static_cast<Index>(triangles.rows()); }
  double total_area() const { return triangle_areas.sum(); }

  /// Corner positions of triangle t, unwrapped to a common periodic image on
  /// the torus so edge vectors and areas are geometrically meaningful.
  std::array<Vec3, 3> triangle_corners(Index t) const;

  /// Closed-form geodesic distance (great-circle on the sphere, shortest
  /// periodic image on the torus). Never graph distance.
  double geodesic_distance(Index a, Index b) const;
  double geodesic_distance_to_point(const Vec3& p, Index v) const;

  /// Largest admissible geodesic-ball radius: pi*r on the sphere,
  /// min(width,height)/2 on the torus.
  double ball_radius_limit() const;

  int euler_characteristic() const;

  /// Lumped vertex measure: each vertex carries one third of the area of its
  /// adjacent triangles.
  VecX vertex_area_weights() const;

  double mean_edge_length() const;
  bool is_boundary_vertex(Index v) const;

  /// Recompute triangle_areas from current vertex positions.
  void refresh_areas();
};

/// Icosahedron subdivided `subdivision_level` times, vertices projected to
/// the sphere of radius 1. V = 10*4^level + 2. Levels above
/// kMaxSubdivisionLevel raise CapacityError.
inline constexpr int kMaxSubdivisionLevel = 8;
TriangleMesh build_sphere_mesh(int subdivision_level);

/// Regular nx-by-ny grid on the flat torus, each cell split into two
/// triangles. Requires nx, ny >= 3.
TriangleMesh build_torus_mesh(int nx, int ny, double width, double height);

/// Submesh extracted from a parent mesh. Vertex v of `mesh` corresponds to
/// vertex parent_vertex[v] of the parent, so fields and eigenvectors can be
/// restricted and prolonged without interpolation.
struct Submesh {
  TriangleMesh mesh;
  std::vector<Index> parent_vertex;
  Index center_parent = -1;
  double radius = 0.0;

  Index interior_count() const {
    return mesh.vertex_count() - static_cast<Index>(mesh.boundary_vertices.size());
  }
};

/// Triangles whose three vertices all lie within geodesic distance `radius`
/// of the center vertex, with the topological boundary of the extracted
/// patch marked. Boundary vertices are snapped onto the geodesic circle of
/// distance exactly `radius` so the Dirichlet boundary tracks the true ball
/// instead of the staircase of included vertices.
Submesh geodesic_ball(const TriangleMesh& mesh, Index center, double radius);

/// The whole closed mesh wrapped as a Submesh with empty boundary
/// (identity restriction).
Submesh whole_mesh_submesh(const TriangleMesh& mesh);

/// Vertices within geodesic distance `radius` of the center vertex.
std::vector<Index> vertices_within(const TriangleMesh& mesh, Index center,
                                   double radius);

/// Structural validation: positive areas, edge-manifold, consistent
/// orientation. Throws DegenerateMeshError with a description on failure.
void validate_mesh(const TriangleMesh& mesh);

/// ASCII OFF export (header "OFF", counts line, vertex lines, face lines).
void write_off(const TriangleMesh& mesh, std::ostream& out);
void write_off(const TriangleMesh& mesh, const std::string& path);

}  // namespace conformax
