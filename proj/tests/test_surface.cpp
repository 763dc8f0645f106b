#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "conformax/errors.hpp"
#include "conformax/surface.hpp"

using namespace conformax;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<int> vertex_valences(const TriangleMesh& mesh) {
  std::set<std::pair<Index, Index>> edges;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      Index a = mesh.triangles(t, e), b = mesh.triangles(t, (e + 1) % 3);
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  std::vector<int> valence(mesh.vertex_count(), 0);
  for (const auto& [a, b] : edges) {
    ++valence[a];
    ++valence[b];
  }
  return valence;
}
}  // namespace

TEST_CASE("icosahedron combinatorics") {
  const TriangleMesh mesh = build_sphere_mesh(0);
  CHECK(mesh.vertex_count() == 12);
  CHECK(mesh.triangle_count() == 20);
  CHECK(mesh.euler_characteristic() == 2);
  validate_mesh(mesh);
}

TEST_CASE("icosphere vertex and face counts follow the subdivision recurrence") {
  const TriangleMesh mesh = build_sphere_mesh(2);
  CHECK(mesh.vertex_count() == 162);
  CHECK(mesh.triangle_count() == 320);
  CHECK(mesh.euler_characteristic() == 2);
}

TEST_CASE("level-3 icosphere area is within 0.2% of 4*pi") {
  const TriangleMesh mesh = build_sphere_mesh(3);
  CHECK(std::abs(mesh.total_area() - 4.0 * kPi) / (4.0 * kPi) < 0.002);
}

TEST_CASE("sphere mesh area converges monotonically toward 4*pi") {
  double previous = 0.0;
  for (int level = 0; level <= 4; ++level) {
    const double area = build_sphere_mesh(level).total_area();
    CHECK(area > previous);
    CHECK(area < 4.0 * kPi);
    previous = area;
  }
  const double err1 = 4.0 * kPi - build_sphere_mesh(1).total_area();
  const double err3 = 4.0 * kPi - build_sphere_mesh(3).total_area();
  CHECK(err3 < err1);
}

TEST_CASE("subdivision level above the cap is a capacity error") {
  CHECK_THROWS_AS(build_sphere_mesh(kMaxSubdivisionLevel + 1), CapacityError);
}

TEST_CASE("torus grid combinatorics and area") {
  const TriangleMesh small = build_torus_mesh(4, 4, 1.0, 1.0);
  CHECK(small.vertex_count() == 16);
  CHECK(small.triangle_count() == 32);
  CHECK(small.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  validate_mesh(small);

  const TriangleMesh rect = build_torus_mesh(3, 3, 2.0, 1.0);
  CHECK(rect.total_area() == doctest::Approx(2.0).epsilon(1e-12));

  const TriangleMesh fine = build_torus_mesh(64, 64, 1.0, 1.0);
  CHECK(fine.euler_characteristic() == 0);
}

TEST_CASE("degenerate torus grids are rejected") {
  CHECK_THROWS_AS(build_torus_mesh(2, 4, 1.0, 1.0), DegenerateMeshError);
  CHECK_THROWS_AS(build_torus_mesh(4, 2, 1.0, 1.0), DegenerateMeshError);
}

TEST_CASE("vertex valence: exactly 6 on the torus, 5 or 6 on the icosphere") {
  for (int v : vertex_valences(build_torus_mesh(8, 8, 1.0, 1.0))) {
    CHECK(v == 6);
  }
  int fives = 0;
  for (int v : vertex_valences(build_sphere_mesh(3))) {
    CHECK((v == 5 || v == 6));
    if (v == 5) ++fives;
  }
  CHECK(fives == 12);
}

TEST_CASE("geodesic ball radius preconditions") {
  const TriangleMesh sphere = build_sphere_mesh(3);
  CHECK_THROWS_AS(geodesic_ball(sphere, 0, kPi), DegenerateBallError);
  CHECK_THROWS_AS(geodesic_ball(sphere, 0, 4.0), DegenerateBallError);
  const TriangleMesh torus = build_torus_mesh(16, 16, 1.0, 1.0);
  CHECK_THROWS_AS(geodesic_ball(torus, 0, 0.5), DegenerateBallError);
  // radius below the local edge length leaves no triangle
  CHECK_THROWS_AS(geodesic_ball(torus, 0, 0.01), DegenerateBallError);
}

TEST_CASE("spherical cap area matches the closed form within 5%") {
  const TriangleMesh sphere = build_sphere_mesh(5);
  const Submesh cap = geodesic_ball(sphere, 17, 0.5);
  const double expected = 2.0 * kPi * (1.0 - std::cos(0.5));
  CHECK(std::abs(cap.mesh.total_area() - expected) / expected < 0.05);
  CHECK_FALSE(cap.mesh.boundary_vertices.empty());
  validate_mesh(cap.mesh);
}

TEST_CASE("flat ball area on the torus matches the disk within 5%") {
  const TriangleMesh torus = build_torus_mesh(64, 64, 1.0, 1.0);
  const Submesh ball = geodesic_ball(torus, 0, 0.2);
  const double expected = kPi * 0.04;
  CHECK(std::abs(ball.mesh.total_area() - expected) / expected < 0.05);
  CHECK(ball.interior_count() > 0);
}

TEST_CASE("ball submesh keeps parent vertex indices") {
  const TriangleMesh torus = build_torus_mesh(32, 32, 1.0, 1.0);
  const Index center = 5 + 7 * 32;
  const Submesh ball = geodesic_ball(torus, center, 0.25);
  bool found_center = false;
  for (Index v = 0; v < ball.mesh.vertex_count(); ++v) {
    const Index parent = ball.parent_vertex[v];
    CHECK(parent >= 0);
    CHECK(parent < torus.vertex_count());
    if (parent == center) found_center = true;
  }
  CHECK(found_center);
  // interior vertices are untouched copies of the parent positions
  for (Index v = 0; v < ball.mesh.vertex_count(); ++v) {
    if (ball.mesh.is_boundary_vertex(v)) continue;
    CHECK(ball.mesh.vertices.row(v) == torus.vertices.row(ball.parent_vertex[v]));
  }
}

TEST_CASE("ball boundary vertices sit on the requested geodesic circle") {
  const TriangleMesh sphere = build_sphere_mesh(4);
  const double radius = 0.6;
  const Submesh ball = geodesic_ball(sphere, 100, radius);
  for (Index v : ball.mesh.boundary_vertices) {
    const Vec3 p = ball.mesh.vertices.row(v);
    const double d = sphere.geodesic_distance_to_point(p, 100);
    CHECK(d == doctest::Approx(radius).epsilon(1e-9));
  }
}

TEST_CASE("geodesic distance uses the shortest periodic image") {
  const TriangleMesh torus = build_torus_mesh(10, 10, 1.0, 1.0);
  // vertices (0,0) and (9,0) are one cell apart across the seam
  CHECK(torus.geodesic_distance(0, 9) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("OFF export format") {
  const TriangleMesh mesh = build_sphere_mesh(0);
  std::ostringstream out;
  write_off(mesh, out);
  std::istringstream in(out.str());
  std::string header;
  int v = 0, f = 0, e = 0;
  in >> header >> v >> f >> e;
  CHECK(header == "OFF");
  CHECK(v == 12);
  CHECK(f == 20);
  int lines = 0;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == 32);
}
