#include <Eigen/Geometry>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "conformax/assembly.hpp"
#include "conformax/errors.hpp"
#include "conformax/surface.hpp"

using namespace conformax;

namespace {
constexpr double kPi = std::numbers::pi;

// independent cotangent recomputation, triangle by triangle
double reference_energy(const TriangleMesh& mesh, const VecX& u) {
  double energy = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto c = mesh.triangle_corners(t);
    for (int e = 0; e < 3; ++e) {
      const Index i = mesh.triangles(t, (e + 1) % 3);
      const Index j = mesh.triangles(t, (e + 2) % 3);
      const Vec3 a = c[(e + 1) % 3] - c[e];
      const Vec3 b = c[(e + 2) % 3] - c[e];
      const double cot = a.dot(b) / a.cross(b).norm();
      energy += 0.5 * cot * (u[i] - u[j]) * (u[i] - u[j]);
    }
  }
  return energy;
}
}  // namespace

TEST_CASE("constants are in the stiffness kernel and row sums vanish") {
  const TriangleMesh mesh = build_sphere_mesh(2);
  const StiffnessForm form = assemble_stiffness(mesh);
  const VecX ones = VecX::Ones(mesh.vertex_count());
  CHECK(std::abs(form.quadratic(ones)) < 1e-10);
  const VecX row_sums = form.matrix * ones;
  const double scale = form.matrix.coeffs().cwiseAbs().maxCoeff();
  CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("Dirichlet energy of the z coordinate on the sphere") {
  const TriangleMesh mesh = build_sphere_mesh(4);
  const StiffnessForm form = assemble_stiffness(mesh);
  const VecX z = mesh.vertices.col(2);
  const double expected = 8.0 * kPi / 3.0;
  CHECK(std::abs(form.quadratic(z) - expected) / expected < 0.01);
}

TEST_CASE("Dirichlet energy of sin(2*pi*x) on the unit torus") {
  const TriangleMesh mesh = build_torus_mesh(64, 64, 1.0, 1.0);
  VecX u(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    u[v] = std::sin(2.0 * kPi * mesh.vertices(v, 0));
  }
  const StiffnessForm form = assemble_stiffness(mesh);
  const double expected = 2.0 * kPi * kPi;
  CHECK(std::abs(form.quadratic(u) - expected) / expected < 0.01);
}

TEST_CASE("Galerkin consistency against an independent cotangent recomputation") {
  const TriangleMesh mesh = build_torus_mesh(12, 9, 1.5, 1.0);
  const StiffnessForm form = assemble_stiffness(mesh);
  VecX u(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    u[v] = std::sin(7.0 * v) + 0.3 * std::cos(3.0 * v);
  }
  const double direct = form.quadratic(u);
  const double reference = reference_energy(mesh, u);
  CHECK(std::abs(direct - reference) <= 1e-12 * std::max(1.0, std::abs(reference)));
}

TEST_CASE("stiffness is independent of any density") {
  const TriangleMesh mesh = build_sphere_mesh(2);
  const StiffnessForm a = assemble_stiffness(mesh);
  const StiffnessForm b = assemble_stiffness(mesh);
  CHECK(SpMat(a.matrix - b.matrix).coeffs().cwiseAbs().sum() == 0.0);

  // Rayleigh numerators agree for any vector no matter which density is in play
  VecX u = VecX::LinSpaced(mesh.vertex_count(), -1.0, 2.0);
  DensityField d1 = uniform_density(mesh, 0.0, 4.0);
  DensityField d2 = d1;
  d2.values *= 3.0;
  CHECK(a.quadratic(u) == b.quadratic(u));
  (void)assemble_mass(mesh, d1);
  (void)assemble_mass(mesh, d2);
  CHECK(a.quadratic(u) == b.quadratic(u));
}

TEST_CASE("lumped mass trace equals the density mass") {
  const TriangleMesh mesh = build_torus_mesh(16, 16, 1.0, 1.0);
  SUBCASE("uniform density has unit mass") {
    const MassForm mass = assemble_mass(mesh, uniform_density(mesh, 0.0, 4.0));
    CHECK(mass.trace() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("indicator of half the torus scaled to unit mass") {
    DensityField density;
    density.values = VecX::Zero(mesh.vertex_count());
    density.lower_bound = 0.0;
    density.cap = 4.0;
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
      if (mesh.vertices(v, 0) < 0.5) density.values[v] = 2.0;
    }
    const MassForm mass = assemble_mass(mesh, density);
    CHECK(mass.trace() == doctest::Approx(1.0).epsilon(1e-10));
    const int zeros = (mass.diagonal.array() == 0.0).count();
    CHECK(zeros == mesh.vertex_count() / 2);
  }
}

TEST_CASE("mass is positive semidefinite with kernel on the zero set") {
  const TriangleMesh mesh = build_torus_mesh(8, 8, 1.0, 1.0);
  DensityField density = uniform_density(mesh, 0.0, 4.0);
  density.values[3] = 0.0;
  density.values[17] = 0.0;
  const MassForm mass = assemble_mass(mesh, density);
  CHECK((mass.diagonal.array() >= 0.0).all());
  CHECK(mass.diagonal[3] == 0.0);
  CHECK(mass.diagonal[17] == 0.0);
}

TEST_CASE("whole-mesh restriction is the identity") {
  const TriangleMesh mesh = build_torus_mesh(8, 8, 1.0, 1.0);
  const Submesh whole = whole_mesh_submesh(mesh);
  const DirichletRestriction restriction(whole);
  CHECK(restriction.interior_count() == mesh.vertex_count());
  const StiffnessForm form = assemble_stiffness(mesh);
  const SpMat reduced = restriction.restrict_matrix(form.matrix);
  CHECK(SpMat(reduced - form.matrix).coeffs().cwiseAbs().sum() == 0.0);
}

TEST_CASE("restriction with every vertex on the boundary is rejected") {
  const TriangleMesh mesh = build_torus_mesh(32, 32, 1.0, 1.0);
  Submesh ball = geodesic_ball(mesh, 0, 0.2);
  ball.mesh.boundary_vertices.resize(ball.mesh.vertex_count());
  for (Index v = 0; v < ball.mesh.vertex_count(); ++v) {
    ball.mesh.boundary_vertices[v] = v;
  }
  CHECK_THROWS_AS(DirichletRestriction{ball}, DegenerateDomainError);
}

TEST_CASE("restrict and prolong are inverse on interior vertices") {
  const TriangleMesh mesh = build_torus_mesh(32, 32, 1.0, 1.0);
  const Submesh ball = geodesic_ball(mesh, 40, 0.3);
  const DirichletRestriction restriction(ball);
  VecX full = VecX::LinSpaced(ball.mesh.vertex_count(), 0.0, 1.0);
  const VecX interior = restriction.restrict_values(full);
  const VecX back = restriction.prolong(interior);
  for (Index v = 0; v < ball.mesh.vertex_count(); ++v) {
    if (ball.mesh.is_boundary_vertex(v)) {
      CHECK(back[v] == 0.0);
    } else {
      CHECK(back[v] == full[v]);
    }
  }
}

TEST_CASE("MatrixMarket export is coordinate symmetric format") {
  const TriangleMesh mesh = build_torus_mesh(4, 4, 1.0, 1.0);
  const StiffnessForm form = assemble_stiffness(mesh);
  std::ostringstream out;
  write_matrix_market(form.matrix, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "%%MatrixMarket matrix coordinate real symmetric");
  int rows = 0, cols = 0;
  long nnz = 0;
  in >> rows >> cols >> nnz;
  CHECK(rows == mesh.vertex_count());
  CHECK(cols == mesh.vertex_count());
  long seen = 0;
  int r = 0, c = 0;
  double value = 0.0;
  while (in >> r >> c >> value) {
    CHECK(r >= c);  // lower triangle
    ++seen;
  }
  CHECK(seen == nnz);
}
