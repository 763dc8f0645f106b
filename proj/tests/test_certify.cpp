#include <doctest.h>

#include <cmath>
#include <numbers>

#include <gsl/gsl_sf_bessel.h>

#include "conformax/assembly.hpp"
#include "conformax/certify.hpp"
#include "conformax/eigensolver.hpp"
#include "conformax/surface.hpp"

using namespace conformax;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("sphere spectrum closed form") {
  const auto entries = sphere_spectrum(2);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].value == 0.0);
  CHECK(entries[0].multiplicity == 1);
  CHECK(entries[1].value == 2.0);
  CHECK(entries[1].multiplicity == 3);
  CHECK(entries[1].normalized == doctest::Approx(8.0 * kPi));
  CHECK(entries[2].value == 6.0);
  CHECK(entries[2].multiplicity == 5);
}

TEST_CASE("torus spectrum lattice values and multiplicities") {
  const auto unit = torus_spectrum(1.0, 1.0, 3);
  REQUIRE(unit.size() == 3);
  CHECK(unit[0].value == 0.0);
  CHECK(unit[0].multiplicity == 1);
  CHECK(unit[1].value == doctest::Approx(4.0 * kPi * kPi));
  CHECK(unit[1].multiplicity == 4);
  CHECK(unit[2].value == doctest::Approx(8.0 * kPi * kPi));
  CHECK(unit[2].multiplicity == 4);

  const auto rect = torus_spectrum(2.0, 1.0, 2);
  CHECK(rect[1].value == doctest::Approx(kPi * kPi));
  CHECK(rect[1].multiplicity == 2);
}

TEST_CASE("bessel zeros agree with the GSL zero tables to 1e-10") {
  CHECK(std::abs(bessel_zero(0, 1) - gsl_sf_bessel_zero_J0(1)) < 1e-10);
  CHECK(std::abs(bessel_zero(0, 3) - gsl_sf_bessel_zero_J0(3)) < 1e-10);
  CHECK(std::abs(bessel_zero(1, 1) - gsl_sf_bessel_zero_J1(1)) < 1e-10);
  CHECK(std::abs(bessel_zero(4, 2) - gsl_sf_bessel_zero_Jnu(4.0, 2)) < 1e-9);
}

TEST_CASE("disk Dirichlet spectrum from Bessel roots") {
  const auto values = disk_dirichlet_spectrum(1.0, 3);
  REQUIRE(values.size() == 3);
  CHECK(values[0] == doctest::Approx(5.783186).epsilon(1e-5));
  CHECK(values[1] == doctest::Approx(14.68197).epsilon(1e-4));
  CHECK(values[2] == doctest::Approx(values[1]).epsilon(1e-12));

  const auto scaled = disk_dirichlet_spectrum(2.0, 1);
  CHECK(scaled[0] == doctest::Approx(values[0] / 4.0).epsilon(1e-12));
}

TEST_CASE("FEM sphere eigenvalues converge at second order to the oracle") {
  std::vector<double> errors;
  for (int level : {2, 3, 4}) {
    const TriangleMesh mesh = build_sphere_mesh(level);
    const StiffnessForm stiffness = assemble_stiffness(mesh);
    const MassForm mass = assemble_mass(mesh, uniform_density(mesh, 0.0, 4.0));
    SolverOptions options;
    options.count = 4;
    options.tol = 1e-11;
    const SpectralResult result = solve_smallest(stiffness, mass, options);
    double err = 0.0;
    for (int i = 1; i <= 3; ++i) {
      err += std::abs(result.eigenvalues[i] - 8.0 * kPi);
    }
    errors.push_back(err / 3.0);
  }
  const double rate21 = errors[0] / errors[1];
  const double rate32 = errors[1] / errors[2];
  CHECK(rate21 > 3.5);
  CHECK(rate21 < 4.5);
  CHECK(rate32 > 3.5);
  CHECK(rate32 < 4.5);
}

TEST_CASE("certificate on the round sphere recovers the coordinate family") {
  const TriangleMesh mesh = build_sphere_mesh(4);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const VecX weights = mesh.vertex_area_weights();
  const MassForm mass = assemble_mass(mesh, uniform_density(mesh, 0.0, 4.0));
  SolverOptions options;
  options.count = 4;
  options.tol = 1e-10;
  const SpectralResult result = solve_smallest(stiffness, mass, options);
  const auto group = result.group_containing(1);
  REQUIRE(group.second - group.first == 3);

  std::vector<Index> support(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) support[v] = v;
  const HarmonicMapCertificate cert =
      harmonic_map_certificate(stiffness, result, group, support, weights, 0.05);
  CHECK(cert.ell == 3);
  CHECK(cert.valid);
  CHECK(cert.sphere_defect < 0.03);
  // energy identity: sum of Dirichlet energies ~ lambda * regular mass (= 1)
  CHECK(std::abs(cert.dirichlet_energy - result.eigenvalues[1]) /
            result.eigenvalues[1] <
        0.05);
}

TEST_CASE("certificate is invariant under a rotation of the input basis") {
  const TriangleMesh mesh = build_sphere_mesh(3);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const VecX weights = mesh.vertex_area_weights();
  const MassForm mass = assemble_mass(mesh, uniform_density(mesh, 0.0, 4.0));
  SolverOptions options;
  options.count = 4;
  options.tol = 1e-10;
  SpectralResult result = solve_smallest(stiffness, mass, options);
  const auto group = result.group_containing(1);
  REQUIRE(group.second - group.first == 3);

  std::vector<Index> support(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) support[v] = v;
  const HarmonicMapCertificate base =
      harmonic_map_certificate(stiffness, result, group, support, weights, 0.05);

  // rotate the eigenbasis by an orthogonal matrix
  Eigen::Matrix3d rot;
  const double c = std::cos(0.7), s = std::sin(0.7);
  rot << c, -s, 0, s, c, 0, 0, 0, 1;
  result.eigenvectors.middleCols(group.first, 3) =
      (result.eigenvectors.middleCols(group.first, 3) * rot).eval();
  const HarmonicMapCertificate rotated =
      harmonic_map_certificate(stiffness, result, group, support, weights, 0.05);
  CHECK(std::abs(base.sphere_defect - rotated.sphere_defect) < 1e-10);
}

TEST_CASE("a single sign-changing eigenvector cannot certify a sphere map") {
  const TriangleMesh mesh = build_torus_mesh(24, 24, 1.0, 1.0);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const VecX weights = mesh.vertex_area_weights();

  // symmetry-broken density to isolate a simple eigenvalue
  DensityField density = uniform_density(mesh, 0.0, 8.0);
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    density.values[v] *= 1.0 + 0.3 * std::sin(2.0 * kPi * mesh.vertices(v, 0)) +
                         0.17 * std::cos(2.0 * kPi * mesh.vertices(v, 1));
  }
  SolverOptions options;
  options.count = 3;
  options.tol = 1e-10;
  const SpectralResult result =
      solve_smallest(stiffness, assemble_mass(mesh, density), options);
  const auto group = result.group_containing(1);
  if (group.second - group.first == 1) {
    std::vector<Index> support(mesh.vertex_count());
    for (Index v = 0; v < mesh.vertex_count(); ++v) support[v] = v;
    const HarmonicMapCertificate cert = harmonic_map_certificate(
        stiffness, result, group, support, weights, 0.05);
    CHECK_FALSE(cert.valid);
    CHECK(cert.sphere_defect > 0.5);
  }
}

TEST_CASE("torus first eigenspace certifies a map into the 3-sphere") {
  const TriangleMesh mesh = build_torus_mesh(48, 48, 1.0, 1.0);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const VecX weights = mesh.vertex_area_weights();
  const MassForm mass = assemble_mass(mesh, uniform_density(mesh, 0.0, 8.0));
  SolverOptions options;
  options.count = 6;
  options.tol = 1e-10;
  const SpectralResult result = solve_smallest(stiffness, mass, options);
  const auto group = result.group_containing(1);
  REQUIRE(group.second - group.first == 4);

  std::vector<Index> support(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) support[v] = v;
  const HarmonicMapCertificate cert =
      harmonic_map_certificate(stiffness, result, group, support, weights, 0.05);
  CHECK(cert.ell <= 4);
  CHECK(cert.sphere_defect < 1e-2);
}
