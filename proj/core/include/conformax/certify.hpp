#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "conformax/assembly.hpp"
#include "conformax/eigensolver.hpp"

namespace conformax {

/// One reference eigenvalue with its multiplicity.
struct SpectrumEntry {
  double value = 0.0;
  int multiplicity = 1;
};

/// Round unit sphere: lambda = l(l+1), multiplicity 2l+1, for l = 0..l_max.
/// `normalized` carries the unit-mass values lambda * 4*pi.
struct SphereSpectrumEntry {
  int l = 0;
  double value = 0.0;
  double normalized = 0.0;
  int multiplicity = 1;
};
std::vector<SphereSpectrumEntry> sphere_spectrum(int l_max);

/// Flat torus: sorted values 4*pi^2 (p^2/width^2 + q^2/height^2) over integer
/// pairs, with lattice multiplicities, truncated to `count` distinct values.
std::vector<SpectrumEntry> torus_spectrum(double width, double height, int count);

/// Dirichlet spectrum of the flat disk: (j_{m,s}/radius)^2 over Bessel zeros,
/// multiplicity 2 for m >= 1. Returns the `count` smallest eigenvalues
/// expanded by multiplicity.
std::vector<double> disk_dirichlet_spectrum(double radius, int count);

/// s-th positive zero of the Bessel function J_m, by bracketed bisection on
/// the GSL evaluation of J_m, accurate to 1e-10.
double bessel_zero(int m, int s);

/// Sphere-valued map built from an extremal eigenvalue group: a PSD Gram
/// transformation Q of the group basis chosen so the squared norms
/// sum(u_i(x)^2) are as close to 1 as possible on the regular support.
struct HarmonicMapCertificate {
  int ell = 0;                     ///< rank of Q = dimension of the map
  Eigen::MatrixXd coefficients;    ///< ell x group_size; rows map basis -> (u_i)
  double sphere_defect = 0.0;      ///< sup over support of |sum u_i(x)^2 - 1|
  double dirichlet_energy = 0.0;   ///< sum_i u_i^T A u_i
  double tolerance = 0.0;
  bool valid = false;              ///< sphere_defect < tolerance
};

HarmonicMapCertificate harmonic_map_certificate(
    const StiffnessForm& stiffness, const SpectralResult& result,
    std::pair<int, int> group, const std::vector<Index>& regular_support,
    const VecX& vertex_weights, double tolerance);

}  // namespace conformax
