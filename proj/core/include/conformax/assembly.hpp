#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "conformax/surface.hpp"

namespace conformax {

using SpMat = Eigen::SparseMatrix<double>;

/// Cotangent-weight discretization of the Dirichlet energy. In two
/// dimensions this form is conformally invariant, so it depends only on the
/// background mesh and never on a density.
struct StiffnessForm {
  SpMat matrix;

  double quadratic(const VecX& u) const { return u.dot(matrix * u); }
};

StiffnessForm assemble_stiffness(const TriangleMesh& mesh);

/// Per-vertex conformal density with box bounds. The unit-mass constraint is
/// a post-condition of projection, not a structural invariant: restricted
/// densities on submeshes carry mass strictly between 0 and 1.
struct DensityField {
  VecX values;
  double lower_bound = 0.0;
  double cap = 1.0;

  double mass(const VecX& vertex_weights) const {
    return vertex_weights.dot(values);
  }
};

/// Uniform density 1/area(mesh) with the given bounds.
DensityField uniform_density(const TriangleMesh& mesh, double lower_bound,
                             double cap);

/// Lumped (diagonal) mass form with entries mu_v * w_v, where w_v is the
/// vertex area weight. The discrete analogue of the measure mu dA_g.
struct MassForm {
  VecX diagonal;

  double trace() const { return diagonal.sum(); }
  double quadratic(const VecX& u) const {
    return u.dot(diagonal.cwiseProduct(u));
  }
};

MassForm assemble_mass(const TriangleMesh& mesh, const DensityField& density);

/// Homogeneous Dirichlet condition on a submesh boundary, implemented by
/// eliminating boundary rows and columns. An empty boundary yields the
/// identity restriction.
struct DirichletRestriction {
  std::vector<Index> interior;        ///< submesh-local interior vertices
  std::vector<Index> interior_index;  ///< local vertex -> interior slot, -1 on boundary

  explicit DirichletRestriction(const Submesh& submesh);

  Index interior_count() const { return static_cast<Index>(interior.size()); }

  SpMat restrict_matrix(const SpMat& full) const;
  VecX restrict_values(const VecX& full) const;
  /// Prolong interior values back to submesh vertices, zero on the boundary.
  VecX prolong(const VecX& interior_values) const;
};

/// Restrict per-vertex parent values onto submesh vertices via the stored
/// parent-index lookup (no interpolation).
VecX restrict_to_submesh(const VecX& parent_values, const Submesh& submesh);
DensityField restrict_to_submesh(const DensityField& parent,
                                 const Submesh& submesh);

/// MatrixMarket coordinate export ("%%MatrixMarket matrix coordinate real
/// symmetric", lower triangle) for external verification.
void write_matrix_market(const SpMat& matrix, std::ostream& out);
void write_matrix_market(const SpMat& matrix, const std::string& path);

}  // namespace conformax
