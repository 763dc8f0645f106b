#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "conformax/assembly.hpp"
#include "conformax/errors.hpp"
#include "conformax/surface.hpp"

namespace conformax {

struct SolverOptions {
  int count = 6;
  double tol = 1e-9;        ///< relative residual target, in (0, 1e-2]
  int max_iterations = 400;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  double group_gap = 1e-3;  ///< relative gap for multiplicity clustering
  bool paper_mode = false;  ///< accept indefinite mass (lower bound -1/2)
  /// Optional warm start: columns are previous eigenvectors on the same
  /// vertex set. Non-owning; must outlive the call.
  const Eigen::MatrixXd* warm_start = nullptr;
};

/// Smallest eigenpairs of A u = lambda M u, ascending, with mass-orthonormal
/// eigenvectors. On a closed mesh with positive-mass density, lambda_0 ~ 0
/// with constant eigenvector; lambda_k is the k-th nontrivial eigenvalue.
struct SpectralResult {
  VecX eigenvalues;
  Eigen::MatrixXd eigenvectors;  ///< one column per pair, defined mesh-wide
  VecX residuals;                ///< per-pair ||A u - lambda M u|| / ||u||
  std::vector<std::pair<int, int>> multiplicity_groups;  ///< half-open ranges

  int count() const { return static_cast<int>(eigenvalues.size()); }
  std::pair<int, int> group_containing(int k) const;
};

/// Failure report for a non-converged solve; carries the best residuals seen.
struct ConvergenceError : Error {
  VecX best_residuals;
  ConvergenceError(const std::string& what, VecX residuals)
      : Error(what), best_residuals(std::move(residuals)) {}
};

/// Smallest `count` eigenpairs on the support of the density; vertices with
/// zero mass carry the harmonic extension so eigenvectors are defined
/// mesh-wide. Deterministic for a fixed seed.
SpectralResult solve_smallest(const StiffnessForm& stiffness,
                              const MassForm& mass, const SolverOptions& options);

/// Smallest Dirichlet eigenpairs on a submesh with the given per-vertex
/// density; eigenvectors are returned on submesh vertices, zero on the
/// boundary. No zero mode.
SpectralResult solve_dirichlet(const Submesh& submesh,
                               const DensityField& density,
                               const SolverOptions& options);

/// (u^T A u) / (u^T M u); throws on vanishing M-norm.
double rayleigh_quotient(const StiffnessForm& stiffness, const MassForm& mass,
                         const VecX& u);

/// Partition ascending eigenvalues into clusters with relative gap below
/// `group_gap`.
std::vector<std::pair<int, int>> cluster_eigenvalues(const VecX& eigenvalues,
                                                     double group_gap);

}  // namespace conformax
