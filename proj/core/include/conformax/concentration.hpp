#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conformax/assembly.hpp"
#include "conformax/density_opt.hpp"
#include "conformax/eigensolver.hpp"
#include "conformax/surface.hpp"

namespace conformax {

/// Terminal density of one continuation stage.
struct StageDensity {
  double cap = 0.0;
  VecX density;
};

struct Atom {
  Index vertex = -1;
  double weight = 0.0;    ///< extrapolated ball mass c_i
  double ball_radius = 0.0;
  std::vector<double> stage_masses;
};

/// mu = mu_r + sum c_i delta_{x_i}: detected atoms, the remaining regular
/// density (atom balls zeroed, not renormalized), and A_r = 1 - sum c_i.
struct MeasureDecomposition {
  std::vector<Atom> atoms;
  VecX regular_density;
  int K = 0;
  double regular_area = 0.0;
  bool k_bound_satisfied = true;  ///< K <= k-1 (violation is a finding)
  std::vector<std::string> warnings;
};

struct AtomDetectionOptions {
  double threshold = 0.05;      ///< minimum ball mass for an atom candidate
  double radius_scale = 0.0;    ///< r0; 0 means 10 coarsest-stage mesh edges
  double monotone_slack = 0.1;  ///< tolerated relative mass drop across stages
};

/// Mass-concentration criterion: a vertex is an atom when the mass in the
/// geodesic ball of radius r0/sqrt(n) around a local maximum exceeds the
/// threshold and does not decay as the cap n grows while the ball shrinks.
/// Requires at least two continuation stages.
MeasureDecomposition detect_atoms(const TriangleMesh& mesh,
                                  const std::vector<StageDensity>& stages,
                                  int k, const AtomDetectionOptions& options = {});

struct QuantizationEntry {
  double value = 0.0;
  double nearest_candidate = 0.0;
  int candidate_j = 0;
  double relative_distance = 0.0;
  bool pass = false;
};

/// Nearest-candidate distances of the atom weights against
/// {Lambda_j(S^2)/lambda_k} and of A_r against {Lambda_j(M,[g])/lambda_k}.
struct QuantizationCheck {
  std::vector<QuantizationEntry> atom_checks;
  QuantizationEntry regular_area_check;
  std::vector<double> sphere_candidates;
  std::vector<double> class_candidates;
  double tolerance = 0.15;
  bool all_pass = true;
};

QuantizationCheck check_quantization(const MeasureDecomposition& decomposition,
                                     double lambda_k_estimate,
                                     const std::map<int, double>& sphere_table,
                                     const std::map<int, double>& class_table,
                                     double tolerance = 0.15);

/// Dirichlet eigenvalues on shrinking balls around one atom, with the stage
/// density as weight, and their Richardson extrapolation in eps^2 at the
/// last stage.
struct SingularSpectrum {
  Index atom_vertex = -1;
  std::vector<double> radii;       ///< decreasing
  std::vector<double> stage_caps;
  /// table[mode](stage, radius) following the orders above
  std::vector<Eigen::MatrixXd> tables;
  std::vector<double> extrapolated;  ///< per mode, last stage
  std::vector<double> error_bars;    ///< spread of the two finest radii
  std::vector<bool> monotone_in_radius;
  bool no_atom = false;  ///< eigenvalues diverge like a shrinking empty disk
  std::vector<std::string> warnings;
};

struct SingularSpectrumOptions {
  int modes = 3;
  SolverOptions solver;
};

SingularSpectrum singular_spectrum(const TriangleMesh& mesh, Index atom_vertex,
                                   const std::vector<double>& radii,
                                   const std::vector<StageDensity>& stages,
                                   const SingularSpectrumOptions& options = {});

/// Distances from the lambda_k estimate to the nearest singular eigenvalue
/// of each atom and to the nearest regular eigenvalue of the mu_r problem.
struct MembershipReport {
  struct AtomEntry {
    Index vertex = -1;
    double nearest_singular = 0.0;
    double relative_distance = 0.0;
    bool pass = false;
  };
  double lambda_k = 0.0;
  std::vector<AtomEntry> atoms;
  double nearest_regular = 0.0;
  double regular_distance = 0.0;
  bool regular_pass = false;
  bool singular_vacuous = false;  ///< K = 0: membership holds vacuously
  double tolerance = 0.1;
};

MembershipReport membership_report(double lambda_k_estimate,
                                   const std::vector<SingularSpectrum>& spectra,
                                   const VecX& regular_eigenvalues,
                                   double tolerance = 0.1);

}  // namespace conformax
