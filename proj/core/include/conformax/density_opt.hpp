#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "conformax/assembly.hpp"
#include "conformax/eigensolver.hpp"
#include "conformax/surface.hpp"

namespace conformax {

/// The discrete class S_n: box bounds plus the unit-mass constraint under
/// the lumped vertex measure.
struct FeasibleSet {
  double lower_bound = 0.0;
  double cap = 1.0;        ///< the regularization parameter n
  VecX vertex_weights;     ///< lumped vertex areas w_v
  double target_mass = 1.0;

  double total_area() const { return vertex_weights.sum(); }
  /// Nonempty with the uniform density strictly inside.
  void validate() const;
};

/// w-weighted Euclidean projection onto
/// {lower <= mu <= cap, sum w_v mu_v = target}: clamp(raw + t) with the
/// scalar shift t found by monotone bisection on the mass.
DensityField project_to_feasible(const VecX& raw, const FeasibleSet& set);

/// First-order change of lambda_k under a density perturbation nu. Simple
/// eigenvalue: -lambda_k sum_v nu_v w_v u_k(v)^2. Multiplicity group:
/// the extreme eigenvalues of -lambda_k U^T diag(nu w) U (Clarke bounds).
struct DerivativeBound {
  double lower = 0.0;
  double upper = 0.0;
  bool simple = true;

  double value() const { return 0.5 * (lower + upper); }
};

DerivativeBound eigenvalue_derivative(const SpectralResult& result, int k,
                                      const VecX& direction,
                                      const VecX& vertex_weights,
                                      double stale_tolerance = 1e-5);

/// Areas of the level sets E_n = {mu = cap} and E_- = {mu < 0}.
struct LevelSetReport {
  double cap_set_area = 0.0;
  double neg_set_area = 0.0;
  double n_times_cap_area = 0.0;
};

LevelSetReport level_set_report(const DensityField& density,
                                const VecX& vertex_weights, double cap);

struct IterationRecord {
  int stage = 0;
  int iteration = 0;
  double cap = 0.0;
  double lambda_k = 0.0;
  std::vector<double> lambda_group;
  double step_size = 0.0;
  double projected_step_norm = 0.0;
  double cap_set_area = 0.0;
  double neg_set_area = 0.0;
  bool accepted = false;
};

struct StageRecord {
  int stage = 0;
  double cap = 0.0;
  double best_lambda = 0.0;
  int iterations = 0;
  LevelSetReport level_sets;
  VecX best_density;
  std::string note;
};

struct OptimizationTrace {
  std::vector<IterationRecord> iterations;
  std::vector<StageRecord> stages;
};

struct AscendOptions {
  int budget = 500;                 ///< iteration cap per stage
  double step_mass_fraction = 0.01; ///< initial step moves ~1% of the mass
  int max_backtracks = 30;
  double step_norm_tol = 1e-8;      ///< w-weighted projected-step stop
  int direction_rounds = 4;         ///< fixed-point passes for the group direction
  SolverOptions solver;
  int solve_count = 0;              ///< 0: derived from k
};

/// Projected subgradient ascent of lambda_k over the feasible set,
/// multiplicity-aware, with backtracking on the true lambda_k.
/// Returns the best-seen density and the trace.
std::pair<DensityField, OptimizationTrace> ascend(const TriangleMesh& mesh,
                                                  int k, const FeasibleSet& set,
                                                  const DensityField& start,
                                                  const AscendOptions& options,
                                                  int stage_index = 0);

/// Continuation in the cap n: one ascend stage per cap, warm-started from
/// the previous optimum. The final stage's best density is the discrete
/// stand-in for the limit measure.
struct ContinuationResult {
  OptimizationTrace trace;
  std::vector<DensityField> stage_densities;  ///< best density per stage
  DensityField final_density;
  double final_lambda = 0.0;
};

ContinuationResult continuation(const TriangleMesh& mesh, int k,
                                const std::vector<double>& caps,
                                const AscendOptions& options,
                                double lower_bound = 0.0);

}  // namespace conformax
