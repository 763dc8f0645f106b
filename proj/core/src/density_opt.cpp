#include "conformax/density_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "conformax/errors.hpp"

namespace conformax {

void FeasibleSet::validate() const {
  if (vertex_weights.size() == 0 || (vertex_weights.array() <= 0.0).any()) {
    throw ConfigurationError("feasible set: vertex weights must be positive");
  }
  const double uniform = target_mass / total_area();
  if (!(lower_bound < uniform && uniform < cap)) {
    std::ostringstream msg;
    msg << "feasible set is empty or degenerate: need lower_bound < "
        << uniform << " < cap, got [" << lower_bound << ", " << cap << "]";
    throw ConfigurationError(msg.str());
  }
}

DensityField project_to_feasible(const VecX& raw, const FeasibleSet& set) {
  set.validate();
  const VecX& w = set.vertex_weights;
  if (raw.size() != w.size()) {
    throw ConfigurationError("project_to_feasible: size mismatch");
  }

  auto clamped_mass = [&](double t) {
    return w.dot(raw.array().min(set.cap - t).max(set.lower_bound - t).matrix()) +
           t * w.sum();
  };

  // mass(t) is nondecreasing piecewise linear; bracket then bisect
  double lo = set.lower_bound - raw.maxCoeff();
  double hi = set.cap - raw.minCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (clamped_mass(mid) < set.target_mass ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);

  // one exact polish on the free set to pin the mass to machine precision
  double free_weight = 0.0, clamped = 0.0;
  for (Index v = 0; v < raw.size(); ++v) {
    const double value = raw[v] + t;
    if (value >= set.cap) {
      clamped += w[v] * set.cap;
    } else if (value <= set.lower_bound) {
      clamped += w[v] * set.lower_bound;
    } else {
      free_weight += w[v];
      clamped += w[v] * raw[v];
    }
  }
  if (free_weight > 0.0) t = (set.target_mass - clamped) / free_weight;

  DensityField density;
  density.lower_bound = set.lower_bound;
  density.cap = set.cap;
  density.values =
      (raw.array() + t).min(set.cap).max(set.lower_bound).matrix();
  return density;
}

DerivativeBound eigenvalue_derivative(const SpectralResult& result, int k,
                                      const VecX& direction,
                                      const VecX& vertex_weights,
                                      double stale_tolerance) {
  if (k < 0 || k >= result.count()) {
    throw ConfigurationError("eigenvalue_derivative: index outside spectrum");
  }
  const auto [g0, g1] = result.group_containing(k);
  for (int i = g0; i < g1; ++i) {
    if (result.residuals[i] > stale_tolerance * (1.0 + std::abs(result.eigenvalues[i]))) {
      throw StaleEigenpairError(
          "eigenvalue_derivative: eigenpair residuals exceed the trust threshold");
    }
  }
  const double lambda = result.eigenvalues[k];
  const int m = g1 - g0;
  const VecX scaled = direction.cwiseProduct(vertex_weights);

  DerivativeBound bound;
  if (m == 1) {
    const VecX u = result.eigenvectors.col(k);
    const double d = -lambda * u.dot(scaled.cwiseProduct(u));
    bound.lower = bound.upper = d;
    bound.simple = true;
    return bound;
  }
  const Eigen::MatrixXd basis = result.eigenvectors.middleCols(g0, m);
  const Eigen::MatrixXd p =
      -lambda * basis.transpose() * scaled.asDiagonal() * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (p + p.transpose()));
  bound.lower = es.eigenvalues().minCoeff();
  bound.upper = es.eigenvalues().maxCoeff();
  bound.simple = false;
  return bound;
}

LevelSetReport level_set_report(const DensityField& density,
                                const VecX& vertex_weights, double cap) {
  LevelSetReport report;
  const double clamp_tol = 1e-9 * std::max(1.0, std::abs(cap));
  for (Index v = 0; v < density.values.size(); ++v) {
    if (density.values[v] >= cap - clamp_tol) {
      report.cap_set_area += vertex_weights[v];
    }
    if (density.values[v] < -1e-12) {
      report.neg_set_area += vertex_weights[v];
    }
  }
  report.n_times_cap_area = cap * report.cap_set_area;
  return report;
}

namespace {

double weighted_norm(const VecX& v, const VecX& w) {
  return std::sqrt(w.dot(v.cwiseProduct(v)));
}

// Ascent direction for the multiplicity group containing k. For a group
// spanning positions [0, m) with k at position j, the direction targets the
// j-th smallest eigenvalue of the group perturbation matrix: push up the
// modes at positions j..m-1 and let the ones below fall. For j = 0 this is
// steepest ascent of the group's smallest directional derivative.
VecX group_ascent_direction(const SpectralResult& result, int k,
                            const VecX& weights, int rounds,
                            std::uint64_t seed) {
  const auto [g0, g1] = result.group_containing(k);
  const int m = g1 - g0;
  const int j = k - g0;
  const double lambda = result.eigenvalues[k];
  const Eigen::MatrixXd basis = result.eigenvectors.middleCols(g0, m);
  const double total = weights.sum();

  auto mass_neutral = [&](VecX d) {
    d.array() -= weights.dot(d) / total;
    return d;
  };

  // provisional direction: rotation-invariant group average
  VecX d = VecX::Zero(weights.size());
  for (int i = 0; i < m; ++i) d += basis.col(i).cwiseAbs2();
  d = mass_neutral(-lambda / m * d);

  if (m == 1) return d;

  for (int round = 0; round < rounds; ++round) {
    Eigen::MatrixXd combos;
    const Eigen::MatrixXd p = -lambda * basis.transpose() *
                              d.cwiseProduct(weights).asDiagonal() * basis;
    const double p_scale = p.norm();
    if (p_scale < 1e-13 * std::abs(lambda) * std::max(1.0, d.cwiseAbs().maxCoeff())) {
      // fully symmetric point: any orthonormal split of the group works
      std::mt19937_64 rng(seed + round);
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::MatrixXd r(m, m);
      for (int c = 0; c < m; ++c) {
        for (int rr = 0; rr < m; ++rr) r(rr, c) = gauss(rng);
      }
      combos = Eigen::HouseholderQR<Eigen::MatrixXd>(r).householderQ();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (p + p.transpose()));
      combos = es.eigenvectors();  // ascending derivative order
    }
    VecX next = VecX::Zero(weights.size());
    for (int i = j; i < m; ++i) {
      next += (basis * combos.col(i)).cwiseAbs2();
    }
    d = mass_neutral(-lambda / (m - j) * next);
  }
  return d;
}

double moved_mass(const VecX& from, const VecX& to, const VecX& weights) {
  return 0.5 * weights.dot((to - from).cwiseAbs());
}

}  // namespace

std::pair<DensityField, OptimizationTrace> ascend(const TriangleMesh& mesh,
                                                  int k, const FeasibleSet& set,
                                                  const DensityField& start,
                                                  const AscendOptions& options,
                                                  int stage_index) {
  if (k < 1) throw ConfigurationError("ascend: k must be >= 1");
  set.validate();
  const VecX w = set.vertex_weights;
  const StiffnessForm stiffness = assemble_stiffness(mesh);

  OptimizationTrace trace;
  StageRecord stage;
  stage.stage = stage_index;
  stage.cap = set.cap;

  DensityField current = start;
  Eigen::MatrixXd warm;

  int solve_count = options.solve_count > 0 ? options.solve_count : k + 5;
  auto solve_at = [&](const DensityField& density,
                      bool use_warm) -> SpectralResult {
    SolverOptions solver = options.solver;
    solver.paper_mode = solver.paper_mode || set.lower_bound < 0.0;
    for (;;) {
      solver.count = solve_count;
      solver.warm_start = (use_warm && warm.size() > 0) ? &warm : nullptr;
      SpectralResult result = solve_smallest(stiffness, assemble_mass(mesh, density), solver);
      const auto group = result.group_containing(k);
      if (group.second < solve_count || solve_count >= mesh.vertex_count()) {
        return result;
      }
      // group truncated by the window; widen and re-solve
      solve_count = std::min<int>(mesh.vertex_count(), solve_count + 4);
    }
  };

  SpectralResult result;
  try {
    result = solve_at(current, false);
  } catch (const ConvergenceError& err) {
    stage.best_lambda = std::numeric_limits<double>::quiet_NaN();
    stage.best_density = current.values;
    stage.note = std::string("eigensolver failed at stage start: ") + err.what();
    stage.level_sets = level_set_report(current, w, set.cap);
    trace.stages.push_back(stage);
    return {current, trace};
  }

  double lambda_cur = result.eigenvalues[k];
  DensityField best = current;
  double best_lambda = lambda_cur;
  warm = result.eigenvectors;

  double base_step = 0.0;
  int iterations_done = 0;

  for (int iter = 0; iter < options.budget; ++iter) {
    iterations_done = iter + 1;
    VecX direction = group_ascent_direction(result, k, w,
                                            options.direction_rounds,
                                            options.solver.seed ^ (iter * 0x9e37u));
    const double dn = weighted_norm(direction, w);

    IterationRecord record;
    record.stage = stage_index;
    record.iteration = iter;
    record.cap = set.cap;
    record.lambda_k = lambda_cur;
    const auto group = result.group_containing(k);
    for (int i = group.first; i < group.second; ++i) {
      record.lambda_group.push_back(result.eigenvalues[i]);
    }
    const LevelSetReport sets = level_set_report(current, w, set.cap);
    record.cap_set_area = sets.cap_set_area;
    record.neg_set_area = sets.neg_set_area;

    if (dn < 1e-300) {
      trace.iterations.push_back(record);
      stage.note = "vanishing ascent direction";
      break;
    }
    direction /= dn;

    if (base_step == 0.0) {
      // calibrate so the first projected step moves ~step_mass_fraction of
      // the total mass
      const double target = options.step_mass_fraction * set.target_mass;
      double t = target;
      double moved = 0.0;
      for (int grow = 0; grow < 60; ++grow) {
        const DensityField probe = project_to_feasible(current.values + t * direction, set);
        moved = moved_mass(current.values, probe.values, w);
        if (moved >= target || t > 1e12) break;
        t *= 2.0;
      }
      double lo = 0.0, hi = t;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        const DensityField probe = project_to_feasible(current.values + mid * direction, set);
        (moved_mass(current.values, probe.values, w) < target ? lo : hi) = mid;
      }
      base_step = hi;
    }

    bool accepted = false;
    double step = base_step;
    DensityField trial;
    SpectralResult trial_result;
    double step_norm = 0.0;
    for (int bt = 0; bt <= options.max_backtracks; ++bt, step *= 0.5) {
      trial = project_to_feasible(current.values + step * direction, set);
      step_norm = weighted_norm(trial.values - current.values, w);
      if (step_norm < options.step_norm_tol) break;
      try {
        trial_result = solve_at(trial, true);
      } catch (const ConvergenceError&) {
        continue;  // treat an unconverged trial as a failed step
      }
      const double lambda_trial = trial_result.eigenvalues[k];
      if (lambda_trial > lambda_cur + 1e-11 * (1.0 + std::abs(lambda_cur))) {
        accepted = true;
        break;
      }
    }

    record.step_size = accepted ? step : 0.0;
    record.projected_step_norm = accepted ? step_norm : 0.0;
    record.accepted = accepted;
    trace.iterations.push_back(record);

    if (!accepted) break;  // the acceptable step has shrunk to zero

    current = trial;
    result = trial_result;
    lambda_cur = result.eigenvalues[k];
    warm = result.eigenvectors;
    if (lambda_cur > best_lambda) {
      best_lambda = lambda_cur;
      best = current;
    }
    if (step_norm < options.step_norm_tol) break;
  }

  stage.best_lambda = best_lambda;
  stage.best_density = best.values;
  stage.iterations = iterations_done;
  stage.level_sets = level_set_report(best, w, set.cap);
  trace.stages.push_back(stage);
  return {best, trace};
}

ContinuationResult continuation(const TriangleMesh& mesh, int k,
                                const std::vector<double>& caps,
                                const AscendOptions& options,
                                double lower_bound) {
  if (caps.empty()) throw ConfigurationError("continuation: empty cap schedule");
  for (std::size_t i = 1; i < caps.size(); ++i) {
    if (!(caps[i] > caps[i - 1])) {
      throw ConfigurationError("continuation: caps must be strictly increasing");
    }
  }
  const VecX w = mesh.vertex_area_weights();
  const double uniform = 1.0 / mesh.total_area();
  if (!(caps.front() > uniform)) {
    throw ConfigurationError("continuation: first cap must exceed 1/total_area");
  }

  ContinuationResult out;
  DensityField current = uniform_density(mesh, lower_bound, caps.front());

  for (std::size_t s = 0; s < caps.size(); ++s) {
    FeasibleSet set;
    set.lower_bound = lower_bound;
    set.cap = caps[s];
    set.vertex_weights = w;
    // warm start: the previous optimum is feasible in the enlarged box
    current.cap = caps[s];
    auto [stage_best, stage_trace] = ascend(mesh, k, set, current, options,
                                            static_cast<int>(s));
    for (auto& rec : stage_trace.iterations) out.trace.iterations.push_back(rec);
    for (auto& rec : stage_trace.stages) out.trace.stages.push_back(rec);
    out.stage_densities.push_back(stage_best);
    current = stage_best;
  }
  out.final_density = current;
  out.final_lambda = out.trace.stages.back().best_lambda;
  return out;
}

}  // namespace conformax
