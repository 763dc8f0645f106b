#include "conformax/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "conformax/errors.hpp"

namespace conformax {

namespace {

double ball_mass(const TriangleMesh& mesh, const VecX& weights,
                 const VecX& density, Index center, double radius) {
  double mass = 0.0;
  for (Index v : vertices_within(mesh, center, radius)) {
    mass += weights[v] * density[v];
  }
  return mass;
}

std::vector<Index> one_ring_maxima(const TriangleMesh& mesh, const VecX& density,
                                   double floor_value) {
  const Index n = mesh.vertex_count();
  std::vector<std::vector<Index>> neighbors(n);
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const Index a = mesh.triangles(t, e), b = mesh.triangles(t, (e + 1) % 3);
      neighbors[a].push_back(b);
      neighbors[b].push_back(a);
    }
  }
  std::vector<Index> maxima;
  for (Index v = 0; v < n; ++v) {
    if (density[v] <= floor_value) continue;
    bool is_max = true;
    for (Index u : neighbors[v]) {
      if (density[u] > density[v]) {
        is_max = false;
        break;
      }
    }
    if (is_max) maxima.push_back(v);
  }
  return maxima;
}

}  // namespace

MeasureDecomposition detect_atoms(const TriangleMesh& mesh,
                                  const std::vector<StageDensity>& stages,
                                  int k, const AtomDetectionOptions& options) {
  if (stages.size() < 2) {
    throw ConfigurationError("detect_atoms: needs at least two continuation stages");
  }
  for (std::size_t s = 1; s < stages.size(); ++s) {
    if (!(stages[s].cap > stages[s - 1].cap)) {
      throw ConfigurationError("detect_atoms: stage caps must increase");
    }
  }
  const VecX weights = mesh.vertex_area_weights();
  const VecX& terminal = stages.back().density;
  const double r0 = options.radius_scale > 0.0 ? options.radius_scale
                                               : 10.0 * mesh.mean_edge_length();
  const double radius_limit = 0.999 * mesh.ball_radius_limit();
  auto stage_radius = [&](double cap) {
    return std::min(r0 / std::sqrt(cap), radius_limit);
  };

  MeasureDecomposition out;

  // candidates: local maxima of the terminal density above the uniform level
  const double uniform = 1.0 / mesh.total_area();
  std::vector<Index> candidates = one_ring_maxima(mesh, terminal, uniform);

  struct Candidate {
    Index vertex;
    std::vector<double> masses;
    double extrapolated;
  };
  std::vector<Candidate> accepted;
  for (Index v : candidates) {
    std::vector<double> masses;
    masses.reserve(stages.size());
    for (const auto& stage : stages) {
      masses.push_back(
          ball_mass(mesh, weights, stage.density, v, stage_radius(stage.cap)));
    }
    if (masses.back() < options.threshold) continue;
    bool concentrating = true;
    for (std::size_t s = 1; s < masses.size(); ++s) {
      if (masses[s] < masses[s - 1] * (1.0 - options.monotone_slack)) {
        concentrating = false;
        break;
      }
    }
    if (!concentrating) continue;

    // Richardson in 1/sqrt(n) from the two finest stages
    const std::size_t last = masses.size() - 1;
    const double inv_a = 1.0 / std::sqrt(stages[last - 1].cap);
    const double inv_b = 1.0 / std::sqrt(stages[last].cap);
    double c = masses[last] +
               (masses[last] - masses[last - 1]) * inv_b / (inv_a - inv_b);
    if (!(std::abs(c - masses[last]) <= 0.2)) {
      std::ostringstream note;
      note << "atom at vertex " << v
           << ": extrapolation unstable, using last-stage ball mass";
      out.warnings.push_back(note.str());
      c = masses[last];
    }
    c = std::min(std::max(c, 0.0), 1.0);
    accepted.push_back({v, masses, c});
  }

  // enforce pairwise-disjoint supports: merge overlapping candidate balls
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) {
              return a.extrapolated > b.extrapolated ||
                     (a.extrapolated == b.extrapolated && a.vertex < b.vertex);
            });
  const double final_radius = stage_radius(stages.back().cap);
  std::vector<Candidate> kept;
  for (const auto& cand : accepted) {
    bool overlaps = false;
    for (const auto& existing : kept) {
      if (mesh.geodesic_distance(cand.vertex, existing.vertex) < 2.0 * final_radius) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) {
      std::ostringstream note;
      note << "candidate ball at vertex " << cand.vertex
           << " overlaps a stronger atom; merged";
      out.warnings.push_back(note.str());
      continue;
    }
    kept.push_back(cand);
  }

  out.regular_density = terminal;
  double singular_mass = 0.0;
  for (const auto& cand : kept) {
    Atom atom;
    atom.vertex = cand.vertex;
    atom.weight = cand.extrapolated;
    atom.ball_radius = final_radius;
    atom.stage_masses = cand.masses;
    singular_mass += atom.weight;
    for (Index v : vertices_within(mesh, cand.vertex, final_radius)) {
      out.regular_density[v] = 0.0;
    }
    out.atoms.push_back(std::move(atom));
  }
  out.K = static_cast<int>(out.atoms.size());
  out.regular_area = 1.0 - singular_mass;
  out.k_bound_satisfied = out.K <= k - 1;
  return out;
}

namespace {

QuantizationEntry nearest_candidate(double value, double lambda_k,
                                    const std::map<int, double>& table,
                                    double tolerance) {
  QuantizationEntry entry;
  entry.value = value;
  entry.relative_distance = std::numeric_limits<double>::infinity();
  for (const auto& [j, lambda_j] : table) {
    const double candidate = lambda_j / lambda_k;
    const double distance =
        std::abs(value - candidate) / std::max(std::abs(candidate), 1e-12);
    if (distance < entry.relative_distance) {
      entry.relative_distance = distance;
      entry.nearest_candidate = candidate;
      entry.candidate_j = j;
    }
  }
  entry.pass = entry.relative_distance <= tolerance;
  return entry;
}

}  // namespace

QuantizationCheck check_quantization(const MeasureDecomposition& decomposition,
                                     double lambda_k_estimate,
                                     const std::map<int, double>& sphere_table,
                                     const std::map<int, double>& class_table,
                                     double tolerance) {
  if (!(lambda_k_estimate > 0.0)) {
    throw ConfigurationError("check_quantization: lambda_k estimate must be positive");
  }
  if (sphere_table.empty() || class_table.empty()) {
    throw ConfigurationError("check_quantization: candidate tables must be nonempty");
  }

  QuantizationCheck check;
  check.tolerance = tolerance;
  for (const auto& [j, v] : sphere_table) check.sphere_candidates.push_back(v / lambda_k_estimate);
  for (const auto& [j, v] : class_table) check.class_candidates.push_back(v / lambda_k_estimate);

  for (const auto& atom : decomposition.atoms) {
    check.atom_checks.push_back(
        nearest_candidate(atom.weight, lambda_k_estimate, sphere_table, tolerance));
    check.all_pass = check.all_pass && check.atom_checks.back().pass;
  }
  check.regular_area_check = nearest_candidate(
      decomposition.regular_area, lambda_k_estimate, class_table, tolerance);
  check.all_pass = check.all_pass && check.regular_area_check.pass;
  return check;
}

SingularSpectrum singular_spectrum(const TriangleMesh& mesh, Index atom_vertex,
                                   const std::vector<double>& radii,
                                   const std::vector<StageDensity>& stages,
                                   const SingularSpectrumOptions& options) {
  if (radii.size() < 3) {
    throw ConfigurationError("singular_spectrum: at least 3 radii required");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] < radii[i - 1])) {
      throw ConfigurationError("singular_spectrum: radii must decrease");
    }
  }
  if (stages.empty()) {
    throw ConfigurationError("singular_spectrum: no continuation stages");
  }
  if (!(radii.front() < mesh.ball_radius_limit())) {
    throw ConfigurationError("singular_spectrum: largest radius outside ball limit");
  }

  SingularSpectrum spectrum;
  spectrum.atom_vertex = atom_vertex;
  const int modes = options.modes;
  const int n_stages = static_cast<int>(stages.size());

  std::vector<double> usable_radii;
  std::vector<Submesh> balls;
  for (double r : radii) {
    try {
      balls.push_back(geodesic_ball(mesh, atom_vertex, r));
      usable_radii.push_back(r);
    } catch (const DegenerateBallError& err) {
      std::ostringstream note;
      note << "radius " << r << " dropped: " << err.what();
      spectrum.warnings.push_back(note.str());
    }
  }
  if (usable_radii.size() < 2) {
    throw DegenerateBallError("singular_spectrum: fewer than two usable radii");
  }
  spectrum.radii = usable_radii;
  const int n_radii = static_cast<int>(usable_radii.size());

  spectrum.tables.assign(modes, Eigen::MatrixXd::Zero(n_stages, n_radii));
  for (int s = 0; s < n_stages; ++s) {
    spectrum.stage_caps.push_back(stages[s].cap);
    for (int r = 0; r < n_radii; ++r) {
      DensityField local;
      local.values = restrict_to_submesh(stages[s].density, balls[r]);
      local.values = local.values.cwiseMax(0.0);  // Dirichlet solves need m >= 0
      local.lower_bound = 0.0;
      local.cap = stages[s].cap;
      SolverOptions solver = options.solver;
      solver.count = std::min<int>(modes, balls[r].interior_count());
      const SpectralResult result = solve_dirichlet(balls[r], local, solver);
      for (int m = 0; m < modes; ++m) {
        spectrum.tables[m](s, r) =
            m < result.count() ? result.eigenvalues[m]
                               : std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  // domain monotonicity: smaller ball, larger eigenvalue (density held fixed
  // per stage row)
  for (int m = 0; m < modes; ++m) {
    bool monotone = true;
    const auto& table = spectrum.tables[m];
    for (int s = 0; s < n_stages; ++s) {
      for (int r = 1; r < n_radii; ++r) {
        if (table(s, r) < table(s, r - 1) * (1.0 - 1e-8)) monotone = false;
      }
    }
    spectrum.monotone_in_radius.push_back(monotone);
  }

  // divergence test: a shrinking ball with no concentrated mass scales like
  // the empty disk, lambda ~ 1/eps^2
  {
    const auto& first = spectrum.tables[0];
    const double l_big = first(n_stages - 1, 0);
    const double l_small = first(n_stages - 1, n_radii - 1);
    const double ratio = l_small / std::max(l_big, 1e-300);
    const double eps_ratio = usable_radii.front() / usable_radii.back();
    const double slope = std::log(ratio) / std::log(eps_ratio);
    spectrum.no_atom = slope > 1.5;  // close to the 1/eps^2 law
  }

  // linear Richardson in eps^2 at the last stage from the two finest radii
  const double e1 = usable_radii[n_radii - 2] * usable_radii[n_radii - 2];
  const double e2 = usable_radii[n_radii - 1] * usable_radii[n_radii - 1];
  for (int m = 0; m < modes; ++m) {
    const double v1 = spectrum.tables[m](n_stages - 1, n_radii - 2);
    const double v2 = spectrum.tables[m](n_stages - 1, n_radii - 1);
    spectrum.extrapolated.push_back(v2 + (v2 - v1) * e2 / (e1 - e2));
    spectrum.error_bars.push_back(std::abs(v2 - v1));
  }
  return spectrum;
}

MembershipReport membership_report(double lambda_k_estimate,
                                   const std::vector<SingularSpectrum>& spectra,
                                   const VecX& regular_eigenvalues,
                                   double tolerance) {
  MembershipReport report;
  report.lambda_k = lambda_k_estimate;
  report.tolerance = tolerance;
  report.singular_vacuous = spectra.empty();

  for (const auto& spectrum : spectra) {
    MembershipReport::AtomEntry entry;
    entry.vertex = spectrum.atom_vertex;
    double best = std::numeric_limits<double>::infinity();
    for (double value : spectrum.extrapolated) {
      if (!std::isfinite(value)) continue;
      const double distance = std::abs(value - lambda_k_estimate) /
                              std::max(std::abs(lambda_k_estimate), 1e-12);
      if (distance < best) {
        best = distance;
        entry.nearest_singular = value;
      }
    }
    entry.relative_distance = best;
    entry.pass = best <= tolerance;
    report.atoms.push_back(entry);
  }

  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < regular_eigenvalues.size(); ++i) {
    const double value = regular_eigenvalues[i];
    if (value <= 0.0) continue;  // skip the trivial mode
    const double distance = std::abs(value - lambda_k_estimate) /
                            std::max(std::abs(lambda_k_estimate), 1e-12);
    if (distance < best) {
      best = distance;
      report.nearest_regular = value;
    }
  }
  report.regular_distance = best;
  report.regular_pass = best <= tolerance;
  return report;
}

}  // namespace conformax
