#include "conformax/verify.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "conformax/assembly.hpp"
#include "conformax/certify.hpp"
#include "conformax/concentration.hpp"
#include "conformax/config.hpp"
#include "conformax/density_opt.hpp"
#include "conformax/eigensolver.hpp"
#include "conformax/errors.hpp"
#include "conformax/pipeline.hpp"
#include "conformax/surface.hpp"

namespace conformax {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

CheckResult make_result(const std::string& name, bool pass,
                        const std::string& detail, double seconds) {
  return CheckResult{name, pass, detail, seconds};
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return json::parse(in);
}

// ---------------------------------------------------------------------------
// criterion 1: sphere spectrum against the closed form
std::vector<CheckResult> criterion_sphere_oracle() {
  Stopwatch watch;
  const TriangleMesh mesh = build_sphere_mesh(4);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const DensityField density = uniform_density(mesh, 0.0, 1.0);
  SolverOptions options;
  options.count = 9;
  options.tol = 1e-10;
  const SpectralResult result =
      solve_smallest(stiffness, assemble_mass(mesh, density), options);

  double worst_low = 0.0, worst_high = 0.0;
  for (int i = 1; i <= 3; ++i) {
    worst_low = std::max(worst_low,
                         std::abs(result.eigenvalues[i] - 8.0 * kPi) / (8.0 * kPi));
  }
  for (int i = 4; i <= 8; ++i) {
    worst_high = std::max(
        worst_high, std::abs(result.eigenvalues[i] - 24.0 * kPi) / (24.0 * kPi));
  }
  const double seconds = watch.seconds();
  const bool pass = worst_low < 0.01 && worst_high < 0.02 && seconds < 60.0;
  std::ostringstream detail;
  detail << "level-4 icosphere: max rel err " << fmt(worst_low)
         << " vs 8*pi (tol 1%), " << fmt(worst_high) << " vs 24*pi (tol 2%), "
         << fmt(seconds) << " s (limit 60)";
  return {make_result("sphere spectrum oracle", pass, detail.str(), seconds)};
}

// criterion 2: torus spectrum against the Fourier values
std::vector<CheckResult> criterion_torus_oracle() {
  Stopwatch watch;
  const TriangleMesh mesh = build_torus_mesh(64, 64, 1.0, 1.0);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const DensityField density = uniform_density(mesh, 0.0, 2.0);
  SolverOptions options;
  options.count = 5;
  options.tol = 1e-10;
  const SpectralResult result =
      solve_smallest(stiffness, assemble_mass(mesh, density), options);
  const double target = 4.0 * kPi * kPi;
  double worst = 0.0;
  for (int i = 1; i <= 4; ++i) {
    worst = std::max(worst, std::abs(result.eigenvalues[i] - target) / target);
  }
  const double seconds = watch.seconds();
  const bool pass = worst < 0.01 && seconds < 30.0;
  std::ostringstream detail;
  detail << "64x64 unit torus: max rel err " << fmt(worst)
         << " vs 4*pi^2 (tol 1%), " << fmt(seconds) << " s (limit 30)";
  return {make_result("torus spectrum oracle", pass, detail.str(), seconds)};
}

// criterion 3: Dirichlet disk against the Bessel root finder
std::vector<CheckResult> criterion_disk_oracle() {
  Stopwatch watch;
  const TriangleMesh mesh = build_torus_mesh(320, 320, 2.5, 2.5);
  const Submesh disk = geodesic_ball(mesh, 0, 1.0);
  DensityField density;
  density.values = VecX::Ones(disk.mesh.vertex_count());
  density.lower_bound = 0.0;
  density.cap = 2.0;
  SolverOptions options;
  options.count = 3;
  options.tol = 1e-10;
  const SpectralResult result = solve_dirichlet(disk, density, options);

  const std::vector<double> oracle = disk_dirichlet_spectrum(1.0, 3);
  const double err1 = std::abs(result.eigenvalues[0] - oracle[0]) / oracle[0];
  const double err2 = std::abs(result.eigenvalues[1] - oracle[1]) / oracle[1];
  const double err3 = std::abs(result.eigenvalues[2] - oracle[2]) / oracle[2];
  const double seconds = watch.seconds();
  const bool pass = err1 < 0.005 && err2 < 0.01 && err3 < 0.01;
  std::ostringstream detail;
  detail << "radius-1 disk, " << disk.interior_count()
         << " interior vertices: rel err " << fmt(err1) << " vs "
         << fmt(oracle[0]) << " (tol 0.5%), " << fmt(std::max(err2, err3))
         << " vs " << fmt(oracle[1]) << " (tol 1%), " << fmt(seconds) << " s";
  return {make_result("disk Dirichlet oracle", pass, detail.str(), seconds)};
}

// criterion 4: analytic eigenvalue derivative vs central finite differences
std::vector<CheckResult> criterion_gradient() {
  Stopwatch watch;
  const TriangleMesh mesh = build_sphere_mesh(3);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const VecX weights = mesh.vertex_area_weights();

  // symmetry-broken density so lambda_1 is simple
  FeasibleSet set;
  set.lower_bound = 0.0;
  set.cap = 16.0;
  set.vertex_weights = weights;
  VecX raw(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3 p = mesh.vertices.row(v);
    raw[v] = (1.0 + 0.40 * std::sin(3.0 * p.x() + 0.3) +
              0.25 * std::cos(2.0 * p.y() - 1.0) + 0.15 * std::sin(5.0 * p.z())) /
             (4.0 * kPi);
  }
  const DensityField density = project_to_feasible(raw, set);

  SolverOptions options;
  options.count = 4;
  options.tol = 1e-12;
  options.max_iterations = 2000;
  const SpectralResult base =
      solve_smallest(stiffness, assemble_mass(mesh, density), options);
  const auto group = base.group_containing(1);
  if (group.second - group.first != 1) {
    return {make_result("derivative vs finite differences", false,
                        "symmetry-breaking density left lambda_1 degenerate",
                        watch.seconds())};
  }

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const double h = 1e-5;
  int good = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    VecX direction(mesh.vertex_count());
    for (Index v = 0; v < mesh.vertex_count(); ++v) direction[v] = uniform(rng);

    const double analytic =
        eigenvalue_derivative(base, 1, direction, weights).value();

    DensityField plus = density, minus = density;
    plus.values += h * direction;
    minus.values -= h * direction;
    const double lp =
        solve_smallest(stiffness, assemble_mass(mesh, plus), options).eigenvalues[1];
    const double lm =
        solve_smallest(stiffness, assemble_mass(mesh, minus), options).eigenvalues[1];
    const double fd = (lp - lm) / (2.0 * h);
    const double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-300);
    worst = std::max(worst, rel);
    if (rel < 1e-4) ++good;
  }
  const double seconds = watch.seconds();
  const bool pass = good >= 19;
  std::ostringstream detail;
  detail << good << "/20 directions below 1e-4 relative error (worst "
         << fmt(worst) << ")";
  return {make_result("derivative vs finite differences", pass, detail.str(), seconds)};
}

// brute-force clamp-pattern enumeration used as the projection oracle
bool brute_force_projection(const VecX& raw, const FeasibleSet& set, VecX* out) {
  const Index n = raw.size();
  std::vector<int> pattern(n, 0);  // 0 lower, 1 free, 2 upper
  const double eps = 1e-12;
  for (long code = 0; code < static_cast<long>(std::pow(3.0, n)); ++code) {
    long rest = code;
    for (Index v = 0; v < n; ++v) {
      pattern[v] = static_cast<int>(rest % 3);
      rest /= 3;
    }
    double fixed_mass = 0.0, free_weight = 0.0, free_raw = 0.0;
    for (Index v = 0; v < n; ++v) {
      if (pattern[v] == 0) {
        fixed_mass += set.vertex_weights[v] * set.lower_bound;
      } else if (pattern[v] == 2) {
        fixed_mass += set.vertex_weights[v] * set.cap;
      } else {
        free_weight += set.vertex_weights[v];
        free_raw += set.vertex_weights[v] * raw[v];
      }
    }
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    for (Index v = 0; v < n; ++v) {
      if (pattern[v] == 0) {
        t_hi = std::min(t_hi, set.lower_bound - raw[v]);
      } else if (pattern[v] == 2) {
        t_lo = std::max(t_lo, set.cap - raw[v]);
      } else {
        t_lo = std::max(t_lo, set.lower_bound - raw[v]);
        t_hi = std::min(t_hi, set.cap - raw[v]);
      }
    }
    double t = 0.0;
    if (free_weight > 0.0) {
      t = (set.target_mass - fixed_mass - free_raw) / free_weight;
      if (t < t_lo - eps || t > t_hi + eps) continue;
    } else {
      if (std::abs(fixed_mass - set.target_mass) > 1e-10) continue;
      if (t_lo > t_hi + eps) continue;
      t = 0.5 * (t_lo + t_hi);
    }
    VecX mu(n);
    for (Index v = 0; v < n; ++v) {
      mu[v] = pattern[v] == 0   ? set.lower_bound
              : pattern[v] == 2 ? set.cap
                                : raw[v] + t;
    }
    *out = mu;
    return true;
  }
  return false;
}

// criterion 5: projection vs the enumeration oracle
std::vector<CheckResult> criterion_projection() {
  Stopwatch watch;
  std::mt19937_64 rng(515151);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> size_dist(2, 6);

  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size_dist(rng);
    FeasibleSet set;
    set.vertex_weights = VecX(n);
    for (int v = 0; v < n; ++v) set.vertex_weights[v] = 0.1 + 1.9 * u01(rng);
    set.lower_bound = u01(rng) < 0.4 ? -0.5 : 0.0;
    const double area = set.vertex_weights.sum();
    // keep the uniform density strictly inside the box
    set.cap = (1.0 / area) * (1.5 + 6.0 * u01(rng));
    VecX raw(n);
    for (int v = 0; v < n; ++v) raw[v] = -3.0 + 6.0 * u01(rng);

    const DensityField projected = project_to_feasible(raw, set);
    VecX oracle;
    if (!brute_force_projection(raw, set, &oracle)) {
      ++failures;
      continue;
    }
    worst = std::max(worst, (projected.values - oracle).cwiseAbs().maxCoeff());
  }
  const double seconds = watch.seconds();
  const bool pass = failures == 0 && worst <= 1e-8;
  std::ostringstream detail;
  detail << "100 random instances (n <= 6): max |difference| " << fmt(worst)
         << (failures ? ", oracle failures " + std::to_string(failures) : "");
  return {make_result("projection vs enumeration oracle", pass, detail.str(), seconds)};
}

AscendOptions quick_ascend_options(int budget, std::uint64_t seed) {
  AscendOptions options;
  options.budget = budget;
  options.solver.tol = 1e-9;
  options.solver.seed = seed;
  return options;
}

bool stages_nondecreasing(const ContinuationResult& run, double tol) {
  for (std::size_t s = 1; s < run.trace.stages.size(); ++s) {
    const double prev = run.trace.stages[s - 1].best_lambda;
    const double cur = run.trace.stages[s].best_lambda;
    if (cur < prev * (1.0 - tol)) return false;
  }
  return true;
}

// criteria 6 and 7 share continuation runs on the level-3 sphere
std::vector<CheckResult> criterion_continuation(bool monotonicity) {
  Stopwatch watch;
  const TriangleMesh mesh = build_sphere_mesh(3);
  const std::vector<double> caps = {4.0, 8.0, 16.0, 32.0};

  const ContinuationResult run_k2 =
      continuation(mesh, 2, caps, quick_ascend_options(140, 11), 0.0);

  if (monotonicity) {
    const ContinuationResult run_k1 =
        continuation(mesh, 1, caps, quick_ascend_options(80, 11), 0.0);
    const bool ok1 = stages_nondecreasing(run_k1, 1e-6);
    const bool ok2 = stages_nondecreasing(run_k2, 1e-6);
    std::ostringstream detail;
    detail << "caps (4,8,16,32) on the sphere: k=1 stages [";
    for (const auto& s : run_k1.trace.stages) detail << ' ' << fmt(s.best_lambda);
    detail << " ], k=2 stages [";
    for (const auto& s : run_k2.trace.stages) detail << ' ' << fmt(s.best_lambda);
    detail << " ]";
    return {make_result("continuation monotonicity", ok1 && ok2, detail.str(),
                        watch.seconds())};
  }

  // level-set trends: n * area(E_n) bounded across stages
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& stage : run_k2.trace.stages) {
    lo = std::min(lo, stage.level_sets.n_times_cap_area);
    hi = std::max(hi, stage.level_sets.n_times_cap_area);
  }
  const bool trend_ok = lo > 0.0 && hi / lo < 10.0;

  // paper mode: the negative set vanishes at stage optima
  const ContinuationResult paper =
      continuation(mesh, 2, caps, quick_ascend_options(140, 11), -0.5);
  double worst_neg = 0.0;
  for (const auto& stage : paper.trace.stages) {
    worst_neg = std::max(worst_neg, stage.level_sets.neg_set_area);
  }
  const bool neg_ok = worst_neg < 1e-3;

  std::ostringstream detail;
  detail << "n*area(E_n) range [" << fmt(lo) << ", " << fmt(hi)
         << "] (ratio limit 10); paper-mode max area(E_-) " << fmt(worst_neg)
         << " (limit 1e-3)";
  return {make_result("level-set trends", trend_ok && neg_ok, detail.str(),
                      watch.seconds())};
}

RunConfig sphere_run_config(int level, int k, int budget,
                            const std::string& out_dir) {
  RunConfig config;
  config.surface = "sphere";
  config.subdivision = level;
  config.k = k;
  config.caps = {4.0, 8.0, 16.0, 32.0};
  config.budget = budget;
  config.solver_tol = 1e-9;
  config.seed = 42;
  config.out_dir = out_dir;
  return config;
}

// criterion 8: k=1 sphere end-to-end
std::vector<CheckResult> criterion_endtoend_k1(const std::string& scratch) {
  Stopwatch watch;
  const RunConfig config = sphere_run_config(4, 1, 150, scratch + "/k1");
  const RunArtifacts artifacts = run_pipeline(config);
  const json report = load_json(artifacts.report_path);
  const double lambda = report.at("lambda_estimate").get<double>();
  const int atoms = report.at("decomposition").at("K").get<int>();
  const double seconds = watch.seconds();
  const bool pass = artifacts.exit_code == 0 &&
                    std::abs(lambda - 8.0 * kPi) / (8.0 * kPi) < 0.03 &&
                    atoms == 0 && seconds < 600.0;
  std::ostringstream detail;
  detail << "lambda_1 " << fmt(lambda) << " vs 8*pi = " << fmt(8.0 * kPi)
         << " (tol 3%), K = " << atoms << ", " << fmt(seconds)
         << " s (limit 600)";
  return {make_result("k=1 sphere end-to-end", pass, detail.str(), seconds)};
}

// criterion 9: k=2 sphere end-to-end with a refinement trend
std::vector<CheckResult> criterion_endtoend_k2(const std::string& scratch) {
  Stopwatch watch;
  const RunConfig coarse = sphere_run_config(3, 2, 260, scratch + "/k2-level3");
  const RunConfig fine = sphere_run_config(4, 2, 260, scratch + "/k2-level4");
  const RunArtifacts coarse_run = run_pipeline(coarse);
  const RunArtifacts fine_run = run_pipeline(fine);
  const json coarse_report = load_json(coarse_run.report_path);
  const json fine_report = load_json(fine_run.report_path);

  const double lambda_coarse = coarse_report.at("lambda_estimate").get<double>();
  const double lambda_fine = fine_report.at("lambda_estimate").get<double>();
  const auto& decomposition = fine_report.at("decomposition");
  const int atoms = decomposition.at("K").get<int>();
  const double regular_area = decomposition.at("regular_area").get<double>();
  double c1 = 0.0;
  if (atoms >= 1) c1 = decomposition.at("atoms")[0].at("weight").get<double>();

  const bool value_ok = lambda_fine >= 11.0 * kPi;
  const bool trend_ok =
      lambda_fine > lambda_coarse && lambda_fine < 16.0 * kPi * 1.02;
  const bool shape_ok = atoms == 1 && std::abs(c1 - 0.5) <= 0.15 &&
                        std::abs(regular_area - 0.5) <= 0.15;

  // quantization against the reference weight sets with the limiting value
  bool quant_ok = false;
  if (atoms == 1) {
    MeasureDecomposition dec;
    Atom atom;
    atom.weight = c1;
    dec.atoms.push_back(atom);
    dec.K = 1;
    dec.regular_area = regular_area;
    const std::map<int, double> sphere_table = {{1, 8.0 * kPi}, {2, 16.0 * kPi}};
    const std::map<int, double> class_table = {
        {0, 0.0}, {1, 8.0 * kPi}, {2, 16.0 * kPi}};
    quant_ok = check_quantization(dec, 16.0 * kPi, sphere_table, class_table, 0.15)
                   .all_pass;
  }

  const double seconds = watch.seconds();
  const bool pass = fine_run.exit_code == 0 && value_ok && trend_ok &&
                    shape_ok && quant_ok && seconds < 1800.0;
  std::ostringstream detail;
  detail << "lambda_2 " << fmt(lambda_fine) << " at level 4 (floor "
         << fmt(11.0 * kPi) << "), level-3 value " << fmt(lambda_coarse)
         << " -> increasing toward " << fmt(16.0 * kPi) << "; K = " << atoms
         << ", c_1 = " << fmt(c1) << ", A_r = " << fmt(regular_area)
         << " (each within 0.15 of 0.5), quantization "
         << (quant_ok ? "pass" : "fail") << ", " << fmt(seconds)
         << " s (limit 1800)";
  return {make_result("k=2 sphere end-to-end", pass, detail.str(), seconds)};
}

// criterion 10: detector soundness on synthetic bumps, specificity on
// smooth densities
std::vector<CheckResult> criterion_detector() {
  Stopwatch watch;
  const TriangleMesh mesh = build_sphere_mesh(4);
  const VecX weights = mesh.vertex_area_weights();
  const double edge = mesh.mean_edge_length();
  const double area = mesh.total_area();
  std::mt19937_64 rng(909090);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<Index> vertex_dist(0, mesh.vertex_count() - 1);

  AtomDetectionOptions options;
  options.radius_scale = 10.0 * edge;

  auto bump_profile = [&](Index center) {
    VecX profile = VecX::Zero(mesh.vertex_count());
    for (Index v : vertices_within(mesh, center, 2.0 * edge)) {
      profile[v] = 1.0 - mesh.geodesic_distance(center, v) / (2.5 * edge);
    }
    profile = profile.cwiseMax(0.0);
    profile /= weights.dot(profile);
    return profile;
  };

  int sound = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k_true = 1 + trial % 2;
    std::vector<Index> centers;
    std::vector<double> masses;
    while (static_cast<int>(centers.size()) < k_true) {
      const Index candidate = vertex_dist(rng);
      bool far = true;
      for (Index c : centers) {
        if (mesh.geodesic_distance(c, candidate) < 22.0 * edge) far = false;
      }
      if (far) centers.push_back(candidate);
    }
    double total = 0.0;
    for (int i = 0; i < k_true; ++i) {
      masses.push_back(0.1 + 0.3 * u01(rng));
      total += masses.back();
    }
    VecX density = VecX::Constant(mesh.vertex_count(), (1.0 - total) / area);
    for (int i = 0; i < k_true; ++i) density += masses[i] * bump_profile(centers[i]);

    const std::vector<StageDensity> stages = {{4.0, density}, {16.0, density}};
    const MeasureDecomposition dec = detect_atoms(mesh, stages, 5, options);
    bool ok = dec.K == k_true;
    if (ok) {
      for (const auto& atom : dec.atoms) {
        double best = 1.0;
        for (int i = 0; i < k_true; ++i) {
          if (mesh.geodesic_distance(atom.vertex, centers[i]) < 5.0 * edge) {
            best = std::min(best, std::abs(atom.weight - masses[i]));
          }
        }
        ok = ok && best <= 0.05;
      }
    }
    if (ok) ++sound;
  }

  int specific = 0;
  for (int trial = 0; trial < 20; ++trial) {
    VecX raw(mesh.vertex_count());
    const double a1 = u01(rng), a2 = u01(rng), a3 = u01(rng);
    const double p1 = 6.28 * u01(rng), p2 = 6.28 * u01(rng);
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3 p = mesh.vertices.row(v);
      raw[v] = (1.0 + 0.5 * a1 * std::sin(2.0 * p.x() + p1) +
                0.3 * a2 * std::cos(3.0 * p.y() + p2) + 0.2 * a3 * p.z()) /
               area;
    }
    FeasibleSet set;
    set.lower_bound = 0.0;
    set.cap = 16.0;
    set.vertex_weights = weights;
    const DensityField smooth = project_to_feasible(raw, set);
    const std::vector<StageDensity> stages = {{4.0, smooth.values},
                                              {16.0, smooth.values}};
    const MeasureDecomposition dec = detect_atoms(mesh, stages, 5, options);
    if (dec.K == 0) ++specific;
  }

  const double seconds = watch.seconds();
  const bool pass = sound == 20 && specific == 20;
  std::ostringstream detail;
  detail << "soundness " << sound << "/20 (exact K, weights within 0.05), "
         << "specificity " << specific << "/20 (K = 0 on smooth densities)";
  return {make_result("bubble detector soundness/specificity", pass,
                      detail.str(), seconds)};
}

// criterion 11: harmonic-map certificate on the round sphere
std::vector<CheckResult> criterion_certificate() {
  Stopwatch watch;
  const TriangleMesh mesh = build_sphere_mesh(5);
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const VecX weights = mesh.vertex_area_weights();
  const DensityField density = uniform_density(mesh, 0.0, 4.0);
  SolverOptions options;
  options.count = 4;
  options.tol = 1e-10;
  const SpectralResult result =
      solve_smallest(stiffness, assemble_mass(mesh, density), options);
  const auto group = result.group_containing(1);

  std::vector<Index> support(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) support[v] = v;
  const HarmonicMapCertificate cert = harmonic_map_certificate(
      stiffness, result, group, support, weights, 1e-2);

  const double lambda = result.eigenvalues[1];
  const double identity_error =
      std::abs(cert.dirichlet_energy - lambda) / lambda;  // regular mass is 1
  const double seconds = watch.seconds();
  const bool pass =
      cert.ell == 3 && cert.sphere_defect < 1e-2 && identity_error < 0.05;
  std::ostringstream detail;
  detail << "ell = " << cert.ell << ", sphere defect " << fmt(cert.sphere_defect)
         << " (limit 1e-2), energy " << fmt(cert.dirichlet_energy)
         << " vs lambda*mass " << fmt(lambda) << " (err "
         << fmt(identity_error) << ", limit 5%)";
  return {make_result("harmonic map certificate", pass, detail.str(), seconds)};
}

void collect_numeric(const json& node, const std::string& path,
                     std::vector<std::pair<std::string, double>>* out) {
  if (node.is_number()) {
    out->push_back({path, node.get<double>()});
  } else if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      if (key == "timings_seconds") continue;  // wall clock is not reproducible
      collect_numeric(value, path + "/" + key, out);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      collect_numeric(node[i], path + "[" + std::to_string(i) + "]", out);
    }
  }
}

// criterion 12: determinism of the pipeline for a fixed config and seed
std::vector<CheckResult> criterion_determinism(const std::string& scratch) {
  Stopwatch watch;
  RunConfig config = sphere_run_config(2, 1, 30, scratch + "/det-a");
  config.seed = 7;
  const RunArtifacts first = run_pipeline(config);
  config.out_dir = scratch + "/det-b";
  const RunArtifacts second = run_pipeline(config);

  std::vector<std::pair<std::string, double>> a, b;
  collect_numeric(load_json(first.report_path), "", &a);
  collect_numeric(load_json(second.report_path), "", &b);

  bool pass = a.size() == b.size();
  double worst = 0.0;
  std::string worst_path;
  if (pass) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].first != b[i].first) {
        pass = false;
        worst_path = a[i].first + " vs " + b[i].first;
        break;
      }
      const double diff = std::abs(a[i].second - b[i].second);
      if (diff > worst) {
        worst = diff;
        worst_path = a[i].first;
      }
    }
  }
  pass = pass && worst <= 1e-10;
  const double seconds = watch.seconds();
  std::ostringstream detail;
  detail << a.size() << " numeric fields compared, max |difference| "
         << fmt(worst) << (worst_path.empty() ? "" : " at " + worst_path);
  return {make_result("run determinism", pass, detail.str(), seconds)};
}

}  // namespace

std::vector<CheckResult> acceptance_criterion(int number,
                                              const std::string& scratch_dir) {
  switch (number) {
    case 1:
      return criterion_sphere_oracle();
    case 2:
      return criterion_torus_oracle();
    case 3:
      return criterion_disk_oracle();
    case 4:
      return criterion_gradient();
    case 5:
      return criterion_projection();
    case 6:
      return criterion_continuation(true);
    case 7:
      return criterion_continuation(false);
    case 8:
      return criterion_endtoend_k1(scratch_dir);
    case 9:
      return criterion_endtoend_k2(scratch_dir);
    case 10:
      return criterion_detector();
    case 11:
      return criterion_certificate();
    case 12:
      return criterion_determinism(scratch_dir);
    default:
      throw ConfigurationError("acceptance criterion number outside 1..12");
  }
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {
      "oracles", "gradients", "projection", "endtoend-k1", "endtoend-k2"};
  return names;
}

std::vector<CheckResult> verify_suite(const std::string& name,
                                      const std::string& scratch_dir) {
  if (name == "oracles") {
    std::vector<CheckResult> out;
    for (int c : {1, 2, 3}) {
      for (auto& r : acceptance_criterion(c, scratch_dir)) out.push_back(std::move(r));
    }
    return out;
  }
  if (name == "gradients") return acceptance_criterion(4, scratch_dir);
  if (name == "projection") return acceptance_criterion(5, scratch_dir);
  if (name == "endtoend-k1") return acceptance_criterion(8, scratch_dir);
  if (name == "endtoend-k2") return acceptance_criterion(9, scratch_dir);
  throw ConfigurationError("unknown verify suite '" + name + "'");
}

}  // namespace conformax
