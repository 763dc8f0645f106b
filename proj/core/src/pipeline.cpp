#include "conformax/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>

#include <json.hpp>

#include "conformax/assembly.hpp"
#include "conformax/certify.hpp"
#include "conformax/concentration.hpp"
#include "conformax/density_opt.hpp"
#include "conformax/eigensolver.hpp"
#include "conformax/errors.hpp"
#include "conformax/report.hpp"
#include "conformax/surface.hpp"

namespace conformax {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double finite_or(double x, double fallback = 0.0) {
  return std::isfinite(x) ? x : fallback;
}

TriangleMesh build_configured_mesh(const RunConfig& config) {
  if (config.surface == "sphere") return build_sphere_mesh(config.subdivision);
  return build_torus_mesh(config.nx, config.ny, config.width, config.height);
}

AscendOptions make_ascend_options(const RunConfig& config) {
  AscendOptions options;
  options.budget = config.budget;
  options.solver.tol = config.solver_tol;
  options.solver.group_gap = config.group_gap;
  options.solver.seed = config.seed;
  options.solver.paper_mode = config.lower_bound_mode == "paper";
  return options;
}

json config_to_json(const RunConfig& config) {
  json out;
  out["surface"] = config.surface;
  out["subdivision"] = config.subdivision;
  out["nx"] = config.nx;
  out["ny"] = config.ny;
  out["width"] = config.width;
  out["height"] = config.height;
  out["k"] = config.k;
  out["caps"] = config.caps;
  out["lower_bound_mode"] = config.lower_bound_mode;
  out["budget"] = config.budget;
  out["solver_tol"] = config.solver_tol;
  out["group_gap"] = config.group_gap;
  out["seed"] = config.seed;
  out["threads"] = config.threads;
  out["out"] = config.out_dir;
  out["atom_threshold"] = config.atom_threshold;
  out["atom_radius_edges"] = config.atom_radius_edges;
  out["quantization_tol"] = config.quantization_tol;
  out["membership_tol"] = config.membership_tol;
  out["certificate_tol"] = config.certificate_tol;
  out["class_table_mode"] = config.class_table_mode;
  return out;
}

json empty_quantization_entry() {
  return json{{"value", 0.0},
              {"nearest_candidate", 0.0},
              {"candidate_j", 0},
              {"relative_distance", 0.0},
              {"pass", false}};
}

json report_skeleton(const RunConfig& config, const TriangleMesh& mesh) {
  json report;
  report["schema_version"] = "1";
  report["generator"] = "conformax";
  report["config"] = config_to_json(config);
  report["surface"] = {
      {"kind", config.surface},
      {"vertex_count", mesh.vertex_count()},
      {"triangle_count", mesh.triangle_count()},
      {"area", mesh.total_area()},
      {"mean_edge_length", mesh.mean_edge_length()}};
  report["stages"] = json::array();
  report["lambda_estimate"] = 0.0;
  report["lambda_group"] = json::array();
  report["decomposition"] = {{"K", 0},
                             {"k_bound_satisfied", true},
                             {"regular_area", 0.0},
                             {"mass_check", 0.0},
                             {"atoms", json::array()},
                             {"warnings", json::array()}};
  report["quantization"] = {{"tolerance", config.quantization_tol},
                            {"lambda_reference", 0.0},
                            {"sphere_candidates", json::array()},
                            {"class_candidates", json::array()},
                            {"atoms", json::array()},
                            {"regular_area", empty_quantization_entry()},
                            {"all_pass", false}};
  report["singular_spectra"] = json::array();
  report["membership"] = {{"lambda", 0.0},
                          {"tolerance", config.membership_tol},
                          {"vacuous", true},
                          {"atoms", json::array()},
                          {"regular",
                           {{"defined", false},
                            {"nearest", 0.0},
                            {"relative_distance", 0.0},
                            {"pass", false}}}};
  report["certificate"] = {{"computed", false}, {"ell", 0},
                           {"sphere_defect", 0.0}, {"dirichlet_energy", 0.0},
                           {"energy_identity_reference", 0.0},
                           {"valid", false},
                           {"tolerance", config.certificate_tol},
                           {"group", json::array()}};
  report["timings_seconds"] = {{"total", 0.0}, {"continuation", 0.0}, {"analysis", 0.0}};
  report["exit"] = {{"completed", false}, {"message", ""}};
  return report;
}

void write_trace_files(const fs::path& dir, const OptimizationTrace& trace) {
  {
    std::ofstream out(dir / "trace.jsonl");
    for (const auto& rec : trace.iterations) {
      json line = {{"stage", rec.stage},
                   {"iteration", rec.iteration},
                   {"cap", rec.cap},
                   {"lambda_k", finite_or(rec.lambda_k)},
                   {"lambda_group", rec.lambda_group},
                   {"step_size", rec.step_size},
                   {"projected_step_norm", rec.projected_step_norm},
                   {"cap_set_area", rec.cap_set_area},
                   {"neg_set_area", rec.neg_set_area},
                   {"accepted", rec.accepted}};
      out << line.dump() << '\n';
    }
  }
  {
    std::ofstream out(dir / "stage_summary.csv");
    out.precision(17);
    out << "stage,cap,best_lambda,iterations,cap_set_area,n_times_cap_area,"
           "neg_set_area,note\n";
    for (const auto& stage : trace.stages) {
      out << stage.stage << ',' << stage.cap << ','
          << finite_or(stage.best_lambda) << ',' << stage.iterations << ','
          << stage.level_sets.cap_set_area << ','
          << stage.level_sets.n_times_cap_area << ','
          << stage.level_sets.neg_set_area << ',' << stage.note << '\n';
    }
  }
}

void write_plotdata(const fs::path& dir, const OptimizationTrace& trace,
                    const DensityField& final_density, const VecX& weights,
                    double lower_bound, double cap) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "eigenvalue_history.csv");
    out.precision(17);
    out << "stage,iteration,cap,lambda_k,step_size,accepted\n";
    for (const auto& rec : trace.iterations) {
      out << rec.stage << ',' << rec.iteration << ',' << rec.cap << ','
          << finite_or(rec.lambda_k) << ',' << rec.step_size << ','
          << (rec.accepted ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out(dir / "levelset_vs_n.csv");
    out.precision(17);
    out << "cap,cap_set_area,n_times_cap_area,neg_set_area\n";
    for (const auto& stage : trace.stages) {
      out << stage.cap << ',' << stage.level_sets.cap_set_area << ','
          << stage.level_sets.n_times_cap_area << ','
          << stage.level_sets.neg_set_area << '\n';
    }
  }
  {
    std::ofstream out(dir / "mass_histogram.csv");
    out.precision(17);
    out << "bin_lower,bin_upper,mass\n";
    const int bins = 40;
    const double lo = lower_bound, hi = cap;
    std::vector<double> mass(bins, 0.0);
    for (Index v = 0; v < final_density.values.size(); ++v) {
      const double x = final_density.values[v];
      int b = static_cast<int>((x - lo) / (hi - lo) * bins);
      b = std::min(std::max(b, 0), bins - 1);
      mass[b] += weights[v] * x;
    }
    for (int b = 0; b < bins; ++b) {
      out << lo + (hi - lo) * b / bins << ',' << lo + (hi - lo) * (b + 1) / bins
          << ',' << mass[b] << '\n';
    }
  }
}

void write_density_csv(const fs::path& path, const VecX& values) {
  std::ofstream out(path);
  out.precision(17);
  out << "vertex,mu\n";
  for (Index v = 0; v < values.size(); ++v) out << v << ',' << values[v] << '\n';
}

}  // namespace

RunArtifacts run_pipeline(const RunConfig& config) {
  config.validate();
  RunArtifacts artifacts;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [](auto since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
        .count();
  };

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  const fs::path report_path = out_dir / "report.json";
  artifacts.report_path = report_path.string();

  const TriangleMesh mesh = build_configured_mesh(config);
  const VecX weights = mesh.vertex_area_weights();
  json report = report_skeleton(config, mesh);

  auto finalize = [&](bool completed, const std::string& message, int code) {
    report["exit"]["completed"] = completed;
    report["exit"]["message"] = message;
    report["timings_seconds"]["total"] = elapsed(t_start);
    {
      std::ofstream out(report_path);
      out << report.dump(2) << '\n';
    }
    {
      std::ofstream out(out_dir / "report-schema.json");
      out << report_schema_text();
    }
    validate_report_file(report_path.string());
    artifacts.exit_code = code;
    artifacts.message = message;
    return artifacts;
  };

  AscendOptions ascend_options = make_ascend_options(config);

  ContinuationResult cont;
  const auto t_cont = std::chrono::steady_clock::now();
  try {
    cont = continuation(mesh, config.k, config.caps, ascend_options,
                        config.lower_bound());
  } catch (const Error& err) {
    return finalize(false, std::string("continuation failed: ") + err.what(), 1);
  }
  report["timings_seconds"]["continuation"] = elapsed(t_cont);

  write_trace_files(out_dir, cont.trace);
  write_density_csv(out_dir / "density_final.csv", cont.final_density.values);
  write_plotdata(out_dir / "plotdata", cont.trace, cont.final_density, weights,
                 config.lower_bound(), config.caps.back());

  bool degraded = false;
  std::string degraded_message;

  for (const auto& stage : cont.trace.stages) {
    report["stages"].push_back({{"stage", stage.stage},
                                {"cap", stage.cap},
                                {"best_lambda", finite_or(stage.best_lambda)},
                                {"iterations", stage.iterations},
                                {"cap_set_area", stage.level_sets.cap_set_area},
                                {"n_times_cap_area", stage.level_sets.n_times_cap_area},
                                {"neg_set_area", stage.level_sets.neg_set_area},
                                {"note", stage.note}});
    if (!stage.note.empty() && stage.note.rfind("eigensolver failed", 0) == 0) {
      degraded = true;
      degraded_message = stage.note;
    }
  }
  const double lambda_estimate = finite_or(cont.final_lambda);
  report["lambda_estimate"] = lambda_estimate;

  const auto t_analysis = std::chrono::steady_clock::now();

  // ---- decomposition --------------------------------------------------
  std::vector<StageDensity> stages;
  for (std::size_t s = 0; s < cont.stage_densities.size(); ++s) {
    stages.push_back({config.caps[s], cont.stage_densities[s].values});
  }
  AtomDetectionOptions atom_options;
  atom_options.threshold = config.atom_threshold;
  atom_options.radius_scale = config.atom_radius_edges * mesh.mean_edge_length();

  MeasureDecomposition decomposition;
  if (stages.size() >= 2) {
    decomposition = detect_atoms(mesh, stages, config.k, atom_options);
  } else {
    decomposition.regular_density = cont.final_density.values;
    decomposition.regular_area = 1.0;
    decomposition.warnings.push_back(
        "single-stage continuation: atom detection skipped");
  }
  {
    auto& dec = report["decomposition"];
    dec["K"] = decomposition.K;
    dec["k_bound_satisfied"] = decomposition.k_bound_satisfied;
    dec["regular_area"] = decomposition.regular_area;
    double atom_mass = 0.0;
    for (const auto& atom : decomposition.atoms) atom_mass += atom.weight;
    dec["mass_check"] = atom_mass + decomposition.regular_area;
    for (const auto& atom : decomposition.atoms) {
      const Vec3 p = mesh.vertices.row(atom.vertex);
      dec["atoms"].push_back({{"vertex", atom.vertex},
                              {"weight", atom.weight},
                              {"ball_radius", atom.ball_radius},
                              {"position", {p.x(), p.y(), p.z()}},
                              {"stage_masses", atom.stage_masses}});
    }
    for (const auto& w : decomposition.warnings) dec["warnings"].push_back(w);
  }

  // ---- quantization ----------------------------------------------------
  const double pi = std::numbers::pi;
  std::map<int, double> sphere_table;
  for (int j = 1; j <= config.k; ++j) sphere_table[j] = 8.0 * pi * j;

  std::map<int, double> class_table;
  class_table[0] = 0.0;
  class_table[config.k] = lambda_estimate;
  for (int j = 1; j < config.k; ++j) {
    if (config.class_table_mode == "reference" && config.surface == "sphere") {
      class_table[j] = 8.0 * pi * j;
    } else if (config.class_table_mode == "reference" && j == 1 &&
               config.surface == "torus" && config.width == config.height) {
      class_table[j] = 4.0 * pi * pi;  // flat square torus is conformally maximal
    } else {
      // self-consistent bootstrap: run the optimizer for the lower index
      AscendOptions boot = ascend_options;
      boot.budget = std::min(boot.budget, 200);
      try {
        const ContinuationResult lower =
            continuation(mesh, j, config.caps, boot, config.lower_bound());
        class_table[j] = finite_or(lower.final_lambda);
      } catch (const Error&) {
        class_table[j] = 0.0;
      }
    }
  }

  QuantizationCheck quantization;
  if (lambda_estimate > 0.0) {
    quantization = check_quantization(decomposition, lambda_estimate,
                                      sphere_table, class_table,
                                      config.quantization_tol);
    auto entry_to_json = [](const QuantizationEntry& e) {
      return json{{"value", e.value},
                  {"nearest_candidate", e.nearest_candidate},
                  {"candidate_j", e.candidate_j},
                  {"relative_distance", finite_or(e.relative_distance, 1e300)},
                  {"pass", e.pass}};
    };
    auto& q = report["quantization"];
    q["lambda_reference"] = lambda_estimate;
    q["sphere_candidates"] = quantization.sphere_candidates;
    q["class_candidates"] = quantization.class_candidates;
    for (const auto& e : quantization.atom_checks) q["atoms"].push_back(entry_to_json(e));
    q["regular_area"] = entry_to_json(quantization.regular_area_check);
    q["all_pass"] = quantization.all_pass;
  }

  // ---- singular spectra -------------------------------------------------
  std::vector<StageDensity> late_stages(
      stages.end() - std::min<std::size_t>(2, stages.size()), stages.end());
  std::vector<SingularSpectrum> spectra;
  if (!decomposition.atoms.empty()) {
    const double r_final = decomposition.atoms.front().ball_radius;
    double r_base = std::max(6.0 * mesh.mean_edge_length(), 1.5 * r_final);
    r_base = std::min(r_base, 0.9 * mesh.ball_radius_limit());
    const std::vector<double> radii = {r_base, 0.75 * r_base, 0.55 * r_base};

    SingularSpectrumOptions sing_options;
    sing_options.solver.tol = config.solver_tol;
    sing_options.solver.seed = config.seed;

    auto solve_one = [&](Index vertex) {
      return singular_spectrum(mesh, vertex, radii, late_stages, sing_options);
    };
    if (config.threads > 1 && decomposition.atoms.size() > 1) {
      std::vector<std::future<SingularSpectrum>> jobs;
      for (const auto& atom : decomposition.atoms) {
        jobs.push_back(std::async(std::launch::async, solve_one, atom.vertex));
      }
      for (auto& job : jobs) {
        try {
          spectra.push_back(job.get());
        } catch (const Error& err) {
          report["decomposition"]["warnings"].push_back(
              std::string("singular spectrum failed: ") + err.what());
        }
      }
    } else {
      for (const auto& atom : decomposition.atoms) {
        try {
          spectra.push_back(solve_one(atom.vertex));
        } catch (const Error& err) {
          report["decomposition"]["warnings"].push_back(
              std::string("singular spectrum failed: ") + err.what());
        }
      }
    }
    for (const auto& sp : spectra) {
      json modes = json::array();
      for (std::size_t m = 0; m < sp.tables.size(); ++m) {
        json values = json::array();
        for (int s = 0; s < sp.tables[m].rows(); ++s) {
          json row = json::array();
          for (int r = 0; r < sp.tables[m].cols(); ++r) {
            row.push_back(finite_or(sp.tables[m](s, r)));
          }
          values.push_back(row);
        }
        modes.push_back({{"mode", static_cast<int>(m)},
                         {"values_by_stage", values},
                         {"extrapolated", finite_or(sp.extrapolated[m])},
                         {"error_bar", finite_or(sp.error_bars[m])},
                         {"monotone_in_radius", static_cast<bool>(sp.monotone_in_radius[m])}});
      }
      report["singular_spectra"].push_back({{"atom_vertex", sp.atom_vertex},
                                            {"radii", sp.radii},
                                            {"stage_caps", sp.stage_caps},
                                            {"modes", modes},
                                            {"no_atom", sp.no_atom},
                                            {"warnings", sp.warnings}});
    }
  }

  // ---- regular spectrum, membership, certificate ------------------------
  const StiffnessForm stiffness = assemble_stiffness(mesh);
  const double regular_mass = weights.dot(decomposition.regular_density);
  SpectralResult regular_result;
  bool regular_available = false;
  if (regular_mass > 1e-8) {
    DensityField regular;
    regular.values = decomposition.regular_density;
    regular.lower_bound = 0.0;
    regular.cap = config.caps.back();
    SolverOptions solver;
    solver.count = config.k + 5;
    solver.tol = config.solver_tol;
    solver.seed = config.seed;
    solver.group_gap = config.group_gap;
    try {
      regular_result =
          solve_smallest(stiffness, assemble_mass(mesh, regular), solver);
      regular_available = true;
    } catch (const Error& err) {
      degraded = true;
      degraded_message = std::string("regular spectrum solve failed: ") + err.what();
    }
  }

  {
    const MembershipReport membership = membership_report(
        lambda_estimate, spectra,
        regular_available ? regular_result.eigenvalues : VecX(),
        config.membership_tol);
    auto& ms = report["membership"];
    ms["lambda"] = membership.lambda_k;
    ms["vacuous"] = membership.singular_vacuous;
    for (const auto& atom : membership.atoms) {
      ms["atoms"].push_back({{"vertex", atom.vertex},
                             {"nearest_singular", finite_or(atom.nearest_singular)},
                             {"relative_distance", finite_or(atom.relative_distance, 1e300)},
                             {"pass", atom.pass}});
    }
    ms["regular"]["defined"] = regular_available;
    if (regular_available) {
      ms["regular"]["nearest"] = finite_or(membership.nearest_regular);
      ms["regular"]["relative_distance"] = finite_or(membership.regular_distance, 1e300);
      ms["regular"]["pass"] = membership.regular_pass;
    }
  }

  if (regular_available) {
    // group of the regular spectrum nearest the lambda estimate
    int nearest = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < regular_result.count(); ++i) {
      const double d = std::abs(regular_result.eigenvalues[i] - lambda_estimate);
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    const auto group = regular_result.group_containing(nearest);
    std::vector<Index> support;
    const double floor_value = 1e-12 * decomposition.regular_density.maxCoeff();
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
      if (decomposition.regular_density[v] > floor_value) support.push_back(v);
    }
    if (!support.empty()) {
      const HarmonicMapCertificate certificate = harmonic_map_certificate(
          stiffness, regular_result, group, support, weights,
          config.certificate_tol);
      auto& c = report["certificate"];
      c["computed"] = true;
      c["ell"] = certificate.ell;
      c["sphere_defect"] = finite_or(certificate.sphere_defect, 1e300);
      c["dirichlet_energy"] = finite_or(certificate.dirichlet_energy);
      c["energy_identity_reference"] =
          finite_or(regular_result.eigenvalues[nearest] * regular_mass);
      c["valid"] = certificate.valid;
      for (int i = group.first; i < group.second; ++i) {
        c["group"].push_back(regular_result.eigenvalues[i]);
      }
    }
  }

  if (report["stages"].size() > 0) {
    // group of lambda values around index k at the terminal density
    for (const auto& rec : cont.trace.iterations) {
      (void)rec;
    }
    try {
      SolverOptions solver;
      solver.count = config.k + 5;
      solver.tol = config.solver_tol;
      solver.seed = config.seed;
      solver.group_gap = config.group_gap;
      solver.paper_mode = config.lower_bound_mode == "paper";
      const SpectralResult terminal = solve_smallest(
          stiffness, assemble_mass(mesh, cont.final_density), solver);
      const auto group = terminal.group_containing(config.k);
      for (int i = group.first; i < group.second; ++i) {
        report["lambda_group"].push_back(terminal.eigenvalues[i]);
      }
    } catch (const Error&) {
      // terminal diagnostics are optional; the estimate itself stands
    }
  }

  report["timings_seconds"]["analysis"] = elapsed(t_analysis);
  if (degraded) {
    return finalize(false, degraded_message, 1);
  }
  return finalize(true, "pipeline completed", 0);
}

}  // namespace conformax
