#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace conformax {

/// Run configuration, parsed from a flat key = value file (see
/// docs/config-format.md). Unknown keys are rejected.
struct RunConfig {
  std::string surface = "sphere";  ///< sphere | torus
  int subdivision = 4;             ///< sphere resolution
  int nx = 64, ny = 64;            ///< torus grid
  double width = 1.0, height = 1.0;

  int k = 1;
  std::vector<double> caps = {4.0, 8.0, 16.0, 32.0};
  std::string lower_bound_mode = "zero";  ///< zero | paper
  int budget = 500;
  double solver_tol = 1e-9;
  double group_gap = 1e-3;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string out_dir = "out";

  double atom_threshold = 0.05;
  double atom_radius_edges = 10.0;  ///< r0 in coarsest-stage mesh edges
  double quantization_tol = 0.15;
  double membership_tol = 0.1;
  double certificate_tol = 0.05;
  std::string class_table_mode = "bootstrap";  ///< bootstrap | reference

  double lower_bound() const { return lower_bound_mode == "paper" ? -0.5 : 0.0; }
  void validate() const;  ///< throws ConfigurationError
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Canonical key = value echo of a configuration (written into run reports).
std::string format_run_config(const RunConfig& config);

}  // namespace conformax
