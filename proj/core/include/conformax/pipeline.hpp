#pragma once

#include <string>

#include "conformax/config.hpp"

namespace conformax {

struct RunArtifacts {
  int exit_code = 0;
  std::string report_path;
  std::string message;
};

/// Execute the full pipeline (optimize -> decompose -> quantize -> certify)
/// and write report.json, trace.jsonl, density_final.csv, stage_summary.csv
/// and plotdata/*.csv into the configured output directory.
///
/// Exit code 0 iff the pipeline completed; scientific pass/fail lives in the
/// report, never in the exit code. A solver hard failure yields exit 1 with
/// a partial report.
RunArtifacts run_pipeline(const RunConfig& config);

}  // namespace conformax
