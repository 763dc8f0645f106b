#pragma once

#include <string>
#include <vector>

namespace conformax {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kAcceptanceCriteria = 12;

/// Run one acceptance criterion (1..12). Pipeline-based criteria write their
/// artifacts under `scratch_dir`.
std::vector<CheckResult> acceptance_criterion(int number,
                                              const std::string& scratch_dir);

/// Named verification suite: oracles | gradients | projection |
/// endtoend-k1 | endtoend-k2. Throws ConfigurationError for unknown names.
std::vector<CheckResult> verify_suite(const std::string& name,
                                      const std::string& scratch_dir);

const std::vector<std::string>& verify_suite_names();

}  // namespace conformax
