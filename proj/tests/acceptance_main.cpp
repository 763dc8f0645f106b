// Acceptance suite: runs every criterion and prints one pass/fail line per
// criterion. Exit status 0 iff all pass.

#include <cstdio>
#include <filesystem>
#include <string>

#include "conformax/errors.hpp"
#include "conformax/verify.hpp"

int main() {
  const std::string scratch =
      (std::filesystem::temp_directory_path() / "conformax-acceptance").string();
  std::filesystem::create_directories(scratch);

  int failed = 0;
  for (int number = 1; number <= conformax::kAcceptanceCriteria; ++number) {
    std::vector<conformax::CheckResult> results;
    try {
      results = conformax::acceptance_criterion(number, scratch);
    } catch (const conformax::Error& err) {
      std::printf("FAIL  [%2d] criterion aborted: %s\n", number, err.what());
      ++failed;
      continue;
    }
    for (const auto& result : results) {
      std::printf("%s  [%2d] %s — %s (%.1f s)\n", result.pass ? "PASS" : "FAIL",
                  number, result.name.c_str(), result.detail.c_str(),
                  result.seconds);
      if (!result.pass) ++failed;
    }
    std::fflush(stdout);
  }
  if (failed > 0) {
    std::printf("%d criterion check(s) failed\n", failed);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
