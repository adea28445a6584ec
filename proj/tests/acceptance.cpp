// Runs the thirteen acceptance criteria and prints one line per criterion.
// Set BOSATOM_ACCEPTANCE_QUICK=1 for the reduced grids.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "verify.hpp"

int main() {
  bosatom::cli::VerifyOptions opts;
  const char* quick = std::getenv("BOSATOM_ACCEPTANCE_QUICK");
  opts.quick = quick && *quick && std::string(quick) != "0";
  opts.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const auto results = bosatom::cli::run_verify(opts);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("criterion %2d: %s  %s (%.1f s)\n", r.id, r.passed() ? "PASS" : "FAIL", r.title.c_str(), r.seconds);
    if (!r.passed()) {
      ++failed;
      if (!r.error.empty()) std::printf("    error: %s\n", r.error.c_str());
      for (const auto& c : r.result.checks)
        if (!c.pass && !c.informational)
          std::printf("    %s: value %.6g, bound %.6g (%s)\n", c.name.c_str(), c.value, c.bound, c.statement.c_str());
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
