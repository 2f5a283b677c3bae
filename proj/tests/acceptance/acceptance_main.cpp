// One line per criterion. Failures are reported, not fatal: the exit status is
// non-zero only when a check could not be evaluated at all.

#include <cmath>
#include <cstdio>

#include "ricci/acceptance.hpp"

int main() {
  auto results = ricci::run_acceptance();
  int broken = 0, passed = 0;
  for (const auto& r : results) {
    std::printf("[%s] %2d %-15s %6.1fs", r.pass ? "PASS" : "FAIL", r.info.id, r.info.slug.c_str(), r.seconds);
    if (!std::isnan(r.order)) std::printf("  order %.2f", r.order);
    for (const auto& [k, v] : r.metrics) std::printf("  %s=%.4g", k.c_str(), v);
    std::printf("\n");
    for (const auto& f : r.failures) std::printf("       - %s\n", f.c_str());
    if (!r.error.empty()) {
      std::printf("       ! %s\n", r.error.c_str());
      ++broken;
    }
    passed += r.pass;
  }
  std::printf("%d/%zu criteria pass\n", passed, results.size());
  return broken ? 1 : 0;
}
