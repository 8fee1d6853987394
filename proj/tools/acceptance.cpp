#include <cstdio>
#include <cstring>

#include "tractor_calc/acceptance.hpp"

// One PASS/FAIL line per criterion; exit 0 only if all pass.
int main(int argc, char** argv) {
  auto suite = tcalc::acceptance_suite();
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failed = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    auto r = suite[i]();
    std::printf("%s\n", r.line().c_str());
    std::fflush(stdout);
    if (!r.pass()) ++failed;
  }
  return failed ? 2 : 0;
}
