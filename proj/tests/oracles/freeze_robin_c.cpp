// Measures c in delta = c N.D at one probe point per (d, w) and prints the
// golden table. Build target: freeze_robin_c.
#include <cstdio>

#include "tractor_calc/hypersurface.hpp"

using namespace tcalc;

int main() {
  std::printf("d,w,c\n");
  for (int d : {4, 5, 6}) {
    Hypersurface s{ScalarJetField([](std::span<const Jet> y) {
                     Jet r = y[0] * y[0] * 0.5;
                     for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i] * (1.0 + 0.3 * i);
                     return (0.6 - r) * 0.5;
                   }),
                   +1, sphere_metric(d), "ellipsoid", {}};
    ScalarJetField u([](std::span<const Jet> y) { return cos(y[0]) * (1.0 + y[1] * 0.5) + exp(y[y.size() - 1] * 0.4); });
    for (double w : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0}) {
      if (w == 1.0 - d / 2.0) continue;
      auto p = s.sample(1, 1)[0];
      std::printf("%d,%g,%.17g\n", d, w, robin_delta(s, u, w, p) / normal_D(s, u, w, p));
    }
  }
}
