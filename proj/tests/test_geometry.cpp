#include <catch_amalgamated.hpp>

#include <cmath>

#include "tractor_calc/geometry.hpp"

using namespace tcalc;
using Catch::Matchers::WithinAbs;

namespace {
double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}
}  // namespace

TEST_CASE("flat metric has vanishing curvature") {
  auto g = flat_metric(4);
  Point p{0.1, 0.2, -0.3, 0.4};
  auto c = curvature_pack(g, p);
  CHECK(max_abs(c.R) == 0.0);
  CHECK(c.J == 0.0);
}

TEST_CASE("round sphere: P = g/2, J = d/2, W = 0") {
  for (int d : {3, 4, 5}) {
    auto g = sphere_metric(d);
    PointSampler s(g.chart, 7);
    for (int k = 0; k < 3; ++k) {
      auto p = s.next();
      auto c = curvature_pack(g, p);
      CHECK_THAT(c.J, WithinAbs(d / 2.0, 1e-12));
      for (int i = 0; i < d * d; ++i) CHECK_THAT(c.P[i] - 0.5 * c.g[i], WithinAbs(0.0, 1e-12));
      CHECK(max_abs(c.W) < 1e-11);
    }
  }
}

TEST_CASE("hyperbolic ball: Ric = -(d-1) g") {
  auto g = hyperbolic_ball_metric(4);
  Point p{0.3, -0.1, 0.2, 0.05};
  auto c = curvature_pack(g, p);
  CHECK_THAT(c.J, WithinAbs(-2.0, 1e-11));
  for (int i = 0; i < 16; ++i) CHECK_THAT(c.Ric[i] + 3.0 * c.g[i], WithinAbs(0.0, 1e-10));
}

TEST_CASE("Weyl tensor is conformally invariant") {
  // non-conformally-flat product-ish metric via a deformation
  MetricModel g = flat_metric(4);
  g.components = [](std::span<const Jet> y) {
    std::vector<Jet> m;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Jet v = Jet::constant(y[0].space(), a == b ? 1.0 : 0.0).truncated(y[0].order());
        if (a == 0 && b == 0) v = v + y[1] * y[2] * 0.5;
        if ((a == 1 && b == 2) || (a == 2 && b == 1)) v = v + y[0] * y[3] * 0.3;
        m.push_back(v);
      }
    return m;
  };
  ScalarJetField omega([](std::span<const Jet> y) { return sin(y[0]) * 0.3 + y[1] * y[3] * 0.2; });
  auto gh = conformal_rescale(g, omega);
  Point p{0.1, 0.2, 0.3, -0.2};
  auto c = curvature_pack(g, p);
  auto ch = curvature_pack(gh, p);
  double e2 = std::exp(2 * omega.value(p));
  CHECK(max_abs(c.W) > 1e-3);
  for (std::size_t i = 0; i < c.W.size(); ++i) CHECK_THAT(ch.W[i] - e2 * c.W[i], WithinAbs(0.0, 1e-10));
}
