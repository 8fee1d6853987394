#include <catch_amalgamated.hpp>

#include <cmath>

#include "tractor_calc/tractor.hpp"

using namespace tcalc;
using Catch::Matchers::WithinAbs;

namespace {

ScalarJetField bump() {
  return ScalarJetField([](std::span<const Jet> y) {
    Jet r = y[0] * y[0];
    for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i];
    return sin(y[0] * 0.7) * 0.3 + exp(r * -0.5) * 0.2 + y[1] * y[2] * 0.1;
  });
}

ScalarJetField probe() {
  return ScalarJetField([](std::span<const Jet> y) {
    return cos(y[0]) * (1.0 + y[1] * 0.5) + y[2] * y[2] * y[0] * 0.3 + exp(y[y.size() - 1] * 0.4);
  });
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("tractor metric anchors") {
  TractorValue y{1.0, {0, 0, 0, 0}, 0.0, 0, "flat", {}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}};
  CHECK(tractor_metric(y, y) == 0.0);
  TractorValue u = y;
  u.rho = 1.0;
  CHECK(tractor_metric(u, u) == 2.0);
  TractorValue v = u;
  v.scale = "round";
  CHECK_THROWS_AS(tractor_metric(u, v), ScaleError);
}

TEST_CASE("rescale_tractor preserves h and round-trips") {
  TractorValue u{0.7, {0.1, -0.4, 0.3, 0.2}, -1.3, 0.0, "flat", {}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}};
  std::vector<double> ups{0.3, -0.2, 0.5, 0.1}, neg{-0.3, 0.2, -0.5, -0.1};
  auto r = rescale_tractor(u, 0.4, ups, "hat");
  auto rr = rescale_tractor(r, -0.4, neg, "flat");
  r.scale = u.scale;
  CHECK_THAT(tractor_metric(r, r), WithinAbs(tractor_metric(u, u), 1e-12));
  CHECK_THAT(rr.sigma, WithinAbs(u.sigma, 1e-12));
  CHECK_THAT(rr.rho, WithinAbs(u.rho, 1e-12));
  for (int a = 0; a < 4; ++a) CHECK_THAT(rr.mu[a], WithinAbs(u.mu[a], 1e-12));
}

TEST_CASE("thomas D anchors in the flat scale") {
  auto g = flat_metric(4);
  Point p{0.2, -0.1, 0.3, 0.4};
  auto y = seed_coordinates(p, 4);
  LocalGeometry geo(g.at(y), 4, CurvatureLevel::ricci);
  auto one = LocalField::scalar(Jet::constant(y[0].space(), 1.0).truncated(4), 4, 1.0);
  auto D1 = thomas_D(geo, one).values();
  CHECK(D1[0] == 4.0);
  for (int i = 1; i < 6; ++i) CHECK(D1[i] == 0.0);
  Jet r = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
  auto sig = LocalField::scalar((1.0 - r) * 0.5, 4, 1.0);
  auto I = (0.25 * thomas_D(geo, sig)).values();
  CHECK_THAT(I[0], WithinAbs(0.5 * (1 - 0.3), 1e-14));
  for (int a = 0; a < 4; ++a) CHECK_THAT(I[1 + a], WithinAbs(-p[a], 1e-14));
  CHECK_THAT(I[5], WithinAbs(1.0, 1e-14));
}

TEST_CASE("tractor connection is h-compatible") {
  auto g = sphere_metric(4);
  Point p{0.3, 0.2, -0.5, 0.1};
  auto y = seed_coordinates(p, 3);
  LocalGeometry geo(g.at(y), 4, CurvatureLevel::ricci);
  LocalField U(4, 0, 1, 0.0), V(4, 0, 1, 0.0);
  for (int s = 0; s < 6; ++s) {
    U.c[s] = sin(y[s % 4] * (s + 1) * 0.3) + y[(s + 1) % 4] * 0.2;
    V.c[s] = cos(y[(s + 2) % 4] * 0.5) * (0.5 + s * 0.1);
  }
  // h(U,V) as a rank-2 contraction of U (x) V
  LocalField UV(4, 0, 2, 0.0);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) UV.c[a * 6 + b] = U.c[a] * V.c[b];
  auto h = contract_tractor(geo, UV, 0, 1);
  auto dh = covariant_derivative(geo, h);
  auto dU = covariant_derivative(geo, U), dV = covariant_derivative(geo, V);
  for (int a = 0; a < 4; ++a) {
    LocalField A(4, 0, 2, 0.0), B(4, 0, 2, 0.0);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        A.c[i * 6 + j] = dU.c[a * 6 + i] * V.c[j];
        B.c[i * 6 + j] = U.c[i] * dV.c[a * 6 + j];
      }
    double rhs = contract_tractor(geo, A, 0, 1).c[0].value() + contract_tractor(geo, B, 0, 1).c[0].value();
    CHECK_THAT(dh.c[a].value() - rhs, WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("thomas D is conformally invariant") {
  for (int d : {4, 5}) {
    auto g = sphere_metric(d);
    auto omega = bump();
    auto gh = conformal_rescale(g, omega);
    auto u = probe();
    PointSampler s(g.chart, 11);
    for (double w : {0.0, 1.0, -0.5, 1.0 - d / 2.0}) {
      auto p = s.next();
      auto y = seed_coordinates(p, 4);
      LocalGeometry geo(g.at(y), d, CurvatureLevel::ricci), geoh(gh.at(y), d, CurvatureLevel::ricci);
      auto v = LocalField::scalar(u(y), d, w);
      auto vh = LocalField::scalar(u(y) * exp(omega(y) * w), d, w);
      auto Dv = thomas_D(geo, v);
      auto Dvh = thomas_D(geoh, vh);
      auto mapped = rescale_field(geo, Dv, omega(y));
      for (int i = 0; i < d + 2; ++i) CHECK(rel(Dvh.c[i].value(), mapped.c[i].value()) < 1e-10);
    }
  }
}

TEST_CASE("yamabe box: sphere anchor and invariance") {
  auto g = sphere_metric(4);
  Point p{0.1, 0.4, -0.2, 0.3};
  auto y = seed_coordinates(p, 2);
  LocalGeometry geo(g.at(y), 4, CurvatureLevel::ricci);
  auto one = LocalField::scalar(Jet::constant(y[0].space(), 1.0).truncated(2), 4, -1.0);
  CHECK_THAT(yamabe_box(geo, one).c[0].value(), WithinAbs(2.0, 1e-12));
  CHECK_THROWS_AS(yamabe_box(geo, LocalField::scalar(one.c[0], 4, 0.0)), WeightError);
}

TEST_CASE("box_4 in d=5 is conformally invariant and reduces to Delta^2 in flat space") {
  const int d = 5, k = 4;
  const int ord = box_k_order(k);
  auto g = flat_metric(d);
  auto omega = bump();
  auto gh = conformal_rescale(g, omega);
  auto u = probe();
  const double w = (k - d) / 2.0;
  PointSampler s(g.chart, 5);
  for (int t = 0; t < 3; ++t) {
    auto p = s.next();
    auto y = seed_coordinates(p, ord);
    LocalGeometry geo(g.at(y), d, CurvatureLevel::ricci), geoh(gh.at(y), d, CurvatureLevel::ricci);
    auto out = box_k(geo, LocalField::scalar(u(y), d, w), k);
    auto outh = box_k(geoh, LocalField::scalar(u(y) * exp(omega(y) * w), d, w), k);
    CHECK(out.weight == -(k + d) / 2.0);
    double expect = outh.c[0].value() * std::exp(-out.weight * omega.value(p));
    CHECK(rel(expect, out.c[0].value()) < 1e-9);
  }
}
