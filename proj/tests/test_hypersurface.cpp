#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "tractor_calc/hypersurface.hpp"

using namespace tcalc;
using Catch::Matchers::WithinAbs;

namespace {

Hypersurface unit_sphere(const MetricModel& g) {
  return {ScalarJetField([](std::span<const Jet> y) {
            Jet r = y[0] * y[0];
            for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i];
            return (1.0 - r) * 0.5;
          }),
          +1, g, "unit sphere", {}};
}

Hypersurface ellipsoid(const MetricModel& g) {
  return {ScalarJetField([](std::span<const Jet> y) {
            Jet r = y[0] * y[0] * 0.5;
            for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i] * (1.0 + 0.3 * i);
            return (0.6 - r) * 0.5;
          }),
          +1, g, "ellipsoid", {}};
}

ScalarJetField bump() {
  return ScalarJetField([](std::span<const Jet> y) {
    return sin(y[0] * 0.7) * 0.3 + cos(y[1] * y[2]) * 0.2 + y[y.size() - 1] * y[0] * 0.15;
  });
}

ScalarJetField probe() {
  return ScalarJetField([](std::span<const Jet> y) {
    return cos(y[0]) * (1.0 + y[1] * 0.5) + y[2] * y[2] * y[0] * 0.3 + exp(y[y.size() - 1] * 0.4);
  });
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("hyperplane: H = 0 and N = (0, n, 0)") {
  Hypersurface s{ScalarJetField::coordinate(0), +1, flat_metric(4), "y1 = 0", {}};
  Point p{0.0, 0.3, -0.2, 0.5};
  CHECK(mean_curvature(s, p) == 0.0);
  auto N = normal_tractor(s, p);
  CHECK(N.sigma == 0.0);
  CHECK(N.rho == 0.0);
  CHECK_THAT(N.mu[0], WithinAbs(1.0, 1e-15));
  CHECK(umbilicity_defect(s, p).tracefree_II == 0.0);
  Point off{0.1, 0.3, -0.2, 0.5};
  CHECK_THROWS_AS(mean_curvature(s, off), DomainError);
}

TEST_CASE("unit sphere in flat space") {
  auto s = unit_sphere(flat_metric(4));
  for (const auto& p : s.sample(3, 10)) {
    CHECK_THAT(mean_curvature(s, p), WithinAbs(-1.0, 1e-12));
    auto N = normal_tractor(s, p);
    CHECK_THAT(tractor_metric(N, N), WithinAbs(1.0, 1e-12));
    for (int a = 0; a < 4; ++a) CHECK_THAT(N.mu[a], WithinAbs(-p[a], 1e-12));
    CHECK_THAT(N.rho, WithinAbs(1.0, 1e-12));
    auto u = umbilicity_defect(s, p);
    CHECK(u.tracefree_II < 1e-12);
    CHECK(u.tangential_dN < 1e-12);
    CHECK_THAT(robin_delta(s, s.x, 1.0, p), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("mean curvature does not depend on the conormal extension") {
  auto g = sphere_metric(4);
  auto s = ellipsoid(g);
  auto s2 = s;
  s2.extension = bump();
  for (const auto& p : s.sample(5, 5)) {
    CHECK_THAT(mean_curvature(s, p) - mean_curvature(s2, p), WithinAbs(0.0, 1e-12));
    auto N = normal_tractor(s, p);
    auto N2 = normal_tractor(s2, p);
    CHECK_THAT(N.rho - N2.rho, WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("ellipsoid is not umbilic; umbilicity and tangential dN vanish together") {
  auto s = ellipsoid(flat_metric(4));
  for (const auto& p : s.sample(9, 5)) {
    auto u = umbilicity_defect(s, p);
    CHECK(u.tracefree_II > 1e-3);
    CHECK(u.tangential_dN > 1e-3);
  }
}

TEST_CASE("umbilicity survives a curved chart") {
  // off-centre sphere, measured in the round metric
  Hypersurface s{ScalarJetField([](std::span<const Jet> y) {
                   Jet r = (y[0] - 0.3) * (y[0] - 0.3);
                   for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i];
                   return (0.49 - r) * 0.5;
                 }),
                 +1, sphere_metric(4), "off-centre sphere", {}};
  for (const auto& p : s.sample(13, 10)) {
    auto u = umbilicity_defect(s, p);
    CHECK(u.tracefree_II < 1e-12);
    CHECK(u.tangential_dN < 1e-12);
  }
  auto e = ellipsoid(sphere_metric(4));
  for (const auto& p : e.sample(14, 5)) CHECK(umbilicity_defect(e, p).tracefree_II > 1e-3);
}

TEST_CASE("H transforms as H + n^a nabla_a omega") {
  auto g = flat_metric(4);
  auto omega = bump();
  auto s = ellipsoid(g);
  auto sh = ellipsoid(conformal_rescale(g, omega));
  for (const auto& p : s.sample(2, 5)) {
    auto j = surface_jets(s, p, 2);
    auto om = omega(j.y);
    double dn = 0;
    for (int a = 0; a < 4; ++a) dn += j.nup[a].value() * om.derivative(a).value();
    double expect = (j.H.value() + dn) * std::exp(-omega.value(p));
    CHECK_THAT(mean_curvature(sh, p), WithinAbs(expect, 1e-12));
  }
}

TEST_CASE("projection to the surface tractor bundle") {
  auto s = ellipsoid(sphere_metric(4));
  auto p = s.sample(4, 1)[0];
  auto N = normal_tractor(s, p);
  TractorValue X = N;
  X.sigma = 0;
  X.mu.assign(4, 0.0);
  X.rho = 1;
  auto PX = project_sigma(X, N);
  CHECK(PX.sigma == X.sigma);
  CHECK_THAT(PX.rho, WithinAbs(1.0, 1e-15));
  auto PN = project_sigma(N, N);
  CHECK_THAT(std::abs(PN.sigma) + std::abs(PN.rho) + std::abs(PN.mu[0]), WithinAbs(0.0, 1e-14));
  TractorValue U = N;
  U.sigma = 0.3;
  U.mu = {0.1, -0.7, 0.2, 0.4};
  U.rho = -0.8;
  auto PU = project_sigma(U, N);
  CHECK_THAT(tractor_metric(PU, N), WithinAbs(0.0, 1e-14));
  auto PPU = project_sigma(PU, N);
  CHECK_THAT(PPU.rho - PU.rho, WithinAbs(0.0, 1e-14));
}

TEST_CASE("Robin operator is N.D up to 1/(d+2w-2)") {
  auto s = ellipsoid(sphere_metric(4));
  auto u = probe();
  for (double w : {0.0, 0.5, 2.0, -3.0}) {
    for (const auto& p : s.sample(8, 5)) {
      double c = robin_delta(s, u, w, p) / normal_D(s, u, w, p);
      CHECK_THAT(c, WithinAbs(1.0 / (4 + 2 * w - 2), 1e-12));
    }
  }
}

TEST_CASE("Robin constant matches the frozen table at 50 probes") {
  std::ifstream in("tests/golden/robin_c.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    const int d = std::stoi(a);
    const double w = std::stod(b), c0 = std::stod(c);
    if (d > 5) continue;
    auto s = ellipsoid(sphere_metric(d));
    for (const auto& p : s.sample(40 + rows, 50))
      CHECK_THAT(robin_delta(s, probe(), w, p) / normal_D(s, probe(), w, p), WithinAbs(c0, 1e-9));
    ++rows;
  }
  CHECK(rows == 11);
}

TEST_CASE("D_Sigma^A X_A f = (n+2w+2)(n+w) f") {
  auto s = ellipsoid(sphere_metric(4));
  auto f = probe();
  for (double w : {0.0, 1.0, -1.0}) {
    const double n = 3;
    for (const auto& p : s.sample(6, 5)) CHECK_THAT(dxs_ratio(s, f, w, p), WithinAbs((n + 2 * w + 2) * (n + w), 1e-9));
  }
}

TEST_CASE("delta_l is conformally invariant") {
  auto g = sphere_metric(5);
  auto omega = bump();
  auto s = ellipsoid(g);
  auto sh = ellipsoid(conformal_rescale(g, omega));
  auto u = probe();
  for (int ell : {1, 2, 3}) {
    const double w = (4.0 - 5.0) / 2.0;
    ScalarJetField uh([u, omega, w](std::span<const Jet> y) { return u(y) * exp(omega(y) * w); });
    for (const auto& p : s.sample(10 + ell, 3)) {
      double a = delta_ell(s, u, w, p, ell);
      double b = delta_ell(sh, uh, w, p, ell) * std::exp(-(w - ell) * omega.value(p));
      CHECK(rel(b, a) < 1e-9);
    }
  }
}

TEST_CASE("delta_2 has normal order 2 in d = 5") {
  auto s = ellipsoid(flat_metric(5));
  auto p = s.sample(1, 1)[0];
  const double w = (4.0 - 5.0) / 2.0;
  auto B2 = [&](const ScalarJetField& u) { return delta_ell(s, u, w, p, 2); };
  auto r2 = normal_order_probe(B2, s, 3);
  CHECK(r2.order == 2);
  auto B1 = [&](const ScalarJetField& u) { return robin_delta(s, u, w, p); };
  CHECK(normal_order_probe(B1, s, 2).order == 1);
  auto B0 = [&](const ScalarJetField& u) { return delta_ell(s, u, w, p, 0); };
  CHECK(normal_order_probe(B0, s, 2).order == 0);
}
