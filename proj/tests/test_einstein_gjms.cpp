#include <catch_amalgamated.hpp>

#include <cmath>

#include "tractor_calc/einstein_gjms.hpp"

using namespace tcalc;
using Catch::Matchers::WithinAbs;

namespace {

ScalarJetField ball_sigma(double scale = 1.0) {
  return ScalarJetField([scale](std::span<const Jet> y) { return (1.0 - detail::radius_squared(y)) * (0.5 * scale); },
                        "ball sigma");
}

// sigma = (1-|y|^2)/(1+|y|^2) in the round scale gives the same g+.
ScalarJetField round_sigma() {
  return ScalarJetField([](std::span<const Jet> y) {
    Jet r = detail::radius_squared(y);
    return (1.0 - r) / (1.0 + r);
  });
}

ScalarJetField poly() {
  return ScalarJetField([](std::span<const Jet> y) {
    return 1.0 + y[0] * 0.3 + exp(y[1] * 0.7) * 0.2 - sin(y[0] * y[2]) * 0.4 + cos(y[3] * 1.3) * y[1] * 0.25;
  });
}

const EinsteinScale& flat_ball() {
  static EinsteinScale E = EinsteinScale::from(build_I(ball_sigma(), flat_metric(4)));
  return E;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("lambda and s lists") {
  auto g2 = GJMSSpec::make(2, 4);
  CHECK(g2.s == std::vector<Rational>{Rational(2)});
  CHECK(scattering_constant(g2.s[0], 3) == Rational(2));
  CHECK(g2.lambda == std::vector<Rational>{Rational(-2)});
  auto g4 = GJMSSpec::make(4, 4);
  CHECK(g4.s == std::vector<Rational>{Rational(3), Rational(2)});
  CHECK(scattering_constant(g4.s[0], 3) == Rational(0));
  CHECK(scattering_constant(g4.s[1], 3) == Rational(2));
  CHECK(g4.lambda == std::vector<Rational>{Rational(-2), Rational(0)});
  for (int n = 3; n <= 8; ++n) {
    CHECK(s_list(2, n)[0] == Rational(n + 1, 2));
    for (int k : {2, 4, 6, 8}) {
      auto g = GJMSSpec::make(k, n + 1);
      CHECK(g.identity_holds());
      CHECK(g.distinct());
      for (int l = 1; l <= k / 2; ++l)
        CHECK(g.lambda[l - 1] == Rational(-(n + 1 + 2 * l - 2) * (n + 1 - 2 * l), 4));
    }
  }
  CHECK(to_string(Rational(-3, 4)) == "-3/4");
  CHECK(to_string(Rational(6, 3)) == "2");
  CHECK_THROWS_AS(s_list(3, 3), ArgumentError);
}

TEST_CASE("scattering Laplacian: exact and weighted forms") {
  const auto& E = flat_ball();
  CHECK(E.einstein_residual < 1e-10);
  Point p{0.1, -0.2, 0.3, 0.15};
  CHECK_THAT(scattering_laplacian(E, 2.0, ScalarJetField::constant(1.0), p), WithinAbs(-2.0, 1e-14));
  CHECK_THAT(scattering_laplacian(E, 2.0, poly(), p), WithinAbs(scattering_laplacian(E, 1.0, poly(), p), 1e-13));

  // sigma I^A D_A u = (Delta^{g+} - s(n-s)) u in the g+ trivialisation, w = -1, s = 2
  DensityField u{-1.0, "flat", poly()};
  PointSampler s(E.gplus.chart, 7);
  for (const auto& q : s.take(100)) {
    const double sig = E.sigma(q);
    const double tractor = E.to_gplus(sig * I_dot_D(E, u, q), -1.0, q);
    const double exact = scattering_laplacian(E, 2.0, E.to_gplus(u), q);
    CHECK(rel(tractor, exact) < 1e-9);
    CHECK(rel(scattering_laplacian_weighted(E, u, q), exact) < 1e-9);
  }
  CHECK_THROWS_AS(scattering_laplacian(E, 2.0, poly(), Point{1.0, 0, 0, 0}), BoundaryError);
}

TEST_CASE("GJMS triple agreement on the ball") {
  const auto& E = flat_ball();
  PointSampler s(E.probe_chart(), 11);
  auto pts = s.take(50);
  for (int k : {2, 4}) {
    DensityField u{(k - 4) / 2.0, "flat", poly()};
    for (const auto& p : pts) {
      auto a = gjms_compare(E, k, u, p);
      CHECK(a.max_rel < 1e-8);
      CHECK(rel(gjms_scp_gplus(E, k, E.to_gplus(u), p), a.product) < 1e-10);
    }
  }
}

TEST_CASE("GJMS in a second working scale") {
  auto E1 = flat_ball();
  auto E2 = EinsteinScale::from(build_I(round_sigma(), sphere_metric(4)));
  // same density: flat rep = ((1+|y|^2)/2)^w round rep
  for (int k : {2, 4}) {
    const double w = (k - 4) / 2.0;
    DensityField u1{w, "flat", poly()};
    auto omega = (0.5 * (ScalarJetField::constant(1.0) + ScalarJetField::radius_squared()))
                     .then([](const Jet& j) { return -1.0 * log(j); }, "-log");
    auto u2 = u1.rescaled(omega, E2.ae.metric.scale);
    for (const auto& p : PointSampler(E1.probe_chart(), 13).take(10)) {
      const double a = E1.to_gplus(gjms_tractor_form(E1, k, u1, p), -(k + 4) / 2.0, p);
      const double b = E2.to_gplus(gjms_tractor_form(E2, k, u2, p), -(k + 4) / 2.0, p);
      CHECK(rel(a, b) < 1e-8);
    }
  }
}

TEST_CASE("product form: commutativity, constants, k = 2") {
  const auto& E = flat_ball();
  auto f = E.to_gplus(DensityField{0.0, "flat", poly()});
  for (const auto& p : PointSampler(E.probe_chart(), 17).take(10)) {
    CHECK(rel(gjms_product_form(E, 4, f, p, {1, 2}), gjms_product_form(E, 4, f, p, {2, 1})) < 1e-10);
    CHECK(rel(gjms_product_form(E, 6, f, p, {1, 2, 3}), gjms_product_form(E, 6, f, p, {3, 1, 2})) < 1e-10);
    CHECK(std::abs(gjms_product_form(E, 4, ScalarJetField::constant(1.0), p)) < 1e-12);
    auto g = E.to_gplus(DensityField{-1.0, "flat", poly()});
    CHECK(rel(gjms_product_form(E, 2, g, p), scattering_laplacian(E, 2.0, g, p)) < 1e-10);
  }
}

TEST_CASE("GJMS k = 6 agreement") {
  const auto& E = flat_ball();
  DensityField u{1.0, "flat", poly()};
  // the g+ side runs order-8 jets of sigma^{-2}: roundoff sets the tolerance
  for (const auto& p : PointSampler(E.probe_chart(), 19).take(5)) {
    auto a = gjms_compare(E, 6, u, p);
    CHECK(rel(a.iterated, a.tractor) < 1e-10);
    CHECK(a.max_rel < 1e-5);
  }
}

TEST_CASE("GJMS error paths") {
  const auto& E = flat_ball();
  DensityField u{0.0, "flat", poly()};
  Point p{0.1, 0.2, 0.0, 0.3};
  CHECK_THROWS_AS(gjms_tractor_form(E, 8, DensityField{2.0, "flat", poly()}, p), CapabilityError);
  CHECK_THROWS_AS(gjms_tractor_form(E, 4, DensityField{1.0, "flat", poly()}, p), WeightError);
  CHECK_THROWS_AS(gjms_tractor_form(E, 3, u, p), ArgumentError);
  CHECK_THROWS_AS(gjms_tractor_form(E, 4, u, Point{0.6, 0.8, 0, 0}), BoundaryError);
  CHECK_THROWS_AS(EinsteinScale::from(build_I(ball_sigma(2.0), flat_metric(4))), NormalizationError);
}

TEST_CASE("in the flat working scale P_k is the k/2-th power of the Laplacian") {
  const auto& E = flat_ball();
  auto flat = flat_metric(4);
  for (int k : {2, 4, 6}) {
    DensityField u{(k - 4) / 2.0, "flat", poly()};
    for (const auto& p : PointSampler(E.probe_chart(), 23).take(5)) {
      auto geo = LocalGeometry::at(flat, p, k, CurvatureLevel::none);
      Jet v = poly().at(p, k);
      for (int i = 0; i < k / 2; ++i) v = scalar_laplacian(geo, v);
      CHECK(rel(gjms_tractor_form(E, k, u, p), v.value()) < 1e-10);
    }
  }
}
