#include <catch_amalgamated.hpp>

#include <cmath>

#include "tractor_calc/model_cone.hpp"

using namespace tcalc;
using Catch::Matchers::WithinAbs;

namespace {

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0, s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
    s = std::max(s, std::abs(b[i]));
  }
  return m / std::max(1.0, s);
}

// |Ric - lambda g| / |g|
double einstein_defect(const MetricModel& m, std::span<const double> p, double lambda) {
  auto cp = curvature_pack(m, p);
  double e = 0, s = 0;
  for (std::size_t i = 0; i < cp.g.size(); ++i) {
    e = std::max(e, std::abs(cp.Ric[i] - lambda * cp.g[i]));
    s = std::max(s, std::abs(cp.g[i]));
  }
  return e / s;
}

double sectional(const CurvaturePack& cp, const std::vector<double>& u, const std::vector<double>& v) {
  const int d = cp.d;
  auto R = [&](int a, int b, int c, int e) { return cp.R[((a * d + b) * d + c) * d + e]; };
  double num = 0, uu = 0, vv = 0, uv = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      uu += cp.g[a * d + b] * u[a] * u[b];
      vv += cp.g[a * d + b] * v[a] * v[b];
      uv += cp.g[a * d + b] * u[a] * v[b];
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) num += R(a, b, c, e) * u[a] * v[b] * u[c] * v[e];
    }
  return num / (uu * vv - uv * uv);
}

}  // namespace

TEST_CASE("ambient form signature") {
  auto f = AmbientForm::standard(4);
  CHECK(f.signature() == std::pair<int, int>{5, 1});
  CHECK_NOTHROW(f.verify());
  CHECK_THAT(f(f.timelike(), f.timelike()), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(f(f.polar(), f.polar()), WithinAbs(1.0, 1e-15));
  CHECK_THAT(f(f.polar(), f.timelike()), WithinAbs(0.0, 1e-15));
  auto bad = f;
  bad.H(1, 1) = -1.0;
  CHECK_THROWS_AS(bad.verify(), ArgumentError);
}

TEST_CASE("cone chart: null section, companion, Euler rays, overlap") {
  auto c = ConeChart::standard(4);
  auto a = ConeChart::standard(4, -1);
  PointSampler s(c.metric().chart, 3);
  for (const auto& p : s.take(50)) {
    auto y = seed_coordinates(p, 1);
    auto X = c.X(y), Y = c.Y(y);
    Eigen::VectorXd x(6), yv(6);
    for (int A = 0; A < 6; ++A) {
      x(A) = X[A].value();
      yv(A) = Y[A].value();
    }
    CHECK(std::abs(c.form(x, x)) < 1e-12);
    CHECK(std::abs(c.form(yv, yv)) < 1e-12);
    CHECK_THAT(c.form(x, yv), WithinAbs(1.0, 1e-12));
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd dx(6);
      for (int A = 0; A < 6; ++A) dx(A) = X[A].coefficient(1 + i);
      CHECK(std::abs(c.form(dx, yv)) < 1e-12);
      CHECK(std::abs(c.form(dx, x)) < 1e-12);
    }
    for (double t : {0.3, 1.0, 7.5}) {
      auto q = c.to_chart(t * x);
      for (int i = 0; i < 4; ++i) CHECK_THAT(q[i], WithinAbs(p[i], 1e-12));
    }
    // antipodal chart: y -> y/|y|^2 on the overlap
    double r2 = 0;
    for (double v : p) r2 += v * v;
    if (r2 < 1e-4) continue;
    Point q(4);
    for (int i = 0; i < 4; ++i) q[i] = p[i] / r2;
    CHECK((a.lift(q) - x).norm() < 1e-12);
    auto back = a.to_chart(x);
    for (int i = 0; i < 4; ++i) CHECK_THAT(back[i], WithinAbs(q[i], 1e-10));
  }
  Eigen::VectorXd pole = c.form.timelike() + c.form.polar();
  CHECK_THROWS_AS(c.to_chart(pole), DomainError);
  CHECK_NOTHROW(a.to_chart(pole));
  CHECK_THROWS_AS(c.to_chart(-pole), DomainError);
}

TEST_CASE("descended conformal metric matches the chart metrics") {
  auto c = ConeChart::standard(4);
  auto round = c.metric();
  auto flat = flat_metric(4);
  PointSampler s(round.chart, 5);
  for (const auto& p : s.take(40)) {
    CHECK(max_rel(descended_metric(c, p), round.values(p)) < 1e-10);
    CHECK(max_rel(descended_metric(c, p, true), flat.values(p)) < 1e-10);
  }
}

TEST_CASE("homogeneous functions read through two sections") {
  auto c = ConeChart::standard(4);
  Eigen::VectorXd a = c.form.polar() + 0.3 * c.form.basis(2);
  Eigen::VectorXd b = c.form.timelike();
  for (double w : {-1.5, 0.0, 1.0, 2.0}) {
    ConeFunction F{[&c, a, b, w](std::span<const Jet> Z) {
                     return ambient_pair(c.form, a, Z) * pow(-1.0 * ambient_pair(c.form, b, Z), w - 1.0);
                   },
                   w};
    auto round = descend_density(c, F);
    auto fl = descend_density(c, F, true);
    // flat = e^{2 omega} round with e^omega = (1+|y|^2)/2
    auto omega = (0.5 * (ScalarJetField::constant(1.0) + ScalarJetField::radius_squared())).then(
        [](const Jet& j) { return log(j); }, "log");
    auto moved = round.rescaled(omega, "flat");
    PointSampler s(c.metric().chart, 7);
    for (const auto& p : s.take(30)) {
      const double v = fl.rep.value(p);
      CHECK(std::abs(moved.rep.value(p) - v) <= 1e-10 * std::max(1.0, std::abs(v)));
    }
  }
}

TEST_CASE("cap metric is the Poincare ball") {
  auto c = ConeChart::standard(4);
  auto I = ball_I(c.form);
  auto ball = hyperbolic_ball_metric(4);
  PointSampler s(ball.chart, 11);
  for (const auto& p : s.take(100)) {
    CHECK(max_rel(cap_metric(c, I, p), ball.values(p)) < 1e-9);
  }
  auto cap = section_metric(c, I);
  for (const auto& p : PointSampler(ball.chart, 12).take(20)) CHECK(einstein_defect(cap, p, -3.0) < 1e-9);

  // sectional curvature at the centre; the same formula gives +1 on the round sphere
  auto cp = curvature_pack(cap, Point{0, 0, 0, 0});
  auto cs = curvature_pack(c.metric(), Point{0.2, 0.1, -0.3, 0.4});
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> u(4), v(4);
    for (int i = 0; i < 4; ++i) {
      u[i] = g(rng);
      v[i] = g(rng);
    }
    CHECK_THAT(sectional(cp, u, v), WithinAbs(-1.0, 1e-9));
    CHECK_THAT(sectional(cs, u, v), WithinAbs(1.0, 1e-9));
  }

  CHECK_THROWS_AS(cap_metric(c, I, Point{1.2, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(cap_metric(c, sphere_I(c.form), Point{0, 0, 0, 0}), BranchError);

  // g_11 ~ C x^{-2} as x = 1 - |y| -> 0
  std::vector<double> lx, lg;
  for (double x : {1e-4, 3e-5, 1e-5, 3e-6}) {
    lx.push_back(std::log(x));
    lg.push_back(std::log(cap_metric(c, I, Point{1 - x, 0, 0, 0})[0]));
  }
  const double slope = (lg.back() - lg.front()) / (lx.back() - lx.front());
  CHECK_THAT(slope, WithinAbs(-2.0, 1e-3));
}

TEST_CASE("three branches of the section metric") {
  auto c = ConeChart::standard(4);
  PointSampler s(c.metric().chart, 21);
  auto pts = s.take(20);
  for (double b : {0.0, 0.4}) {
    auto m = section_metric(c, sphere_I(c.form, b));
    CHECK_THAT(m.parameter, WithinAbs(-1.0, 1e-12));
    for (const auto& p : pts) CHECK(einstein_defect(m, p, 3.0) < 1e-9);
  }
  auto m0 = section_metric(c, null_I(c, Point{0.3, -0.2, 0.1, 0.5}));
  CHECK(std::abs(m0.parameter) < 1e-12);
  for (const auto& p : pts)
    if (m0.chart.valid(p)) CHECK(einstein_defect(m0, p, 0.0) < 1e-9);
}

TEST_CASE("descended parallel tractor") {
  auto c = ConeChart::standard(4);
  auto I = ball_I(c.form);
  auto t = descend_tractor(c, I);
  auto ae = t.structure();
  CHECK_THAT(ae.I_norm2, WithinAbs(1.0, 1e-12));
  Eigen::VectorXd J = sphere_I(c.form, 0.3) + 0.2 * c.form.basis(3);
  auto tj = descend_tractor(c, J);
  PointSampler s(c.metric().chart, 31);
  for (const auto& p : s.take(100)) {
    auto v = t.value(p);
    CHECK_THAT(tractor_metric(v, tj.value(p)), WithinAbs(c.form(I, J), 1e-12));
    CHECK_THAT(tractor_metric(v, v), WithinAbs(1.0, 1e-12));
  }
  for (const auto& p : s.take(20)) {
    CHECK(t.parallel_defect(p) < 1e-10);
    CHECK(tj.parallel_defect(p) < 1e-10);
    auto a = ae.I_at(p);
    auto b = t.value(p);
    CHECK(max_rel(a.slots(), b.slots()) < 1e-12);
  }
  CHECK_THROWS_AS(descend_tractor(c, Eigen::VectorXd::Zero(6)), DegeneracyError);

  auto cl = classify(ae);
  CHECK(cl.sign == AESign::positive);
  CHECK(cl.zero_set == "hypersurface");
  for (const auto& z : cl.zero_samples) {
    double r2 = 0;
    for (double v : z) r2 += v * v;
    CHECK_THAT(r2, WithinAbs(1.0, 1e-9));
  }
  Point z0{0.3, -0.2, 0.1, 0.5};
  auto cn = classify(descend_tractor(c, null_I(c, z0)).structure());
  CHECK(cn.sign == AESign::zero);
  REQUIRE(cn.zero_set == "point");
  for (int i = 0; i < 4; ++i) CHECK_THAT(cn.zero_samples[0][i], WithinAbs(z0[i], 1e-6));
  auto cm = classify(descend_tractor(c, sphere_I(c.form, 0.5)).structure());
  CHECK(cm.sign == AESign::negative);
  CHECK(cm.zero_set == "empty");
}

TEST_CASE("equator boundary") {
  auto c = ConeChart::standard(4);
  auto I = ball_I(c.form);
  auto s = equator_boundary(c, I);
  auto t = descend_tractor(c, I);
  for (const auto& p : s.sample(41, 50)) {
    auto u = umbilicity_defect(s, p);
    CHECK(u.tracefree_II < 1e-10);
    CHECK(u.tangential_dN < 1e-10);
    auto N = normal_tractor(s, p);
    CHECK(max_rel(N.slots(), t.value(p).slots()) < 1e-10);
  }
  for (const auto& p : PointSampler(c.metric().chart, 43).take(100)) {
    double r2 = 0;
    for (double v : p) r2 += v * v;
    if (std::abs(r2 - 1) > 1e-9) CHECK((s.x.value(p) > 0) == (r2 < 1));
  }
  CHECK_THROWS_AS(equator_boundary(c, sphere_I(c.form)), BranchError);
}

TEST_CASE("isotropy spot-check") {
  auto c = ConeChart::standard(4);
  auto I = ball_I(c.form);
  // the chordal distance formula against the Poincare one
  Point a{0.1, 0.2, -0.3, 0.0}, b{-0.4, 0.1, 0.2, 0.3};
  double ab = 0, aa = 0, bb = 0;
  for (int i = 0; i < 4; ++i) {
    ab += (a[i] - b[i]) * (a[i] - b[i]);
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  CHECK_THAT(cap_distance(c, I, a, b), WithinAbs(std::acosh(1 + 2 * ab / ((1 - aa) * (1 - bb))), 1e-12));

  std::vector<Eigen::MatrixXd> maps{Eigen::MatrixXd::Identity(6, 6), rotation_map(c.form, 1, 2, 0.8),
                                    random_isotropy_map(c.form, I, 5), random_isotropy_map(c.form, I, 6),
                                    boost_map(c.form, 0.3)};
  auto rep = isotropy_spotcheck(c, I, maps);
  REQUIRE(rep.samples.size() == 5);
  for (int k = 0; k < 4; ++k) {
    CHECK(rep.samples[k].fixes_I);
    CHECK(rep.samples[k].isotropy_ok);
    CHECK(rep.samples[k].pairs == 20);
  }
  CHECK(rep.samples[0].distance_defect < 1e-13);
  CHECK_FALSE(rep.samples[4].fixes_I);
  CHECK(rep.samples[4].sigma_change > 1e-3);
  CHECK_FALSE(rep.samples[4].isotropy_ok);
  CHECK(rep.consistent);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(6, 6);
  bad(1, 1) = 1.01;
  CHECK_THROWS_AS(isotropy_spotcheck(c, I, {bad}), ArgumentError);
}
