#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tractor_calc/decomposition.hpp"
#include "tractor_calc/dtn_model.hpp"
#include "tractor_calc/model_cone.hpp"
#include "tractor_calc/sphere_tractors.hpp"

namespace tcalc {

// ---------------------------------------------------------------- factories

inline MetricModel metric_by_name(const std::string& name, int d, double radius = 1.0) {
  if (d < 2) throw ArgumentError("dimension must be at least 2");
  if (name == "flat") return flat_metric(d);
  if (name == "sphere" || name == "round") return sphere_metric(d, radius);
  if (name == "hyperbolic" || name == "ball") return hyperbolic_ball_metric(d);
  throw ArgumentError("unknown metric family '" + name + "' (flat, sphere, hyperbolic)");
}

inline ScalarJetField ball_defining_density() {
  return ScalarJetField([](std::span<const Jet> y) { return (1.0 - detail::radius_squared(y)) * 0.5; }, "(1-|y|^2)/2");
}

inline Hypersurface surface_by_name(const std::string& name, const MetricModel& g) {
  if (name == "sphere") return {ball_defining_density(), +1, g, "unit sphere", {}};
  if (name == "ellipsoid")
    return {ScalarJetField([](std::span<const Jet> y) {
              Jet r = y[0] * y[0] * 0.5;
              for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i] * (1.0 + 0.3 * i);
              return (0.6 - r) * 0.5;
            }),
            +1, g, "ellipsoid", {}};
  if (name == "plane") return {ScalarJetField::coordinate(0), +1, g, "y1 = 0", {}};
  throw ArgumentError("unknown surface '" + name + "' (sphere, ellipsoid, plane)");
}

// Generic smooth test density.
inline ScalarJetField probe_density() {
  return ScalarJetField(
      [](std::span<const Jet> y) {
        return cos(y[0]) * (1.0 + y[1] * 0.5) + y[2] * y[2] * y[0] * 0.3 + exp(y[y.size() - 1] * 0.4);
      },
      "probe");
}

// Seeded conformal factor omega; g_hat = e^{2 omega} g.
inline ScalarJetField random_conformal_factor(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.35, 0.35), freq(0.3, 1.1), phase(-1.0, 1.0);
  const double a0 = amp(rng), a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
  const double f0 = freq(rng), f1 = freq(rng), ph = phase(rng);
  return ScalarJetField(
      [=](std::span<const Jet> y) {
        return sin(y[0] * f0 + ph) * a0 + exp(detail::radius_squared(y) * -0.5) * a1 + y[1] * y[2] * a2 +
               cos(y[y.size() - 1] * f1) * a3;
      },
      "omega#" + std::to_string(seed));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ---------------------------------------------------------------- invariance

struct InvarianceSample {
  Point point;
  double value = 0.0;       // in g
  double rescaled = 0.0;    // in g_hat, re-weighted back to g
  double rel_err = 0.0;
};

struct InvarianceReport {
  std::string op;
  int d = 0, k = 0;
  double w = 0.0, w_out = 0.0;
  std::string base, omega;
  std::vector<InvarianceSample> samples;
  double max_rel_err = 0.0;
};

inline const std::vector<std::string>& invariance_ops() {
  static const std::vector<std::string> ops{"yamabe", "boxk", "thomas_D", "robin", "delta_ell"};
  return ops;
}

// op: yamabe (w = 1 - d/2), boxk (w = (k-d)/2), thomas_D (first slot, weight w),
// robin (weight w, on the ellipsoid), delta_ell (l = k, weight w, on the ellipsoid).
inline InvarianceReport check_invariance(const std::string& op, int d, int k, double w, std::uint64_t seed, int points,
                                         const std::string& base = "sphere") {
  InvarianceReport r;
  r.op = op;
  r.d = d;
  r.k = k;
  r.base = base;
  auto g = metric_by_name(base, d);
  auto omega = random_conformal_factor(seed);
  r.omega = omega.description();
  auto gh = conformal_rescale(g, omega);
  auto u = probe_density();

  auto interior = [&](int order, const std::function<double(const LocalGeometry&, const LocalField&)>& f) {
    PointSampler s(g.chart, seed);
    for (const auto& p : s.take(points)) {
      auto y = seed_coordinates(p, order);
      LocalGeometry geo(g.at(y), d, CurvatureLevel::ricci), geoh(gh.at(y), d, CurvatureLevel::ricci);
      const double a = f(geo, LocalField::scalar(u(y), d, r.w));
      const double b = f(geoh, LocalField::scalar(u(y) * exp(omega(y) * r.w), d, r.w)) *
                       std::exp(-r.w_out * omega.value(p));
      r.samples.push_back({p, a, b, rel_err(b, a)});
    }
  };

  if (op == "yamabe") {
    r.k = 2;
    r.w = 1.0 - d / 2.0;
    r.w_out = -1.0 - d / 2.0;
    interior(2, [](const LocalGeometry& geo, const LocalField& f) { return yamabe_box(geo, f).c[0].value(); });
  } else if (op == "boxk") {
    r.w = (k - d) / 2.0;
    r.w_out = -(k + d) / 2.0;
    interior(box_k_order(k), [k](const LocalGeometry& geo, const LocalField& f) { return box_k(geo, f, k).c[0].value(); });
  } else if (op == "thomas_D") {
    r.w = w;
    r.w_out = w - 1.0;
    // sigma slot of D u, which has the weight of D u
    interior(4, [](const LocalGeometry& geo, const LocalField& f) { return thomas_D(geo, f).c[0].value(); });
  } else if (op == "robin" || op == "delta_ell") {
    const int ell = op == "robin" ? 1 : k;
    if (op == "robin") r.k = 1;
    r.w = w;
    r.w_out = w - ell;
    auto s = surface_by_name("ellipsoid", g);
    auto sh = surface_by_name("ellipsoid", gh);
    ScalarJetField uh([u, omega, w](std::span<const Jet> y) { return u(y) * exp(omega(y) * w); });
    for (const auto& p : s.sample(seed, points)) {
      const double a = op == "robin" ? robin_delta(s, u, w, p) : delta_ell(s, u, w, p, ell);
      const double b = (op == "robin" ? robin_delta(sh, uh, w, p) : delta_ell(sh, uh, w, p, ell)) *
                       std::exp(-r.w_out * omega.value(p));
      r.samples.push_back({p, a, b, rel_err(b, a)});
    }
  } else {
    throw ArgumentError("unknown operator '" + op + "' (yamabe, boxk, thomas_D, robin, delta_ell)");
  }
  for (const auto& s : r.samples) r.max_rel_err = std::max(r.max_rel_err, s.rel_err);
  return r;
}

// ---------------------------------------------------------------- criteria

struct Measurement {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool lower = false;  // value > bound instead of value <= bound

  bool pass() const { return std::isfinite(value) && (lower ? value > bound : value <= bound); }
};

struct CriterionReport {
  int id = 0;
  std::string title;
  std::vector<Measurement> values;
  double seconds = 0.0;
  double time_limit = INFINITY;
  std::string error;  // exception text if the run aborted

  bool pass() const {
    if (!error.empty() || seconds >= time_limit) return false;
    for (const auto& m : values)
      if (!m.pass()) return false;
    return !values.empty();
  }
  std::string line() const {
    char buf[96];
    std::ostringstream os;
    os << (pass() ? "PASS" : "FAIL") << " [" << id << "] " << title;
    std::snprintf(buf, sizeof buf, " (%.2f s", seconds);
    os << buf;
    if (std::isfinite(time_limit)) {
      std::snprintf(buf, sizeof buf, " < %g s", time_limit);
      os << buf;
    }
    os << ")";
    for (const auto& m : values) {
      std::snprintf(buf, sizeof buf, " %s=%.3g%s%g", m.name.c_str(), m.value, m.lower ? ">" : "<=", m.bound);
      os << buf;
    }
    if (!error.empty()) os << " error: " << error;
    return os.str();
  }
};

namespace detail {

inline CriterionReport timed(int id, std::string title, double limit,
                             const std::function<void(std::vector<Measurement>&)>& body) {
  CriterionReport r{id, std::move(title), {}, 0.0, limit, {}};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r.values);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

inline CriterionReport criterion_curvature() {
  return detail::timed(1, "curvature anchors", 5.0, [](auto& out) {
    double flat = 0, hyp = 0, sph = 0;
    auto g0 = flat_metric(4);
    for (const auto& p : PointSampler(g0.chart, 1).take(20)) {
      auto c = curvature_pack(g0, p);
      flat = std::max({flat, detail::max_abs(c.P), std::abs(c.J), detail::max_abs(c.W)});
    }
    auto gh = hyperbolic_ball_metric(4);
    for (const auto& p : PointSampler(gh.chart, 2).take(20)) hyp = std::max(hyp, std::abs(curvature_pack(gh, p).J + 2.0));
    auto gs = sphere_metric(4);
    for (const auto& p : PointSampler(gs.chart, 3).take(20)) {
      auto c = curvature_pack(gs, p);
      for (std::size_t i = 0; i < c.P.size(); ++i) sph = std::max(sph, std::abs(c.P[i] - 0.5 * c.g[i]));
    }
    out.push_back({"flat_PJW", flat, 1e-12});
    out.push_back({"ball_J+2", hyp, 1e-10});
    out.push_back({"sphere_P-g/2", sph, 1e-10});
  });
}

inline CriterionReport criterion_invariance(int points = 100) {
  return detail::timed(2, "conformal invariance suite", 60.0, [points](auto& out) {
    auto put = [&](const std::string& name, const InvarianceReport& r) { out.push_back({name, r.max_rel_err, 1e-8}); };
    put("yamabe_d4", check_invariance("yamabe", 4, 2, 0, 101, points));
    put("yamabe_d5", check_invariance("yamabe", 5, 2, 0, 102, points));
    put("box4_d5", check_invariance("boxk", 5, 4, 0, 103, points, "flat"));
    put("robin_d4", check_invariance("robin", 4, 1, 0.5, 104, points));
    for (int ell : {1, 2, 3}) put("delta" + std::to_string(ell) + "_d5", check_invariance("delta_ell", 5, ell, -0.5, 104 + ell, points));
  });
}

inline CriterionReport criterion_pe_chain() {
  return detail::timed(3, "almost-Einstein / PE chain on the ball", 30.0, [](auto& out) {
    auto g = flat_metric(4);
    auto sigma = ball_defining_density();
    auto interior = Chart::euclidean(4, "unit ball", 1.0, 1.0);
    auto ae = build_I(sigma, g);
    double res = 0, par = 0, norm = std::abs(ae.I_norm2 - 1.0);
    for (const auto& p : PointSampler(interior, 7).take(200)) {
      res = std::max(res, ae_residual(sigma, g, p).max_abs);
      par = std::max(par, parallel_defect(ae, p));
      norm = std::max(norm, std::abs(tractor_metric(ae.I_at(p), ae.I_at(p)) - 1.0));
    }
    auto pe = pe_check(ae, interior, 1, 40, 40);
    Hypersurface s{sigma, +1, g, "unit sphere", {}};
    double in = 0, umb = 0;
    for (const auto& p : s.sample(8, 50)) {
      in = std::max(in, boundary_normal_match(ae, s, p).discrepancy);
      auto u = umbilicity_defect(s, p);
      umb = std::max({umb, u.tracefree_II, u.tangential_dN});
    }
    out.push_back({"ae_residual", res, 1e-10});
    out.push_back({"|I|^2-1", norm, 1e-10});
    out.push_back({"parallel_defect", par, 1e-10});
    out.push_back({"Ric+3g", pe.einstein_residual, 1e-8});
    out.push_back({"|dx|-1", pe.special_defining, 1e-9});
    out.push_back({"I-N", in, 1e-9});
    out.push_back({"umbilicity", umb, 1e-9});
  });
}

inline double einstein_defect(const MetricModel& m, std::span<const double> p, double lambda) {
  auto cp = curvature_pack(m, p);
  double e = 0, s = 0;
  for (std::size_t i = 0; i < cp.g.size(); ++i) {
    e = std::max(e, std::abs(cp.Ric[i] - lambda * cp.g[i]));
    s = std::max(s, std::abs(cp.g[i]));
  }
  return e / s;
}

inline CriterionReport criterion_model_cone() {
  return detail::timed(4, "model cone: three branches", INFINITY, [](auto& out) {
    auto c = ConeChart::standard(4);
    auto ball = hyperbolic_ball_metric(4);
    auto I = ball_I(c.form);
    double cap = 0;
    for (const auto& p : PointSampler(ball.chart, 11).take(100)) {
      auto a = cap_metric(c, I, p);
      auto b = ball.values(p);
      double m = 0, s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
      }
      cap = std::max(cap, m / std::max(1.0, s));
    }
    auto pts = PointSampler(c.metric().chart, 21).take(50);
    double sph = 0, nul = 0;
    auto ms = section_metric(c, sphere_I(c.form, 0.4));
    for (const auto& p : pts) sph = std::max(sph, einstein_defect(ms, p, 3.0));
    auto m0 = section_metric(c, null_I(c, Point{0.3, -0.2, 0.1, 0.5}));
    for (const auto& p : pts)
      if (m0.chart.valid(p)) nul = std::max(nul, einstein_defect(m0, p, 0.0));
    out.push_back({"cap_vs_ball", cap, 1e-9});
    out.push_back({"Ric-3g(|I|^2=-1)", sph, 1e-9});
    out.push_back({"Ric(|I|^2=0)", nul, 1e-9});
  });
}

inline const EinsteinScale& flat_ball_scale() {
  static const EinsteinScale E = EinsteinScale::from(build_I(ball_defining_density(), flat_metric(4)));
  return E;
}

inline ScalarJetField gjms_probe_density() {
  return ScalarJetField(
      [](std::span<const Jet> y) {
        return 1.0 + y[0] * 0.3 + exp(y[1] * 0.7) * 0.2 - sin(y[0] * y[2]) * 0.4 + cos(y[y.size() - 1] * 1.3) * y[1] * 0.25;
      },
      "gjms probe");
}

inline double pairwise_rel(const GJMSAgreement& a) {
  const double v[3] = {a.tractor, a.product, a.scp};
  const double ref = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2]), 1e-300});
  return std::max({std::abs(v[0] - v[1]), std::abs(v[0] - v[2]), std::abs(v[1] - v[2])}) / ref;
}

inline CriterionReport criterion_gjms() {
  return detail::timed(5, "GJMS triple agreement", 120.0, [](auto& out) {
    const auto& E = flat_ball_scale();
    auto pts = PointSampler(E.probe_chart(), 11).take(50);
    for (int k : {2, 4}) {
      DensityField u{(k - 4) / 2.0, "flat", gjms_probe_density()};
      double worst = 0;
      for (const auto& p : pts) worst = std::max(worst, pairwise_rel(gjms_compare(E, k, u, p)));
      out.push_back({"k" + std::to_string(k) + "_pairwise", worst, 1e-8});
    }
    double exact = 0;
    for (int k : {2, 4, 6, 8})
      for (int n = 3; n <= 8; ++n) {
        auto spec = GJMSSpec::make(k, n + 1);
        for (int i = 1; i <= k / 2; ++i) {
          Rational e = spec.lambda[k / 2 - i] + scattering_constant(spec.s[i - 1], n);
          exact = std::max(exact, std::abs(to_double(e)));
        }
      }
    out.push_back({"lambda+s(n-s)", exact, 0.0});
  });
}

inline CriterionReport criterion_decomposition() {
  return detail::timed(6, "null-space decomposition", INFINITY, [](auto& out) {
    double exact = 0, idem = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> num(-9, 9), den(1, 4), sz(2, 6);
      const int n = sz(rng);
      RationalMatrix E(n);
      for (auto& x : E.a) x = num(rng);
      std::vector<Rational> mu;
      while (mu.size() < 3) {
        Rational m(num(rng), den(rng));
        if (std::find(mu.begin(), mu.end(), m) == mu.end()) mu.push_back(m);
      }
      if (!identity_decomposition_defect(E, mu).is_zero()) exact = 1;
      std::vector<Rational> eig;
      for (int i = 0; i < n; ++i) eig.push_back(mu[i % mu.size()]);
      auto F = diagonalisable_system(eig, seed);
      for (std::size_t i = 0; i < mu.size(); ++i) {
        auto Pi = projector(F, mu, i);
        if (!(Pi * Pi == Pi)) idem = 1;
        for (std::size_t j = 0; j < mu.size(); ++j)
          if (j != i && !(Pi * projector(F, mu, j)).is_zero()) idem = 1;
      }
    }
    auto spec = GJMSSpec::make(4, 4);
    std::vector<double> mu;
    for (auto& s : spec.s) mu.push_back(to_double(scattering_constant(s, 3)));
    FieldFactorSystem F{hyperbolic_ball_metric(4), mu};
    auto u1 = hyperbolic_eigenfunction(4, 1, mu[0]).field();
    auto u2 = hyperbolic_eigenfunction(4, 2, mu[1]).field();
    double rec = 0;
    for (const auto& p : PointSampler(F.metric.chart, 9).take(30)) {
      auto s = project_components(F, u1 + u2, p);
      rec = std::max({rec, std::abs(s.components[0] - u1.value(p)), std::abs(s.components[1] - u2.value(p))});
    }
    out.push_back({"identity_defect", exact, 0.0});
    out.push_back({"proj_idem_orth", idem, 1e-12});
    out.push_back({"field_recovery", rec, 1e-6});
  });
}

inline CriterionReport criterion_dtn() {
  return detail::timed(7, "DtN model, n=3 s=2", 300.0, [](auto& out) {
    auto T = dtn_table_k2(3, 20);
    auto fine = dtn_table_k2(3, 20, RadialGrid{}.refined());
    auto rep = dtn_matrix_report(T, dtn_matrix(T, 20));
    out.push_back({"cross_talk", rep.cross_talk, 1e-8});
    out.push_back({"asymmetry", rep.asymmetry, 1e-8});
    out.push_back({"grid_halving", T.relative_change(fine), 1e-5});
    out.push_back({"Lambda/l_spread", T.principal_ratio_spread(15, 20), 0.02});
  });
}

inline CriterionReport criterion_translation() {
  return detail::timed(8, "boundary-to-bulk translation on the model", INFINITY, [](auto& out) {
    auto q = S3Quadrature::make(8);
    double te = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto phi = random_covector(seed);
      for (const auto& w : q.points) {
        auto a = splitting_T(splitting_E(phi, w));
        auto b = phi(w);
        for (int i = 0; i < 4; ++i) te = std::max(te, std::abs(a[i] - b[i]));
      }
    }
    double adj = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto phi = random_covector(100 + seed);
      auto T = random_tractor(200 + seed);
      const double lhs = q.integrate([&](const Vec4& w) { return tractor_pairing(splitting_E(phi, w), T.at(w)); });
      const double rhs = q.integrate([&](const Vec4& w) { return dot(phi(w), splitting_E_adjoint(T, w)); });
      adj = std::max(adj, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    auto P = translated_operator(dtn_table_k2(3, 8));
    auto basis = vector_harmonic_basis();
    auto M = P.matrix(basis);
    const double scale = M.cwiseAbs().maxCoeff();
    double best = 0;
    const auto& pq = P.op.quad;
    for (const auto& phi : basis) {
      const double in = std::sqrt(covector_pairing(pq, phi, phi));
      auto T = TwistedDtN::apply(P.op, [&](const Vec4& w) { return splitting_E(phi, w); }).field();
      const double outn = std::sqrt(pq.integrate([&](const Vec4& w) {
        auto v = splitting_E_adjoint(T, w);
        return dot(v, v);
      }));
      best = std::max(best, outn / in);
    }
    out.push_back({"T.E-id", te, 0.0});
    out.push_back({"adjointness", adj, 1e-6});
    out.push_back({"P_asymmetry", (M - M.transpose()).cwiseAbs().maxCoeff() / std::max(scale, 1e-300), 1e-6});
    out.push_back({"P_ratio", best, 1e-3, true});
  });
}

inline CriterionReport criterion_dxs() {
  return detail::timed(9, "D_Sigma X f / f = (d+2w+1)(d+w-1)", INFINITY, [](auto& out) {
    const int d = 4;
    auto s = surface_by_name("ellipsoid", sphere_metric(d));
    auto f = probe_density();
    for (double w : {0.0, 1.0, -1.0}) {
      double e = 0;
      for (const auto& p : s.sample(60 + static_cast<int>(w), 50))
        e = std::max(e, std::abs(dxs_ratio(s, f, w, p) - (d + 2 * w + 1) * (d + w - 1)));
      char name[32];
      std::snprintf(name, sizeof name, "w=%g", w);
      out.push_back({name, e, 1e-9});
    }
  });
}

inline std::vector<std::function<CriterionReport()>> acceptance_suite() {
  return {criterion_curvature, [] { return criterion_invariance(); }, criterion_pe_chain, criterion_model_cone,
          criterion_gjms,      criterion_decomposition,                criterion_dtn,      criterion_translation,
          criterion_dxs};
}

}  // namespace tcalc
