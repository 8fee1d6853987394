#pragma once

// GJMS operators on an Einstein scale sigma (|I|^2 = 1, g+ = sigma^{-2} g)
// and the scattering Laplacian, each in more than one form.
//
// Weights: u has weight w0 = (k-d)/2 and P_k u weight -(k+d)/2. A density of
// weight w with representative u in the working scale corresponds to the
// function sigma^{-w} u in the g+ trivialisation (EinsteinScale::to_gplus).

#include <cmath>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "tractor_calc/almost_einstein.hpp"

namespace tcalc {

using Rational = boost::rational<long long>;

inline std::string to_string(const Rational& r) {
  return r.denominator() == 1 ? std::to_string(r.numerator())
                              : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}
inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

// lambda_l = Sc (d+2l-2)(d-2l) / (4d(d-1)), l = 1..k/2
inline std::vector<Rational> lambda_list(int k, int d, Rational Sc) {
  if (k < 2 || k % 2) throw ArgumentError("lambda_list needs even k >= 2");
  std::vector<Rational> out;
  for (int l = 1; l <= k / 2; ++l)
    out.push_back(Sc * Rational((d + 2 * l - 2) * (d - 2 * l), 4 * d * (d - 1)));
  return out;
}

// s_i = (k+n+1-2i)/2, i = 1..k/2
inline std::vector<Rational> s_list(int k, int n) {
  if (k < 2 || k % 2) throw ArgumentError("s_list needs even k >= 2");
  std::vector<Rational> out;
  for (int i = 1; i <= k / 2; ++i) out.push_back(Rational(k + n + 1 - 2 * i, 2));
  return out;
}

inline Rational scattering_constant(const Rational& s, int n) { return s * (Rational(n) - s); }

struct GJMSSpec {
  int k = 2;
  int d = 4;
  Rational Sc{-12};
  std::vector<Rational> lambda, s;
  std::string scale = "hyperbolic";

  int n() const { return d - 1; }

  // Sc defaults to the hyperbolic value -d(d-1).
  static GJMSSpec make(int k, int d) { return make(k, d, Rational(-d * (d - 1))); }
  static GJMSSpec make(int k, int d, Rational Sc) {
    GJMSSpec g{k, d, Sc, lambda_list(k, d, Sc), s_list(k, d - 1)};
    return g;
  }

  // lambda_{k/2+1-i} = -s_i(n-s_i), exactly; meaningful for the hyperbolic Sc.
  bool identity_holds() const {
    const int m = k / 2;
    for (int i = 1; i <= m; ++i)
      if (lambda[m - i] != -scattering_constant(s[i - 1], n())) return false;
    return true;
  }
  bool distinct() const {
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j)
        if (s[i] == s[j] || scattering_constant(s[i], n()) == scattering_constant(s[j], n())) return false;
    return true;
  }
};

inline constexpr int kDefaultMaxK = 6;
inline constexpr double kBoundaryTolerance = 1e-8;
inline constexpr double kProbeSigma = 0.1;

// Contract the first tractor slot of f with I.
inline LocalField contract_with(const LocalGeometry& geo, const LocalField& I, const LocalField& f) {
  if (f.tensor_rank != 0 || f.tractor_rank < 1) throw ArgumentError("contract_with needs a tractor field");
  LocalField pair(f.d, 0, f.tractor_rank + 1, f.weight + I.weight);
  const std::size_t n = f.count();
  for (int A = 0; A < f.d + 2; ++A)
    for (std::size_t k = 0; k < n; ++k) pair.c[A * n + k] = I.c[A] * f.c[k];
  return contract_tractor(geo, pair, 0, 1);
}

inline Jet scalar_laplacian(const LocalGeometry& geo, const Jet& f) {
  return laplacian(geo, LocalField::scalar(f, geo.dim(), 0.0)).c[0];
}

struct EinsteinScale {
  AEStructure ae;
  MetricModel gplus;
  int d = 0;
  double einstein_residual = 0.0;

  static EinsteinScale from(const AEStructure& ae, std::uint64_t seed = 1, int samples = 10) {
    if (std::abs(ae.I_norm2 - 1.0) > 1e-9)
      throw NormalizationError("Einstein scale needs |I|^2 = 1, got " + std::to_string(ae.I_norm2));
    EinsteinScale e;
    e.ae = ae;
    e.d = ae.metric.dim();
    auto sigma = ae.sigma.rep;
    auto omega = sigma.then([](const Jet& s) { return -1.0 * log(s); }, "-log");
    e.gplus = conformal_rescale(ae.metric, omega, "g+");
    e.gplus.chart.domain = [sigma](std::span<const double> p) { return sigma.value(p) > 1e-3; };
    // Ric(g+) = -n g+ at samples
    const int n = e.d - 1;
    PointSampler s(e.gplus.chart, seed);
    for (const auto& p : s.take(samples)) {
      auto cp = curvature_pack(e.gplus, p);
      double err = 0, scale = 0;
      for (std::size_t i = 0; i < cp.g.size(); ++i) {
        err = std::max(err, std::abs(cp.Ric[i] + n * cp.g[i]));
        scale = std::max(scale, std::abs(cp.g[i]));
      }
      e.einstein_residual = std::max(e.einstein_residual, err / scale);
    }
    if (e.einstein_residual > 1e-8)
      throw NotAlmostEinsteinError("g+ is not Einstein: residual " + std::to_string(e.einstein_residual));
    return e;
  }

  double sigma(std::span<const double> p) const { return ae.sigma.rep.value(p); }

  // Probe region {sigma >= sigma_min}. Forms evaluated on g+ functions lose
  // accuracy like sigma^{-k} towards the boundary.
  Chart probe_chart(double sigma_min = kProbeSigma) const {
    Chart c = gplus.chart;
    auto s = ae.sigma.rep;
    c.domain = [s, sigma_min](std::span<const double> p) { return s.value(p) >= sigma_min; };
    c.description = "{sigma >= " + std::to_string(sigma_min) + "}";
    return c;
  }
  void require_interior(std::span<const double> p) const {
    ae.metric.chart.require_valid(p);
    if (std::abs(sigma(p)) < kBoundaryTolerance)
      throw BoundaryError("sigma = 0: the scattering operators degenerate to a multiple of the Robin operator here");
  }

  // The sigma-dictionary. Weight w density <-> sigma^{-w} u.
  ScalarJetField to_gplus(const DensityField& u) const {
    auto s = ae.sigma.rep;
    auto r = u.rep;
    const double w = u.weight;
    return ScalarJetField([s, r, w](std::span<const Jet> y) { return r(y) * pow(s(y), -w); },
                          "sigma^{-w}" + r.description());
  }
  DensityField from_gplus(const ScalarJetField& f, double w) const {
    auto s = ae.sigma.rep;
    return {w, ae.metric.scale,
            ScalarJetField([s, f, w](std::span<const Jet> y) { return f(y) * pow(s(y), w); },
                           "sigma^{w}" + f.description())};
  }
  double to_gplus(double value, double w, std::span<const double> p) const { return value * std::pow(sigma(p), -w); }

  // Working-scale geometry, sigma and I = (1/d) D sigma as jets at p.
  struct Local {
    LocalGeometry geo;
    Jet sigma;
    LocalField I;
  };
  Local local(std::span<const double> p, int order) const {
    auto geo = LocalGeometry::at(ae.metric, p, order + 2, CurvatureLevel::ricci);
    auto y = seed_coordinates(p, order + 2);
    Jet s = ae.sigma.rep(y);
    return {geo, s, tractor_I(geo, s)};
  }
};

// (Delta^{g+} - s(n-s)) f on a g+ function.
inline double scattering_laplacian(const EinsteinScale& E, double s, const ScalarJetField& f,
                                   std::span<const double> p) {
  E.require_interior(p);
  const int n = E.d - 1;
  auto geo = LocalGeometry::at(E.gplus, p, 2, CurvatureLevel::none);
  Jet v = f.at(p, 2);
  return scalar_laplacian(geo, v).value() - s * (n - s) * v.value();
}

// Weighted form (Delta + (2J/d) s(n-s)) u with s = n + w, read in the g+
// trivialisation where sigma = 1 is parallel and J is computed, not assumed.
// Equals sigma I^A D_A u there.
inline Jet preslap_step(const LocalGeometry& gplus, const Jet& f, double w) {
  const int d = gplus.dim();
  const double s = d - 1 + w;
  return scalar_laplacian(gplus, f) + gplus.J() * f * (2.0 * s * (d - 1 - s) / d);
}

// g+ value of sigma I^A D_A u for a working-scale density u.
inline double scattering_laplacian_weighted(const EinsteinScale& E, const DensityField& u,
                                            std::span<const double> p) {
  E.require_interior(p);
  auto geo = LocalGeometry::at(E.gplus, p, 4, CurvatureLevel::ricci);
  auto y = seed_coordinates(p, 4);
  return preslap_step(geo, E.to_gplus(u)(y), u.weight).value();
}

// I^A D_A u through the tractor D.
inline double I_dot_D(const EinsteinScale& E, const DensityField& u, std::span<const double> p) {
  E.require_interior(p);
  auto L = E.local(p, 2);
  auto y = seed_coordinates(p, 4);
  auto Du = thomas_D(L.geo, LocalField::scalar(u.rep(y), E.d, u.weight));
  return contract_with(L.geo, L.I, Du).c[0].value();
}

inline void check_k(int k, int max_k) {
  if (k < 2 || k % 2) throw ArgumentError("GJMS needs even k >= 2");
  if (k > max_k) throw CapabilityError("k = " + std::to_string(k) + " exceeds the jet budget cap " + std::to_string(max_k));
}
inline void check_weight(const EinsteinScale& E, int k, const DensityField& u) {
  if (!weight_equal(u.weight, (k - E.d) / 2.0)) throw WeightError("GJMS input needs weight (k-d)/2");
}

// prod_l (Delta^{g+} + lambda_l) f, factors applied in the given order (default l = 1..k/2).
inline double gjms_product_form(const EinsteinScale& E, int k, const ScalarJetField& f, std::span<const double> p,
                                std::vector<int> order = {}, int max_k = kDefaultMaxK) {
  check_k(k, max_k);
  E.require_interior(p);
  auto spec = GJMSSpec::make(k, E.d);
  if (order.empty())
    for (int l = 1; l <= k / 2; ++l) order.push_back(l);
  auto geo = LocalGeometry::at(E.gplus, p, k, CurvatureLevel::none);
  Jet v = f.at(p, k);
  for (int l : order) v = scalar_laplacian(geo, v) + v * to_double(spec.lambda.at(l - 1));
  return v.value();
}

// The composition of scattering Laplacians, factor i being Delta^{g+} - s_i(n-s_i), i = 1 first.
inline double gjms_scp_gplus(const EinsteinScale& E, int k, const ScalarJetField& f, std::span<const double> p,
                             int max_k = kDefaultMaxK) {
  check_k(k, max_k);
  E.require_interior(p);
  auto spec = GJMSSpec::make(k, E.d);
  auto geo = LocalGeometry::at(E.gplus, p, k, CurvatureLevel::none);
  Jet v = f.at(p, k);
  for (const auto& s : spec.s) v = scalar_laplacian(geo, v) - v * to_double(scattering_constant(s, spec.n()));
  return v.value();
}

// Chain of weighted steps in the g+ trivialisation, weight dropping by one
// per factor; returns the g+ value of P_k u.
inline double gjms_scp_form(const EinsteinScale& E, int k, const DensityField& u, std::span<const double> p,
                            int max_k = kDefaultMaxK) {
  check_k(k, max_k);
  check_weight(E, k, u);
  E.require_interior(p);
  auto geo = LocalGeometry::at(E.gplus, p, k + 2, CurvatureLevel::ricci);
  auto y = seed_coordinates(p, k + 2);
  Jet v = E.to_gplus(u)(y);
  double w = u.weight;
  for (int i = 0; i < k / 2; ++i, w -= 1) v = preslap_step(geo, v, w);
  return v.value();
}

// sigma^{1-k/2} I^{A_2}..I^{A_{k/2}} Box D_{A_2}..D_{A_{k/2}} u
inline double gjms_tractor_form(const EinsteinScale& E, int k, const DensityField& u, std::span<const double> p,
                                int max_k = kDefaultMaxK) {
  check_k(k, max_k);
  check_weight(E, k, u);
  E.require_interior(p);
  auto L = E.local(p, k);
  auto y = seed_coordinates(p, k + 2);
  LocalField f = LocalField::scalar(u.rep(y), E.d, u.weight);
  const int m = k / 2 - 1;
  for (int i = 0; i < m; ++i) f = thomas_D(L.geo, f);
  f = yamabe_box(L.geo, f);
  for (int i = 0; i < m; ++i) f = contract_with(L.geo, L.I, f);
  return f.c[0].value() * std::pow(L.sigma.value(), 1.0 - k / 2.0);
}

// sigma^{-k/2} (I.D) o ... o (I.D) u, k/2 factors.
inline double gjms_iterated_form(const EinsteinScale& E, int k, const DensityField& u, std::span<const double> p,
                                 int max_k = kDefaultMaxK) {
  check_k(k, max_k);
  check_weight(E, k, u);
  E.require_interior(p);
  auto L = E.local(p, k);
  auto y = seed_coordinates(p, k + 2);
  LocalField f = LocalField::scalar(u.rep(y), E.d, u.weight);
  for (int i = 0; i < k / 2; ++i) f = contract_with(L.geo, L.I, thomas_D(L.geo, f));
  return f.c[0].value() * std::pow(L.sigma.value(), -k / 2.0);
}

struct GJMSAgreement {
  Point point;
  double tractor = 0.0, iterated = 0.0, product = 0.0, scp = 0.0;  // all in the g+ trivialisation
  double max_rel = 0.0;
};

inline GJMSAgreement gjms_compare(const EinsteinScale& E, int k, const DensityField& u, std::span<const double> p,
                                  int max_k = kDefaultMaxK) {
  GJMSAgreement a;
  a.point.assign(p.begin(), p.end());
  const double w_out = -(k + E.d) / 2.0;
  a.tractor = E.to_gplus(gjms_tractor_form(E, k, u, p, max_k), w_out, p);
  a.iterated = E.to_gplus(gjms_iterated_form(E, k, u, p, max_k), w_out, p);
  a.scp = gjms_scp_form(E, k, u, p, max_k);
  a.product = gjms_product_form(E, k, E.to_gplus(u), p, {}, max_k);
  const double ref = std::max({std::abs(a.tractor), std::abs(a.product), std::abs(a.scp), 1e-300});
  for (double v : {a.iterated, a.product, a.scp}) a.max_rel = std::max(a.max_rel, std::abs(v - a.tractor) / ref);
  return a;
}

}  // namespace tcalc
