#pragma once

// Almost-Einstein scales: the prolonged equation, the parallel tractor
// I = (1/d) D sigma, classification by the sign of |I|^2 and the
// Poincare-Einstein checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tractor_calc/hypersurface.hpp"

namespace tcalc {

struct AEResidual {
  std::vector<double> tracefree;  // trace-free part of nabla nabla sigma + P sigma, d x d
  double rho = 0.0;               // -(1/d) g^{ab}(nabla_a nabla_b sigma + P_ab sigma)
  double max_abs = 0.0;
};

inline AEResidual ae_residual(const ScalarJetField& sigma, const MetricModel& metric, std::span<const double> p) {
  auto geo = LocalGeometry::at(metric, p, 2, CurvatureLevel::ricci);
  const int d = geo.dim();
  auto y = seed_coordinates(p, 2);
  auto s = LocalField::scalar(sigma(y), d, 1.0);
  auto hess = covariant_derivative(geo, covariant_derivative(geo, s));
  const double sv = s.c[0].value();
  std::vector<double> A(d * d);
  double tr = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) A[a * d + b] = hess.c[a * d + b].value() + geo.schouten(a, b).value() * sv;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) tr += geo.ginv(a, b).value() * A[a * d + b];
  AEResidual r;
  r.rho = -tr / d;
  r.tracefree.resize(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      r.tracefree[a * d + b] = A[a * d + b] - tr / d * geo.g(a, b).value();
      r.max_abs = std::max(r.max_abs, std::abs(r.tracefree[a * d + b]));
    }
  return r;
}

// I = (1/d) D sigma as a local field.
inline LocalField tractor_I(const LocalGeometry& geo, const Jet& sigma) {
  const int d = geo.dim();
  return (1.0 / d) * thomas_D(geo, LocalField::scalar(sigma, d, 1.0));
}

inline double tractor_norm2(const LocalGeometry& geo, const LocalField& I) {
  LocalField pair(I.d, 0, 2, 0.0);
  const int m = I.d + 2;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) pair.c[a * m + b] = I.c[a] * I.c[b];
  return contract_tractor(geo, pair, 0, 1).c[0].value();
}

struct AEStructure {
  MetricModel metric;
  DensityField sigma;
  double I_norm2 = 0.0;
  double I_norm2_spread = 0.0;  // max - min over the construction samples
  double residual_max = 0.0;
  bool almost_einstein = true;
  std::vector<std::string> warnings;

  TractorValue I_at(std::span<const double> p) const {
    auto geo = LocalGeometry::at(metric, p, 2, CurvatureLevel::ricci);
    auto y = seed_coordinates(p, 2);
    auto I = tractor_I(geo, sigma.rep(y));
    std::vector<double> gi;
    for (int a = 0; a < geo.dim(); ++a)
      for (int b = 0; b < geo.dim(); ++b) gi.push_back(geo.ginv(a, b).value());
    return tractor_value(I, gi, metric.scale, Point(p.begin(), p.end()));
  }
};

inline constexpr double kAETolerance = 1e-9;

inline AEStructure build_I(const ScalarJetField& sigma, const MetricModel& metric, std::uint64_t seed = 1,
                           int samples = 20) {
  AEStructure ae{metric, DensityField{1.0, metric.scale, sigma}};
  PointSampler s(metric.chart, seed);
  double lo = INFINITY, hi = -INFINITY, scale = 0;
  for (int i = 0; i < samples; ++i) {
    auto p = s.next();
    auto geo = LocalGeometry::at(metric, p, 2, CurvatureLevel::ricci);
    auto y = seed_coordinates(p, 2);
    auto I = tractor_I(geo, sigma(y));
    for (const auto& c : I.c) scale = std::max(scale, std::abs(c.value()));
    const double n2 = tractor_norm2(geo, I);
    lo = std::min(lo, n2);
    hi = std::max(hi, n2);
    ae.residual_max = std::max(ae.residual_max, ae_residual(sigma, metric, p).max_abs);
  }
  if (scale == 0.0) throw DegeneracyError("sigma vanishes identically: I = 0 is excluded");
  ae.I_norm2 = 0.5 * (lo + hi);
  ae.I_norm2_spread = hi - lo;
  if (ae.residual_max > kAETolerance) {
    ae.almost_einstein = false;
    ae.warnings.push_back("ae_residual " + std::to_string(ae.residual_max) + " exceeds tolerance");
  }
  return ae;
}

inline double parallel_defect(const AEStructure& ae, std::span<const double> p) {
  auto geo = LocalGeometry::at(ae.metric, p, 3, CurvatureLevel::ricci);
  auto y = seed_coordinates(p, 3);
  auto I = tractor_I(geo, ae.sigma.rep(y));
  return positive_norm(geo, tractor_connection(geo, I));
}

enum class AESign { negative, zero, positive };

inline std::string to_string(AESign s) {
  switch (s) {
    case AESign::negative: return "-";
    case AESign::zero: return "0";
    case AESign::positive: return "+";
  }
  return "?";
}

struct Classification {
  AESign sign = AESign::zero;
  std::string branch;
  std::string zero_set;  // empty | point | hypersurface
  std::vector<Point> zero_samples;
};

namespace detail {
inline Point bisect_zero(const ScalarJetField& f, Point a, Point b) {
  double fa = f.value(a);
  for (int it = 0; it < 80; ++it) {
    Point m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
    const double fm = f.value(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return a;
}
}  // namespace detail

inline Classification classify(const AEStructure& ae, std::uint64_t seed = 1, int samples = 200,
                               double zero_tol = 1e-9) {
  if (ae.I_norm2_spread > 1e-8)
    throw NotAlmostEinsteinError("|I|^2 is not constant: spread " + std::to_string(ae.I_norm2_spread));
  Classification c;
  if (ae.I_norm2 < -zero_tol) {
    c.sign = AESign::negative;
    c.branch = "positive scalar curvature Einstein metric everywhere; singularity set empty";
  } else if (ae.I_norm2 > zero_tol) {
    c.sign = AESign::positive;
    c.branch = "negative scalar curvature Einstein off a totally umbilic hypersurface";
  } else {
    c.sign = AESign::zero;
    c.branch = "Ricci-flat off isolated points";
  }
  // search a region twice the chart's nominal sampling radius
  Chart region = ae.metric.chart;
  region.sample_radius *= 2;
  PointSampler s(region, seed);
  // uniform in radius rather than volume, so the inner region is not starved
  std::vector<Point> pts;
  for (auto p : s.take(samples)) {
    double r2 = 0;
    for (double v : p) r2 += v * v;
    const double t = std::pow(std::sqrt(r2) / region.sample_radius, static_cast<double>(p.size()) - 1.0);
    for (auto& v : p) v *= t;
    if (region.valid(p)) pts.push_back(std::move(p));
  }
  const auto& f = ae.sigma.rep;
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(f.value(p));
  for (std::size_t i = 0; i + 1 < pts.size() && c.zero_samples.size() < 20; ++i)
    if ((v[i] > 0) != (v[i + 1] > 0)) c.zero_samples.push_back(detail::bisect_zero(f, pts[i], pts[i + 1]));
  if (!c.zero_samples.empty()) {
    c.zero_set = "hypersurface";
    return c;
  }
  // A zero without a sign change is a critical point of sigma: Newton on d sigma.
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (std::abs(v[i]) < std::abs(v[best])) best = i;
  Point q = pts[best];
  const int d = static_cast<int>(q.size());
  for (int it = 0; it < 50; ++it) {
    auto j = f.at(q, 2);
    Eigen::MatrixXd Hm(d, d);
    Eigen::VectorXd g(d);
    for (int a = 0; a < d; ++a) {
      g(a) = j.derivative(a).value();
      for (int b = 0; b < d; ++b) Hm(a, b) = j.derivative(a).derivative(b).value();
    }
    Eigen::VectorXd step = Hm.colPivHouseholderQr().solve(g);
    for (int a = 0; a < d; ++a) q[a] -= step(a);
    if (step.norm() < 1e-14 || !ae.metric.chart.valid(q)) break;
  }
  if (ae.metric.chart.valid(q) && std::abs(f.value(q)) < 1e-10) {
    c.zero_set = "point";
    c.zero_samples.push_back(q);
  } else {
    c.zero_set = "empty";
  }
  return c;
}

struct PEReport {
  bool is_pe = false;
  double I_norm2 = 0.0;
  double einstein_residual = 0.0;     // max |Ric(g+) + n g+| / max |g+| over interior samples
  double special_defining = 0.0;      // max | |d sigma|_g - 1 | over boundary samples
  std::string hint;
};

// interior: chart of the manifold with boundary (sigma > 0 inside, zero on its boundary).
inline PEReport pe_check(const AEStructure& ae, const Chart& interior, std::uint64_t seed = 1, int interior_samples = 20,
                         int boundary_samples = 20) {
  PEReport r;
  r.I_norm2 = ae.I_norm2;
  const int d = ae.metric.dim();
  const auto& sigma = ae.sigma.rep;
  PointSampler s(interior, seed);
  auto pts = s.take(interior_samples);
  for (const auto& p : pts)
    if (sigma.value(p) <= 0) throw BoundaryError("sigma is not positive in the interior: not a defining density");
  auto gplus = conformal_rescale(ae.metric, sigma.then([](const Jet& x) { return -log(x); }, "-log"), "g+");
  for (const auto& p : pts) {
    auto c = curvature_pack(gplus, p);
    double gmax = 0, res = 0;
    for (int i = 0; i < d * d; ++i) {
      gmax = std::max(gmax, std::abs(c.g[i]));
      res = std::max(res, std::abs(c.Ric[i] + (d - 1) * c.g[i]));
    }
    r.einstein_residual = std::max(r.einstein_residual, res / gmax);
  }
  Hypersurface bnd{sigma, +1, ae.metric, "zero set of sigma", {}};
  PointSampler sb(ae.metric.chart, seed + 1);
  int found = 0;
  for (int guard = 0; found < boundary_samples && guard < 100 * boundary_samples; ++guard) {
    Point q;
    try {
      q = bnd.project(sb.next());
    } catch (const DegeneracyError&) {
      continue;
    }
    if (!ae.metric.chart.valid(q) || !bnd.on(q)) continue;
    auto j = surface_jets(bnd, q, 1);
    double n2 = 0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        n2 += j.geo.ginv(a, b).value() * j.xj.derivative(a).value() * j.xj.derivative(b).value();
    r.special_defining = std::max(r.special_defining, std::abs(std::sqrt(n2) - 1.0));
    ++found;
  }
  if (found == 0) {
    r.hint = "sigma has no zero set on the chart";
    return r;
  }
  const bool unit = std::abs(ae.I_norm2 - 1.0) <= 1e-10;
  if (!unit) r.hint = "|I|^2 = " + std::to_string(ae.I_norm2) + "; rescale sigma by 1/sqrt(|I|^2)";
  r.is_pe = unit && r.einstein_residual <= 1e-8 && r.special_defining <= 1e-9;
  return r;
}

struct NormalMatch {
  double discrepancy = 0.0;  // max component |I - N|
  double H = 0.0;
  double H_from_sigma = 0.0;  // -(1/d) Delta sigma
};

inline NormalMatch boundary_normal_match(const AEStructure& ae, const Hypersurface& s, std::span<const double> p) {
  s.require_on(p);
  const int d = s.dim();
  auto j = surface_jets(s, p, 2);
  auto I = tractor_I(j.geo, ae.sigma.rep(j.y));
  NormalMatch m;
  for (int k = 0; k < d + 2; ++k) m.discrepancy = std::max(m.discrepancy, std::abs(I.c[k].value() - j.N.c[k].value()));
  m.H = j.H.value();
  auto lap = laplacian(j.geo, LocalField::scalar(ae.sigma.rep(j.y), d, 1.0));
  m.H_from_sigma = -lap.c[0].value() / d;
  return m;
}

}  // namespace tcalc
