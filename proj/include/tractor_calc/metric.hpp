#pragma once

// Closed-form metric families on explicit charts.

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tractor_calc/fields.hpp"

namespace tcalc {

enum class MetricFamily { flat, sphere, hyperbolic_ball, conformal_rescale, cap_pullback, pullback };

inline std::string to_string(MetricFamily f) {
  switch (f) {
    case MetricFamily::flat: return "flat";
    case MetricFamily::sphere: return "sphere";
    case MetricFamily::hyperbolic_ball: return "hyperbolic_ball";
    case MetricFamily::conformal_rescale: return "conformal_rescale";
    case MetricFamily::cap_pullback: return "cap_pullback";
    case MetricFamily::pullback: return "pullback";
  }
  return "?";
}

// Row-major d x d component jets g_ab.
using MetricFn = std::function<std::vector<Jet>(std::span<const Jet>)>;

struct MetricModel {
  Chart chart;
  MetricFn components;
  MetricFamily family = MetricFamily::flat;
  // Identifies the trivialization of density bundles induced by this metric.
  std::string scale;
  double parameter = 0.0;  // sphere radius etc.

  int dim() const { return chart.dim; }

  std::vector<Jet> at(std::span<const Jet> y) const { return components(y); }

  std::vector<double> values(std::span<const double> p) const {
    auto y = seed_coordinates(p, 0);
    auto g = components(y);
    std::vector<double> v;
    for (auto& j : g) v.push_back(j.value());
    return v;
  }
};

namespace detail {
inline std::vector<Jet> scaled_identity(const Jet& factor, int d) {
  std::vector<Jet> g;
  g.reserve(d * d);
  Jet zero = Jet::zero(factor.space(), factor.order());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) g.push_back(a == b ? factor : zero);
  return g;
}
inline Jet radius_squared(std::span<const Jet> y) {
  Jet r = y[0] * y[0];
  for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i];
  return r;
}
}  // namespace detail

inline MetricModel flat_metric(int d) {
  MetricModel m;
  m.chart = Chart::euclidean(d, "R^" + std::to_string(d));
  m.components = [d](std::span<const Jet> y) {
    return detail::scaled_identity(Jet::constant(y[0].space(), 1.0), d);
  };
  m.family = MetricFamily::flat;
  m.scale = "flat";
  return m;
}

// Round sphere of radius r in stereographic coordinates:
// g = 4 r^2 (1+|y|^2)^{-2} delta. The same formula serves the antipodal chart.
inline MetricModel sphere_metric(int d, double radius = 1.0) {
  MetricModel m;
  m.chart = Chart::euclidean(d, "stereographic S^" + std::to_string(d), INFINITY, 1.5);
  m.components = [d, radius](std::span<const Jet> y) {
    Jet f = pow(1.0 + detail::radius_squared(y), -2.0) * (4.0 * radius * radius);
    return detail::scaled_identity(f, d);
  };
  m.family = MetricFamily::sphere;
  m.scale = "round(" + std::to_string(radius) + ")";
  m.parameter = radius;
  return m;
}

// Poincare ball: g_+ = 4 (1-|y|^2)^{-2} delta on |y| < 1, Ric = -(d-1) g_+.
inline MetricModel hyperbolic_ball_metric(int d) {
  MetricModel m;
  m.chart = Chart::euclidean(d, "open unit ball B^" + std::to_string(d), 1.0, 1.0);
  m.components = [d](std::span<const Jet> y) {
    Jet f = pow(1.0 - detail::radius_squared(y), -2.0) * 4.0;
    return detail::scaled_identity(f, d);
  };
  m.family = MetricFamily::hyperbolic_ball;
  m.scale = "hyperbolic";
  return m;
}

// e^{2 omega} base, pointwise.
inline MetricModel conformal_rescale(const MetricModel& base, const ScalarJetField& omega, std::string scale_tag = {}) {
  MetricModel m;
  m.chart = base.chart;
  auto comps = base.components;
  m.components = [comps, omega](std::span<const Jet> y) {
    auto g = comps(y);
    Jet f = exp(omega(y) * 2.0);
    for (auto& c : g) c = c * f;
    return g;
  };
  m.family = MetricFamily::conformal_rescale;
  m.scale = scale_tag.empty() ? "e^{2w}" + base.scale : std::move(scale_tag);
  return m;
}

// Chart map-pulled metric: g_ij(s) = G_ab(F(s)) dF^a/ds^i dF^b/ds^j.
// The map F must be evaluable on jets; the result loses one jet order.
inline MetricModel pullback_metric(const MetricModel& target, Chart chart,
                                   std::function<std::vector<Jet>(std::span<const Jet>)> map,
                                   std::string scale_tag) {
  MetricModel m;
  m.chart = std::move(chart);
  auto comps = target.components;
  const int D = target.dim();
  const int n = m.chart.dim;
  m.components = [comps, map, D, n](std::span<const Jet> s) {
    auto F = map(s);
    auto G = comps(F);
    std::vector<std::vector<Jet>> dF(n);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < D; ++a) dF[i].push_back(F[a].derivative(i));
    std::vector<Jet> g;
    g.reserve(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet acc = Jet::zero(s[0].space(), s[0].order() - 1);
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b) acc += G[a * D + b] * dF[i][a] * dF[j][b];
        g.push_back(acc);
      }
    return g;
  };
  m.family = MetricFamily::pullback;
  m.scale = std::move(scale_tag);
  return m;
}

}  // namespace tcalc
