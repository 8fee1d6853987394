#pragma once

// Charts, scalar jet fields and conformal densities.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tractor_calc/errors.hpp"
#include "tractor_calc/jet.hpp"

namespace tcalc {

using Point = std::vector<double>;

inline constexpr int kDefaultJetOrder = 6;

struct Chart {
  int dim = 4;
  std::vector<std::string> coordinate_names;
  // Points with |y| < validity_radius are valid; infinity for global charts.
  double validity_radius = INFINITY;
  // Random sampling region radius when the chart is unbounded.
  double sample_radius = 1.0;
  std::string description;
  // Extra validity condition for charts that are not balls (e.g. caps).
  std::function<bool(std::span<const double>)> domain;

  static Chart euclidean(int dim, std::string description, double validity_radius = INFINITY,
                         double sample_radius = 1.0) {
    if (dim < 3) throw ArgumentError("chart dimension must be >= 3");
    Chart c;
    c.dim = dim;
    for (int i = 0; i < dim; ++i) c.coordinate_names.push_back("y" + std::to_string(i + 1));
    c.validity_radius = validity_radius;
    c.sample_radius = sample_radius;
    c.description = std::move(description);
    return c;
  }

  bool valid(std::span<const double> p) const {
    if (static_cast<int>(p.size()) != dim) return false;
    double r2 = 0.0;
    for (double v : p) {
      if (!std::isfinite(v)) return false;
      r2 += v * v;
    }
    if (!(std::sqrt(r2) < validity_radius)) return false;
    return !domain || domain(p);
  }

  void require_valid(std::span<const double> p) const {
    if (!valid(p)) throw DomainError("point outside chart validity: " + description);
  }
};

// Deterministic sampler: uniform in a ball whose radius keeps a 0.05 margin
// from the chart boundary.
class PointSampler {
 public:
  PointSampler(const Chart& chart, std::uint64_t seed, double margin = 0.05)
      : chart_(chart), rng_(seed), margin_(margin) {}

  Point next() {
    const double radius = std::isfinite(chart_.validity_radius)
                              ? std::min(chart_.validity_radius - margin_, chart_.sample_radius)
                              : chart_.sample_radius;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Point p(chart_.dim);
    for (int guard = 0; guard < 100000; ++guard) {
      double r2 = 0.0;
      for (auto& v : p) {
        v = u(rng_);
        r2 += v * v;
      }
      if (r2 > 1.0) continue;
      for (auto& v : p) v *= radius;
      if (!chart_.domain || chart_.domain(p)) return p;
    }
    throw DomainError("sampler found no valid point in " + chart_.description);
  }

  std::vector<Point> take(int n) {
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.push_back(next());
    return pts;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  Chart chart_;
  std::mt19937_64 rng_;
  double margin_;
};

using ScalarFn = std::function<Jet(std::span<const Jet>)>;

// A scalar function evaluable on coordinate jets, hence with all partials.
class ScalarJetField {
 public:
  ScalarJetField() = default;
  ScalarJetField(ScalarFn fn, std::string description = {}, int max_order = kDefaultJetOrder)
      : fn_(std::move(fn)), description_(std::move(description)), max_order_(max_order) {}

  Jet operator()(std::span<const Jet> y) const { return fn_(y); }
  Jet at(std::span<const double> p, int order) const {
    auto y = seed_coordinates(p, order);
    return fn_(y);
  }
  double value(std::span<const double> p) const { return at(p, 0).value(); }

  const std::string& description() const { return description_; }
  int max_order() const { return max_order_; }
  bool empty() const { return !fn_; }

  static ScalarJetField constant(double c) {
    return {[c](std::span<const Jet> y) { return Jet::constant(y[0].space(), c).truncated(y[0].order()); },
            "const"};
  }
  static ScalarJetField coordinate(int i) {
    return {[i](std::span<const Jet> y) { return y[i]; }, "y" + std::to_string(i + 1)};
  }
  // |y|^2
  static ScalarJetField radius_squared() {
    return {[](std::span<const Jet> y) {
              Jet r = y[0] * y[0];
              for (std::size_t i = 1; i < y.size(); ++i) r += y[i] * y[i];
              return r;
            },
            "|y|^2"};
  }

  friend ScalarJetField operator+(const ScalarJetField& a, const ScalarJetField& b) {
    return {[a, b](std::span<const Jet> y) { return a(y) + b(y); }, "(" + a.description_ + "+" + b.description_ + ")",
            std::min(a.max_order_, b.max_order_)};
  }
  friend ScalarJetField operator-(const ScalarJetField& a, const ScalarJetField& b) {
    return {[a, b](std::span<const Jet> y) { return a(y) - b(y); }, "(" + a.description_ + "-" + b.description_ + ")",
            std::min(a.max_order_, b.max_order_)};
  }
  friend ScalarJetField operator*(const ScalarJetField& a, const ScalarJetField& b) {
    return {[a, b](std::span<const Jet> y) { return a(y) * b(y); }, a.description_ + "*" + b.description_,
            std::min(a.max_order_, b.max_order_)};
  }
  friend ScalarJetField operator*(double s, const ScalarJetField& a) {
    return {[a, s](std::span<const Jet> y) { return a(y) * s; }, std::to_string(s) + "*" + a.description_,
            a.max_order_};
  }
  ScalarJetField then(std::function<Jet(const Jet&)> f, std::string name) const {
    auto self = *this;
    return {[self, f](std::span<const Jet> y) { return f(self(y)); }, name + "(" + description_ + ")", max_order_};
  }

 private:
  ScalarFn fn_;
  std::string description_;
  int max_order_ = kDefaultJetOrder;
};

// A conformal density of weight w represented by its function in one scale.
struct DensityField {
  double weight = 0.0;
  std::string scale;
  ScalarJetField rep;

  // Representative in the scale e^{2 omega} g: multiply by e^{w omega}.
  DensityField rescaled(const ScalarJetField& omega, std::string new_scale) const {
    const double w = weight;
    auto r = rep;
    return {weight, std::move(new_scale),
            ScalarJetField([r, omega, w](std::span<const Jet> y) { return r(y) * exp(omega(y) * w); },
                           "e^{w omega}" + r.description())};
  }
};

}  // namespace tcalc
