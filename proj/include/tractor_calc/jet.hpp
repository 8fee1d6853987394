#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet holds the Taylor coefficients of a function of `nvars` variables about
// a fixed base point, for all monomials of total degree <= order. Arithmetic is
// exact up to that order, so iterated differentiation is exact and mixed
// partials commute by construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tractor_calc/errors.hpp"

namespace tcalc {

class JetSpace {
 public:
  static const JetSpace& get(int nvars, int max_order) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{nvars, max_order}];
    if (!slot) slot.reset(new JetSpace(nvars, max_order));
    return *slot;
  }

  int nvars() const { return nvars_; }
  int max_order() const { return max_order_; }
  // Number of monomials of total degree <= order.
  std::size_t size(int order) const { return degree_start_[order + 1]; }
  int degree(std::size_t idx) const { return degree_[idx]; }
  const std::uint8_t* exponents(std::size_t idx) const { return &exps_[idx * nvars_]; }
  // Index of the monomial (idx + e_var), or -1 when it exceeds max_order.
  int shift(int var, std::size_t idx) const { return shift_[var * size(max_order_) + idx]; }
  // Multi-index factorial alpha!.
  double factorial(std::size_t idx) const { return factorial_[idx]; }

  struct Term {
    std::uint32_t a, b, out;
  };
  // Product terms whose output degree is <= order.
  std::span<const Term> product_terms(int order) const {
    return {terms_.data(), terms_upto_[order]};
  }

  int index_of(std::span<const int> alpha) const {
    int deg = 0;
    for (int a : alpha) deg += a;
    if (deg > max_order_) return -1;
    for (std::size_t i = degree_start_[deg]; i < degree_start_[deg + 1]; ++i) {
      bool same = true;
      for (int v = 0; v < nvars_; ++v)
        if (exps_[i * nvars_ + v] != alpha[v]) { same = false; break; }
      if (same) return static_cast<int>(i);
    }
    return -1;
  }

 private:
  JetSpace(int nvars, int max_order) : nvars_(nvars), max_order_(max_order) {
    if (nvars < 1 || max_order < 0 || max_order > 40)
      throw ArgumentError("JetSpace: unsupported dimensions");
    std::vector<std::uint8_t> cur(nvars, 0);
    degree_start_.push_back(0);
    for (int deg = 0; deg <= max_order; ++deg) {
      enumerate(deg, 0, cur);
      degree_start_.push_back(degree_.size());
    }
    const std::size_t n = degree_.size();
    shift_.assign(static_cast<std::size_t>(nvars) * n, -1);
    std::vector<int> alpha(nvars);
    for (std::size_t i = 0; i < n; ++i) {
      for (int v = 0; v < nvars; ++v) alpha[v] = exps_[i * nvars + v];
      for (int v = 0; v < nvars; ++v) {
        alpha[v] += 1;
        shift_[v * n + i] = index_of(alpha);
        alpha[v] -= 1;
      }
      double f = 1.0;
      for (int v = 0; v < nvars; ++v)
        for (int k = 2; k <= alpha[v]; ++k) f *= k;
      factorial_.push_back(f);
    }
    // Product table: out = a + b, grouped by degree of out.
    std::vector<std::vector<Term>> by_degree(max_order + 1);
    std::vector<int> sum(nvars);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (degree_[a] + degree_[b] > max_order) continue;
        for (int v = 0; v < nvars; ++v) sum[v] = exps_[a * nvars + v] + exps_[b * nvars + v];
        int out = index_of(sum);
        by_degree[degree_[out]].push_back(
            {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(out)});
      }
    }
    for (int deg = 0; deg <= max_order; ++deg) {
      terms_.insert(terms_.end(), by_degree[deg].begin(), by_degree[deg].end());
      terms_upto_.push_back(terms_.size());
    }
  }

  void enumerate(int remaining, int var, std::vector<std::uint8_t>& cur) {
    if (var == nvars_ - 1) {
      cur[var] = static_cast<std::uint8_t>(remaining);
      exps_.insert(exps_.end(), cur.begin(), cur.end());
      int deg = 0;
      for (auto e : cur) deg += e;
      degree_.push_back(deg);
      cur[var] = 0;
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      cur[var] = static_cast<std::uint8_t>(k);
      enumerate(remaining - k, var + 1, cur);
    }
    cur[var] = 0;
  }

  int nvars_;
  int max_order_;
  std::vector<std::uint8_t> exps_;
  std::vector<int> degree_;
  std::vector<std::size_t> degree_start_;
  std::vector<int> shift_;
  std::vector<double> factorial_;
  std::vector<Term> terms_;
  std::vector<std::size_t> terms_upto_;
};

class Jet {
 public:
  Jet() = default;

  static Jet constant(const JetSpace& space, double value) {
    Jet j(space, space.max_order());
    j.c_[0] = value;
    return j;
  }
  // The coordinate function y_var about base point value `base`.
  static Jet variable(const JetSpace& space, int var, double base) {
    Jet j = constant(space, base);
    if (space.max_order() >= 1) j.c_[1 + var] = 1.0;
    return j;
  }
  static Jet zero(const JetSpace& space, int order) { return Jet(space, order); }

  bool valid() const { return space_ != nullptr; }
  const JetSpace& space() const { return *space_; }
  int order() const { return order_; }
  double value() const { return c_[0]; }
  std::span<const double> coefficients() const { return c_; }
  double coefficient(std::size_t idx) const { return idx < c_.size() ? c_[idx] : 0.0; }
  double& coefficient_ref(std::size_t idx) { return c_[idx]; }

  // Partial derivative d^alpha f at the base point.
  double partial(std::span<const int> alpha) const {
    int idx = space_->index_of(alpha);
    if (idx < 0 || space_->degree(idx) > order_)
      throw CapabilityError("jet order exhausted for requested partial");
    return c_[idx] * space_->factorial(idx);
  }

  Jet truncated(int order) const {
    if (order >= order_) return *this;
    Jet j(*space_, order);
    std::copy_n(c_.begin(), j.c_.size(), j.c_.begin());
    return j;
  }

  Jet derivative(int var) const {
    if (order_ < 1)
      throw CapabilityError("jet order exhausted: cannot differentiate an order-0 jet");
    Jet j(*space_, order_ - 1);
    for (std::size_t i = 0; i < j.c_.size(); ++i) {
      int s = space_->shift(var, i);
      int a = space_->exponents(i)[var] + 1;
      j.c_[i] = a * c_[s];
    }
    return j;
  }

  Jet& operator+=(const Jet& o) {
    check(o);
    trim_to(o.order_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check(o);
    trim_to(o.order_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet operator-() const {
    Jet j = *this;
    for (auto& v : j.c_) v = -v;
    return j;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check(b);
    int order = std::min(a.order_, b.order_);
    Jet r(*a.space_, order);
    const double* pa = a.c_.data();
    const double* pb = b.c_.data();
    double* pr = r.c_.data();
    for (const auto& t : a.space_->product_terms(order)) pr[t.out] += pa[t.a] * pb[t.b];
    return r;
  }

  // f(a) for a univariate f given by its Taylor coefficients at a.value().
  Jet compose(std::span<const double> taylor) const {
    Jet h = *this;
    h.c_[0] = 0.0;
    Jet r = Jet::zero(*space_, order_);
    const int top = std::min<int>(order_, static_cast<int>(taylor.size()) - 1);
    r.c_[0] = taylor[top];
    for (int k = top - 1; k >= 0; --k) {
      r = r * h;
      r.c_[0] += taylor[k];
    }
    return r;
  }

  // Substitute y_i = base_i + h_i where h are jets in another space with zero
  // constant term: treats *this as the Taylor polynomial it represents.
  Jet substitute(std::span<const Jet> h) const {
    if (static_cast<int>(h.size()) != space_->nvars())
      throw ArgumentError("substitute: wrong number of arguments");
    const JetSpace& target = h[0].space();
    int order = order_;
    for (const auto& x : h) order = std::min(order, x.order());
    order = std::min(order, target.max_order());
    std::vector<Jet> powers(c_.size());
    Jet result = Jet::zero(target, order);
    result.c_[0] = c_[0];
    if (c_.size() > 1) powers[0] = Jet::constant(target, 1.0).truncated(order);
    for (std::size_t i = 1; i < c_.size(); ++i) {
      const std::uint8_t* e = space_->exponents(i);
      int var = 0;
      while (e[var] == 0) ++var;
      // predecessor monomial i - e_var
      std::vector<int> alpha(e, e + space_->nvars());
      alpha[var] -= 1;
      int prev = space_->index_of(alpha);
      Jet hv = h[var].truncated(order);
      hv.c_[0] = 0.0;
      powers[i] = powers[prev] * hv;
      if (c_[i] != 0.0) {
        Jet t = powers[i];
        t *= c_[i];
        result += t;
      }
    }
    return result;
  }

 private:
  Jet(const JetSpace& space, int order) : space_(&space), order_(order), c_(space.size(order), 0.0) {}

  void check(const Jet& o) const {
    if (space_ != o.space_) throw ArgumentError("jet arithmetic across different jet spaces");
  }
  void trim_to(int order) {
    if (order < order_) {
      order_ = order;
      c_.resize(space_->size(order));
    }
  }

  const JetSpace* space_ = nullptr;
  int order_ = 0;
  std::vector<double> c_;
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator+(Jet a, double s) { return a += s; }
inline Jet operator+(double s, Jet a) { return a += s; }
inline Jet operator-(Jet a, double s) { return a -= s; }
inline Jet operator-(double s, const Jet& a) { return (-a) += s; }
inline Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

namespace detail {
inline std::vector<double> pow_series(double a0, double s, int order) {
  std::vector<double> t(order + 1);
  double binom = 1.0;
  for (int k = 0; k <= order; ++k) {
    t[k] = binom * std::pow(a0, s - k);
    binom *= (s - k) / (k + 1);
  }
  return t;
}
}  // namespace detail

inline Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DegeneracyError("reciprocal of a jet with zero value");
  std::vector<double> t(a.order() + 1);
  double p = 1.0 / a0;
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = p;
    p *= -1.0 / a0;
  }
  return a.compose(t);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(double s, const Jet& b) { return reciprocal(b) * s; }

inline Jet exp(const Jet& a) {
  std::vector<double> t(a.order() + 1);
  double e = std::exp(a.value());
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = e / f;
    f *= k + 1;
  }
  return a.compose(t);
}

inline Jet log(const Jet& a) {
  const double a0 = a.value();
  if (a0 <= 0.0) throw DomainError("log of a non-positive jet");
  std::vector<double> t(a.order() + 1);
  t[0] = std::log(a0);
  double p = 1.0 / a0;
  for (int k = 1; k <= a.order(); ++k) {
    t[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
    p /= a0;
  }
  return a.compose(t);
}

inline Jet pow(const Jet& a, double s) {
  if (a.value() <= 0.0 && std::floor(s) != s) throw DomainError("fractional power of a non-positive jet");
  if (a.value() == 0.0) {
    // integer power of a jet vanishing at the base point
    int n = static_cast<int>(s);
    if (n < 0) throw DegeneracyError("negative power of a vanishing jet");
    Jet r = Jet::constant(a.space(), 1.0).truncated(a.order());
    for (int k = 0; k < n; ++k) r = r * a;
    return r;
  }
  return a.compose(detail::pow_series(a.value(), s, a.order()));
}

inline Jet sqrt(const Jet& a) { return pow(a, 0.5); }

inline Jet sin(const Jet& a) {
  std::vector<double> t(a.order() + 1);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {s, c, -s, -c};
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = cyc[k % 4] / f;
    f *= k + 1;
  }
  return a.compose(t);
}

inline Jet cos(const Jet& a) {
  std::vector<double> t(a.order() + 1);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {c, -s, -c, s};
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = cyc[k % 4] / f;
    f *= k + 1;
  }
  return a.compose(t);
}

inline Jet square(const Jet& a) { return a * a; }

// Coordinate jets y_i = p_i + e_i about a point.
inline std::vector<Jet> seed_coordinates(std::span<const double> p, int order) {
  const JetSpace& space = JetSpace::get(static_cast<int>(p.size()), order);
  std::vector<Jet> y;
  y.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) y.push_back(Jet::variable(space, static_cast<int>(i), p[i]));
  return y;
}

}  // namespace tcalc
