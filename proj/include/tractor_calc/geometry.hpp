#pragma once

// Riemannian geometry of a metric, as jets about one point.
//
// Curvature conventions:
//   (nabla_a nabla_b - nabla_b nabla_a) V^c = R_ab^c_d V^d,  Ric_bd = R_ab^a_d,
//   R_abcd = W_abcd + 2 g_c[a P_b]d + 2 g_d[b P_a]c,  Ric = (d-2) P + J g.

#include <cmath>
#include <span>
#include <vector>

#include "tractor_calc/metric.hpp"

namespace tcalc {

// Gauss-Jordan inverse of a symmetric positive definite jet matrix.
inline std::vector<Jet> invert(std::vector<Jet> m, int d) {
  const JetSpace& space = m[0].space();
  int order = m[0].order();
  for (auto& j : m) order = std::min(order, j.order());
  std::vector<Jet> inv(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) inv[a * d + b] = Jet::constant(space, a == b ? 1.0 : 0.0).truncated(order);
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(m[r * d + col].value()) > std::abs(m[piv * d + col].value())) piv = r;
    if (m[piv * d + col].value() == 0.0) throw DegeneracyError("singular metric");
    if (piv != col)
      for (int c = 0; c < d; ++c) {
        std::swap(m[piv * d + c], m[col * d + c]);
        std::swap(inv[piv * d + c], inv[col * d + c]);
      }
    Jet r = reciprocal(m[col * d + col]);
    for (int c = 0; c < d; ++c) {
      m[col * d + c] = m[col * d + c] * r;
      inv[col * d + c] = inv[col * d + c] * r;
    }
    for (int row = 0; row < d; ++row) {
      if (row == col) continue;
      Jet f = m[row * d + col];
      if (f.value() == 0.0 && f.order() >= 0) {
        bool all_zero = true;
        for (double c : f.coefficients())
          if (c != 0.0) { all_zero = false; break; }
        if (all_zero) continue;
      }
      for (int c = 0; c < d; ++c) {
        m[row * d + c] -= f * m[col * d + c];
        inv[row * d + c] -= f * inv[col * d + c];
      }
    }
  }
  return inv;
}

// Ricci level skips the full Riemann and Weyl tensors.
enum class CurvatureLevel { none, ricci, full };

// Metric, connection and curvature as jets in one coordinate system.
class LocalGeometry {
 public:
  LocalGeometry(std::vector<Jet> g, int d, CurvatureLevel level = CurvatureLevel::full)
      : d_(d), g_(std::move(g)) {
    if (d_ < 3) throw ArgumentError("dimension must be >= 3");
    order_ = g_[0].order();
    for (auto& j : g_) order_ = std::min(order_, j.order());
    if (order_ < 1) throw CapabilityError("metric jets need order >= 1 for a connection");
    ginv_ = invert(g_, d_);
    build_christoffel();
    if (order_ >= 2 && level == CurvatureLevel::full) {
      build_riemann();
      build_ricci_from_riemann();
      build_schouten();
      build_weyl();
    } else if (order_ >= 2 && level == CurvatureLevel::ricci) {
      build_ricci_direct();
      build_schouten();
    }
  }

  static LocalGeometry at(const MetricModel& metric, std::span<const double> p, int order,
                          CurvatureLevel level = CurvatureLevel::full) {
    metric.chart.require_valid(p);
    auto y = seed_coordinates(p, order);
    return LocalGeometry(metric.at(y), metric.dim(), level);
  }

  int dim() const { return d_; }
  int metric_order() const { return order_; }
  const JetSpace& space() const { return g_[0].space(); }
  bool has_curvature() const { return order_ >= 2; }

  const Jet& g(int a, int b) const { return g_[a * d_ + b]; }
  const Jet& ginv(int a, int b) const { return ginv_[a * d_ + b]; }
  // Gamma^c_ab
  const Jet& christoffel(int c, int a, int b) const { return gamma_[(c * d_ + a) * d_ + b]; }
  // R_ab^c_d
  const Jet& riemann_mixed(int a, int b, int c, int e) const { return need(rmix_)[((a * d_ + b) * d_ + c) * d_ + e]; }
  const Jet& riemann(int a, int b, int c, int e) const { return need(rdown_)[((a * d_ + b) * d_ + c) * d_ + e]; }
  const Jet& ricci(int a, int b) const { return need(ric_)[a * d_ + b]; }
  const Jet& scalar() const { return need(sc_)[0]; }
  const Jet& schouten(int a, int b) const { return need(p_)[a * d_ + b]; }
  // P_a^c = g^{cd} P_ad
  const Jet& schouten_mixed(int a, int c) const { return need(pmix_)[a * d_ + c]; }
  const Jet& J() const { return need(j_)[0]; }
  const Jet& weyl(int a, int b, int c, int e) const { return need(w_)[((a * d_ + b) * d_ + c) * d_ + e]; }

  Jet zero(int order) const { return Jet::zero(space(), order); }

 private:
  const std::vector<Jet>& need(const std::vector<Jet>& v) const {
    if (v.empty()) throw CapabilityError("metric jets need order >= 2 for curvature");
    return v;
  }

  void build_christoffel() {
    const int d = d_;
    std::vector<Jet> dg(d * d * d);  // dg[(c*d+a)*d+b] = d_c g_ab
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) dg[(c * d + a) * d + b] = g(a, b).derivative(c);
    // Gamma_{e,ab} = (d_a g_eb + d_b g_ea - d_e g_ab)/2
    std::vector<Jet> low(d * d * d);
    for (int e = 0; e < d; ++e)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          low[(e * d + a) * d + b] =
              (dg[(a * d + e) * d + b] + dg[(b * d + e) * d + a] - dg[(e * d + a) * d + b]) * 0.5;
    gamma_.resize(d * d * d);
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
          Jet acc = zero(order_ - 1);
          for (int e = 0; e < d; ++e) acc += ginv(c, e) * low[(e * d + a) * d + b];
          gamma_[(c * d + a) * d + b] = acc;
          gamma_[(c * d + b) * d + a] = acc;
        }
  }

  void build_riemann() {
    const int d = d_;
    const int o = order_ - 2;
    rmix_.resize(d * d * d * d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            auto& out = rmix_[((a * d + b) * d + c) * d + e];
            if (b < a) {
              out = -rmix_[((b * d + a) * d + c) * d + e];
              continue;
            }
            if (a == b) {
              out = zero(o);
              continue;
            }
            Jet acc = christoffel(c, b, e).derivative(a) - christoffel(c, a, e).derivative(b);
            for (int f = 0; f < d; ++f)
              acc += christoffel(c, a, f) * christoffel(f, b, e) - christoffel(c, b, f) * christoffel(f, a, e);
            out = acc;
          }
    rdown_.resize(d * d * d * d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            Jet acc = zero(o);
            for (int f = 0; f < d; ++f) acc += g(c, f) * rmix_[((a * d + b) * d + f) * d + e];
            rdown_[((a * d + b) * d + c) * d + e] = acc;
          }
  }

  void build_ricci_from_riemann() {
    const int d = d_;
    ric_.resize(d * d);
    for (int b = 0; b < d; ++b)
      for (int e = 0; e < d; ++e) {
        Jet acc = zero(order_ - 2);
        for (int a = 0; a < d; ++a) acc += rmix_[((a * d + b) * d + a) * d + e];
        ric_[b * d + e] = acc;
      }
  }

  // Ric_bd = d_a Gamma^a_bd - d_b Gamma^a_ad + Gamma^a_af Gamma^f_bd - Gamma^a_bf Gamma^f_ad
  void build_ricci_direct() {
    const int d = d_;
    std::vector<Jet> trace(d);  // Gamma^a_af
    for (int f = 0; f < d; ++f) {
      Jet acc = zero(order_ - 1);
      for (int a = 0; a < d; ++a) acc += christoffel(a, a, f);
      trace[f] = acc;
    }
    ric_.resize(d * d);
    for (int b = 0; b < d; ++b)
      for (int e = b; e < d; ++e) {
        Jet acc = trace[e].derivative(b) * -1.0;
        for (int a = 0; a < d; ++a) acc += christoffel(a, b, e).derivative(a);
        for (int f = 0; f < d; ++f) {
          acc += trace[f] * christoffel(f, b, e);
          for (int a = 0; a < d; ++a) acc -= christoffel(a, b, f) * christoffel(f, a, e);
        }
        ric_[b * d + e] = acc;
        ric_[e * d + b] = acc;
      }
  }

  void build_schouten() {
    const int d = d_;
    const int o = order_ - 2;
    Jet sc = zero(o);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) sc += ginv(a, b) * ric_[a * d + b];
    sc_ = {sc};
    Jet J = sc * (1.0 / (2.0 * (d - 1)));
    j_ = {J};
    p_.resize(d * d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) p_[a * d + b] = (ric_[a * d + b] - J * g(a, b)) * (1.0 / (d - 2));
    pmix_.resize(d * d);
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c) {
        Jet acc = zero(o);
        for (int e = 0; e < d; ++e) acc += ginv(c, e) * p_[a * d + e];
        pmix_[a * d + c] = acc;
      }
  }

  void build_weyl() {
    const int d = d_;
    w_.resize(d * d * d * d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            // 2 g_c[a P_b]e + 2 g_e[b P_a]c
            Jet k = g(c, a) * p_[b * d + e] - g(c, b) * p_[a * d + e] + g(e, b) * p_[a * d + c] -
                    g(e, a) * p_[b * d + c];
            w_[((a * d + b) * d + c) * d + e] = rdown_[((a * d + b) * d + c) * d + e] - k;
          }
  }

  int d_;
  int order_ = 0;
  std::vector<Jet> g_, ginv_, gamma_;
  std::vector<Jet> rmix_, rdown_, ric_, sc_, j_, p_, pmix_, w_;
};

// Pointwise curvature values.
struct CurvaturePack {
  int d = 0;
  Point point;
  std::vector<double> g, Gamma, R, Ric, P, W;  // flattened, R and W all-indices-down
  double Sc = 0.0, J = 0.0;
};

inline CurvaturePack curvature_pack(const MetricModel& metric, std::span<const double> p,
                                    int order = 2) {
  if (order < 2) throw CapabilityError("curvature_pack needs metric jets of order >= 2");
  auto geo = LocalGeometry::at(metric, p, order);
  const int d = geo.dim();
  CurvaturePack out;
  out.d = d;
  out.point.assign(p.begin(), p.end());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      out.g.push_back(geo.g(a, b).value());
      out.Ric.push_back(geo.ricci(a, b).value());
      out.P.push_back(geo.schouten(a, b).value());
    }
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) out.Gamma.push_back(geo.christoffel(c, a, b).value());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          out.R.push_back(geo.riemann(a, b, c, e).value());
          out.W.push_back(geo.weyl(a, b, c, e).value());
        }
  out.Sc = geo.scalar().value();
  out.J = geo.J().value();
  return out;
}

}  // namespace tcalc
