#pragma once

// Standard tractor bundle in a scale: metric, change of scale, connection,
// Thomas D, the Yamabe operator and the conformal powers Box_k.

#include <cmath>
#include <string>
#include <vector>

#include "tractor_calc/local_field.hpp"

namespace tcalc {

// Rank-1 tractor at a point: (sigma, mu_a, rho) in one scale.
struct TractorValue {
  double sigma = 0.0;
  std::vector<double> mu;
  double rho = 0.0;
  double weight = 0.0;
  std::string scale;
  Point point;
  std::vector<double> ginv;  // g^{ab} of the scale at the point, row-major

  int dim() const { return static_cast<int>(mu.size()); }
  std::vector<double> slots() const {
    std::vector<double> s{sigma};
    s.insert(s.end(), mu.begin(), mu.end());
    s.push_back(rho);
    return s;
  }
};

inline TractorValue tractor_value(const LocalField& f, std::span<const double> ginv, std::string scale = {},
                                  Point p = {}) {
  if (f.tensor_rank != 0 || f.tractor_rank != 1) throw ArgumentError("tractor_value needs a rank-1 tractor");
  TractorValue t;
  t.sigma = f.c[0].value();
  for (int a = 0; a < f.d; ++a) t.mu.push_back(f.c[1 + a].value());
  t.rho = f.c[f.d + 1].value();
  t.weight = f.weight;
  t.scale = std::move(scale);
  t.point = std::move(p);
  t.ginv.assign(ginv.begin(), ginv.end());
  return t;
}

// h(U,V) = sigma_U rho_V + rho_U sigma_V + g^{ab} mu_a nu_b
inline double tractor_metric(const TractorValue& u, const TractorValue& v) {
  if (u.scale != v.scale) throw ScaleError("tractor_metric: scale mismatch '" + u.scale + "' vs '" + v.scale + "'");
  if (u.dim() != v.dim()) throw ArgumentError("tractor_metric: dimension mismatch");
  const int d = u.dim();
  double s = u.sigma * v.rho + u.rho * v.sigma;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) s += u.ginv[a * d + b] * u.mu[a] * v.mu[b];
  return s;
}

// Representative in the scale e^{2 omega} g, with Upsilon = d omega:
//   sigma -> e^{(w+1) omega} sigma
//   mu_a  -> e^{(w+1) omega} (mu_a + Upsilon_a sigma)
//   rho   -> e^{(w-1) omega} (rho - Upsilon^a mu_a - |Upsilon|^2 sigma / 2)
inline TractorValue rescale_tractor(const TractorValue& u, double omega, std::span<const double> upsilon,
                                    std::string new_scale = {}) {
  const int d = u.dim();
  const double w = u.weight;
  std::vector<double> up(d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) up[a] += u.ginv[a * d + b] * upsilon[b];
  double ups2 = 0.0, upmu = 0.0;
  for (int a = 0; a < d; ++a) {
    ups2 += up[a] * upsilon[a];
    upmu += up[a] * u.mu[a];
  }
  TractorValue r = u;
  const double ep = std::exp((w + 1) * omega), em = std::exp((w - 1) * omega);
  r.sigma = ep * u.sigma;
  for (int a = 0; a < d; ++a) r.mu[a] = ep * (u.mu[a] + upsilon[a] * u.sigma);
  r.rho = em * (u.rho - upmu - 0.5 * ups2 * u.sigma);
  for (auto& g : r.ginv) g *= std::exp(-2 * omega);
  r.scale = new_scale.empty() ? "e^{2w}" + u.scale : std::move(new_scale);
  return r;
}

// Field-level change of scale for fields without coordinate indices: each
// tractor slot transforms by the law above, the whole by e^{w omega}.
inline LocalField rescale_field(const LocalGeometry& geo, const LocalField& f, const Jet& omega) {
  if (f.tensor_rank != 0) throw ArgumentError("rescale_field: coordinate indices are not supported");
  const int d = f.d;
  std::vector<Jet> ups(d), up(d);
  for (int a = 0; a < d; ++a) ups[a] = omega.derivative(a);
  for (int a = 0; a < d; ++a) {
    Jet acc = geo.ginv(a, 0) * ups[0];
    for (int b = 1; b < d; ++b) acc += geo.ginv(a, b) * ups[b];
    up[a] = acc;
  }
  Jet ups2 = up[0] * ups[0];
  for (int a = 1; a < d; ++a) ups2 += up[a] * ups[a];
  const Jet ep = exp(omega), em = exp(-omega);
  LocalField cur = f;
  for (int slot = 0; slot < f.rank(); ++slot) {
    LocalField next = cur;
    const std::size_t st = cur.stride(slot);
    for (std::size_t k = 0; k < cur.count(); ++k) {
      auto idx = cur.unflatten(k);
      const std::size_t base = k - idx[slot] * st;
      const int s = idx[slot];
      const Jet& sig = cur.c[base];
      if (s == 0) {
        next.c[k] = ep * sig;
      } else if (s == d + 1) {
        Jet acc = cur.c[k] - ups2 * sig * 0.5;
        for (int a = 0; a < d; ++a) acc -= up[a] * cur.c[base + (1 + a) * st];
        next.c[k] = em * acc;
      } else {
        next.c[k] = ep * (cur.c[k] + ups[s - 1] * sig);
      }
    }
    cur = std::move(next);
  }
  const Jet factor = exp(omega * f.weight);
  for (auto& j : cur.c) j = j * factor;
  return cur;
}

inline LocalField tractor_connection(const LocalGeometry& geo, const LocalField& f) {
  return covariant_derivative(geo, f);
}

// D_A V = ((d+2w-2) w V, (d+2w-2) nabla_a V, (Delta - wJ) V); the new tractor index goes first.
inline LocalField thomas_D(const LocalGeometry& geo, const LocalField& v) {
  if (v.tensor_rank != 0) throw ArgumentError("thomas_D acts on tractor or density fields");
  if (v.order() < 2) throw CapabilityError("jet order exhausted: thomas_D needs two derivatives");
  const int d = v.d;
  const double w = v.weight;
  const double k = d + 2 * w - 2;
  LocalField dv = covariant_derivative(geo, v);
  LocalField lap = -1.0 * trace_tensor(geo, covariant_derivative(geo, dv), 0, 1);
  LocalField out(d, 0, v.tractor_rank + 1, w - 1);
  const std::size_t n = v.count();
  for (std::size_t i = 0; i < n; ++i) {
    out.c[i] = v.c[i] * (k * w);
    for (int a = 0; a < d; ++a) out.c[(1 + a) * n + i] = dv.c[a * n + i] * k;
    out.c[(d + 1) * n + i] = lap.c[i] - geo.J() * v.c[i] * w;
  }
  return out;
}

inline bool weight_equal(double a, double b) { return std::abs(a - b) < 1e-12; }

// Box = Delta - wJ at w = 1 - d/2, acting on density or tractor fields.
inline LocalField yamabe_box(const LocalGeometry& geo, const LocalField& v) {
  const int d = v.d;
  if (!weight_equal(v.weight, 1.0 - d / 2.0))
    throw WeightError("yamabe_box needs weight 1-d/2 = " + std::to_string(1.0 - d / 2.0));
  LocalField out = laplacian(geo, v);
  for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] -= geo.J() * v.c[i] * v.weight;
  out.weight = v.weight - 2;
  return out;
}

// D^A ... D^B Box D_B ... D_A u with (k-2)/2 D's on each side, without normalisation.
inline LocalField box_k(const LocalGeometry& geo, const LocalField& u, int k) {
  if (k < 2 || k % 2) throw ArgumentError("box_k needs even k >= 2");
  const int d = u.d;
  if (u.tensor_rank != 0 || u.tractor_rank != 0) throw ArgumentError("box_k acts on densities");
  if (!weight_equal(u.weight, (k - d) / 2.0)) throw WeightError("box_k needs weight (k-d)/2");
  const int m = (k - 2) / 2;
  LocalField f = u;
  for (int i = 0; i < m; ++i) f = thomas_D(geo, f);
  f = yamabe_box(geo, f);
  for (int i = 0; i < m; ++i) f = contract_tractor(geo, thomas_D(geo, f), 0, 1);
  return f;
}

// Required jet order of the input and metric for box_k.
inline int box_k_order(int k) { return k + 2 * ((k - 2) / 2); }

}  // namespace tcalc
