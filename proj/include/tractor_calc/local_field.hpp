#pragma once

// Tensor/tractor-valued fields as jets at one point, in a fixed scale.
//
// Components are stored row-major over the index list: first the lower
// coordinate (tensor) indices, each ranging over d, then the tractor indices,
// each ranging over d+2. A tractor slot holds (sigma, mu_1..mu_d, rho), with
// mu a covector; the tractor metric pairs sigma with rho and mu with g^{-1}.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "tractor_calc/geometry.hpp"

namespace tcalc {

struct LocalField {
  int d = 0;
  int tensor_rank = 0;
  int tractor_rank = 0;
  double weight = 0.0;
  std::vector<Jet> c;

  LocalField() = default;
  LocalField(int dim, int trank, int xrank, double w) : d(dim), tensor_rank(trank), tractor_rank(xrank), weight(w) {
    c.resize(count());
  }

  static LocalField scalar(Jet v, int dim, double w) {
    LocalField f(dim, 0, 0, w);
    f.c[0] = std::move(v);
    return f;
  }

  int rank() const { return tensor_rank + tractor_rank; }
  int extent(int slot) const { return slot < tensor_rank ? d : d + 2; }
  std::size_t count() const {
    std::size_t n = 1;
    for (int i = 0; i < rank(); ++i) n *= extent(i);
    return n;
  }
  std::size_t stride(int slot) const {
    std::size_t s = 1;
    for (int i = rank() - 1; i > slot; --i) s *= extent(i);
    return s;
  }
  std::vector<int> unflatten(std::size_t k) const {
    std::vector<int> idx(rank());
    for (int i = rank() - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(k % extent(i));
      k /= extent(i);
    }
    return idx;
  }
  std::size_t flatten(std::span<const int> idx) const {
    std::size_t k = 0;
    for (int i = 0; i < rank(); ++i) k = k * extent(i) + idx[i];
    return k;
  }

  int order() const {
    int o = c[0].order();
    for (const auto& j : c) o = std::min(o, j.order());
    return o;
  }
  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(c.size());
    for (const auto& j : c) v.push_back(j.value());
    return v;
  }
  const Jet& operator[](std::size_t k) const { return c[k]; }
  Jet& operator[](std::size_t k) { return c[k]; }
};

inline LocalField operator+(const LocalField& a, const LocalField& b) {
  if (a.count() != b.count()) throw ArgumentError("field shape mismatch");
  LocalField r = a;
  for (std::size_t k = 0; k < r.c.size(); ++k) r.c[k] += b.c[k];
  return r;
}
inline LocalField operator-(const LocalField& a, const LocalField& b) {
  if (a.count() != b.count()) throw ArgumentError("field shape mismatch");
  LocalField r = a;
  for (std::size_t k = 0; k < r.c.size(); ++k) r.c[k] -= b.c[k];
  return r;
}
inline LocalField operator*(double s, LocalField a) {
  for (auto& j : a.c) j *= s;
  return a;
}
inline LocalField operator*(const Jet& s, LocalField a) {
  for (auto& j : a.c) j = j * s;
  return a;
}

// Coupled Levi-Civita-tractor derivative; the new coordinate index goes first.
// Density factors are trivialised by the working scale, so they are
// differentiated as plain functions.
inline LocalField covariant_derivative(const LocalGeometry& geo, const LocalField& f) {
  const int d = f.d;
  if (f.order() < 1) throw CapabilityError("jet order exhausted: cannot take covariant derivative");
  LocalField out(d, f.tensor_rank + 1, f.tractor_rank, f.weight);
  const std::size_t n = f.count();
  for (std::size_t k = 0; k < n; ++k) {
    auto idx = f.unflatten(k);
    for (int a = 0; a < d; ++a) {
      Jet acc = f.c[k].derivative(a);
      for (int i = 0; i < f.rank(); ++i) {
        const std::size_t st = f.stride(i);
        const std::size_t base = k - idx[i] * st;
        if (i < f.tensor_rank) {
          const int b = idx[i];
          for (int e = 0; e < d; ++e) acc -= geo.christoffel(e, a, b) * f.c[base + e * st];
          continue;
        }
        const int s = idx[i];
        if (s == 0) {
          acc -= f.c[base + (1 + a) * st];
        } else if (s == d + 1) {
          for (int e = 0; e < d; ++e) acc -= geo.schouten_mixed(a, e) * f.c[base + (1 + e) * st];
        } else {
          const int b = s - 1;
          for (int e = 0; e < d; ++e) acc -= geo.christoffel(e, a, b) * f.c[base + (1 + e) * st];
          acc += geo.g(a, b) * f.c[base + (d + 1) * st];
          acc += geo.schouten(a, b) * f.c[base];
        }
      }
      out.c[a * n + k] = std::move(acc);
    }
  }
  return out;
}

// g^{ab} contraction of tensor slots i < j.
inline LocalField trace_tensor(const LocalGeometry& geo, const LocalField& f, int i, int j) {
  if (!(i < j && j < f.tensor_rank)) throw ArgumentError("trace_tensor: bad slots");
  const int d = f.d;
  LocalField out(d, f.tensor_rank - 2, f.tractor_rank, f.weight);
  const std::size_t si = f.stride(i), sj = f.stride(j);
  for (std::size_t k = 0; k < out.count(); ++k) {
    auto oidx = out.unflatten(k);
    std::vector<int> idx;
    for (int s = 0, o = 0; s < f.rank(); ++s) idx.push_back((s == i || s == j) ? 0 : oidx[o++]);
    const std::size_t base = f.flatten(idx);
    Jet acc = geo.ginv(0, 0) * f.c[base];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        if (a == 0 && b == 0) continue;
        acc += geo.ginv(a, b) * f.c[base + a * si + b * sj];
      }
    out.c[k] = std::move(acc);
  }
  return out;
}

// h^{AB} contraction of tractor slots i < j (slot numbers counted over all indices).
inline LocalField contract_tractor(const LocalGeometry& geo, const LocalField& f, int i, int j) {
  if (!(f.tensor_rank <= i && i < j && j < f.rank())) throw ArgumentError("contract_tractor: bad slots");
  const int d = f.d;
  LocalField out(d, f.tensor_rank, f.tractor_rank - 2, f.weight);
  const std::size_t si = f.stride(i), sj = f.stride(j);
  for (std::size_t k = 0; k < out.count(); ++k) {
    auto oidx = out.unflatten(k);
    std::vector<int> idx;
    for (int s = 0, o = 0; s < f.rank(); ++s) idx.push_back((s == i || s == j) ? 0 : oidx[o++]);
    const std::size_t base = f.flatten(idx);
    Jet acc = f.c[base + (d + 1) * sj] + f.c[base + (d + 1) * si];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) acc += geo.ginv(a, b) * f.c[base + (1 + a) * si + (1 + b) * sj];
    out.c[k] = std::move(acc);
  }
  return out;
}

// Delta = -g^{ab} nabla_a nabla_b, coupled.
inline LocalField laplacian(const LocalGeometry& geo, const LocalField& f) {
  return -1.0 * trace_tensor(geo, covariant_derivative(geo, covariant_derivative(geo, f)), 0, 1);
}

// Scalar field on the geometry's point: evaluates the jet field on the seeded coordinates.
inline LocalField density_at(const ScalarJetField& u, std::span<const Jet> y, double weight) {
  return LocalField::scalar(u(y), static_cast<int>(y.size()), weight);
}

// Positive-definite norm: g^{-1} on coordinate slots, sigma^2 + rho^2 + |mu|^2_g on tractor slots.
inline double positive_norm(const LocalGeometry& geo, const LocalField& f) {
  const int d = f.d;
  std::vector<double> gi(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) gi[a * d + b] = geo.ginv(a, b).value();
  std::vector<double> v = f.values(), m = v;
  for (int slot = 0; slot < f.rank(); ++slot) {
    const std::size_t st = f.stride(slot);
    std::vector<double> next(m.size(), 0.0);
    for (std::size_t k = 0; k < m.size(); ++k) {
      auto idx = f.unflatten(k);
      const std::size_t base = k - idx[slot] * st;
      const int s = idx[slot];
      if (slot < f.tensor_rank) {
        for (int b = 0; b < d; ++b) next[k] += gi[s * d + b] * m[base + b * st];
      } else if (s == 0 || s == d + 1) {
        next[k] = m[k];
      } else {
        for (int b = 0; b < d; ++b) next[k] += gi[(s - 1) * d + b] * m[base + (1 + b) * st];
      }
    }
    m = std::move(next);
  }
  double s2 = 0;
  for (std::size_t k = 0; k < v.size(); ++k) s2 += v[k] * m[k];
  return std::sqrt(std::max(0.0, s2));
}

}  // namespace tcalc
