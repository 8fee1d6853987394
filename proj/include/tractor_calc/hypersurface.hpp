#pragma once

// Hypersurfaces x = 0: conormal, mean curvature, normal tractor, umbilicity,
// projection to the intrinsic tractor bundle, intrinsic charts and the
// boundary operators delta_l.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tractor_calc/tractor.hpp"

namespace tcalc {

struct Hypersurface {
  ScalarJetField x;
  int orientation = +1;
  MetricModel metric;
  std::string description;
  // Optional factor (1 + x psi) on the conormal off the surface; must not
  // change anything on the surface.
  ScalarJetField extension;
  double tolerance = 1e-10;

  int dim() const { return metric.dim(); }

  std::vector<double> euclidean_gradient(std::span<const double> p) const {
    auto g = x.at(p, 1);
    std::vector<double> v(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) v[a] = g.coefficient(1 + a);
    return v;
  }

  bool on(std::span<const double> p) const {
    auto grad = euclidean_gradient(p);
    double n2 = 0;
    for (double v : grad) n2 += v * v;
    return std::abs(x.value(p)) <= tolerance * std::max(1.0, std::sqrt(n2));
  }

  void require_on(std::span<const double> p) const {
    metric.chart.require_valid(p);
    if (!on(p)) throw DomainError("point is not on the hypersurface " + description);
  }

  // Newton projection along the Euclidean gradient.
  Point project(Point p) const {
    for (int it = 0; it < 60; ++it) {
      const double v = x.value(p);
      auto g = euclidean_gradient(p);
      double n2 = 0;
      for (double c : g) n2 += c * c;
      if (n2 == 0) throw DegeneracyError("dx vanishes at a sampled point of " + description);
      for (std::size_t a = 0; a < p.size(); ++a) p[a] -= v * g[a] / n2;
      if (std::abs(v) < 1e-15 * std::max(1.0, std::sqrt(n2))) break;
    }
    return p;
  }

  std::vector<Point> sample(std::uint64_t seed, int count, double margin = 0.05) const {
    PointSampler s(metric.chart, seed, margin);
    std::vector<Point> pts;
    int guard = 0;
    while (static_cast<int>(pts.size()) < count) {
      if (++guard > 100 * count) throw DomainError("could not sample points on " + description);
      auto q = project(s.next());
      if (metric.chart.valid(q) && on(q)) pts.push_back(q);
    }
    return pts;
  }
};

// Hypersurface data as ambient jets about one point.
struct SurfaceJets {
  int d = 0;
  std::vector<Jet> y;
  LocalGeometry geo;
  Jet xj;
  std::vector<Jet> n, nup;  // unit conormal (normalised gradient extension)
  Jet H;
  LocalField N;  // (0, n_a, -H), weight 0
};

inline SurfaceJets surface_jets(const Hypersurface& s, std::span<const double> p, int order,
                                CurvatureLevel level = CurvatureLevel::ricci) {
  s.metric.chart.require_valid(p);
  const int d = s.dim();
  auto y = seed_coordinates(p, order);
  SurfaceJets j{d, y, LocalGeometry(s.metric.at(y), d, level), s.x(y), {}, {}, {}, {}};
  const auto& geo = j.geo;
  std::vector<Jet> dx(d);
  for (int a = 0; a < d; ++a) dx[a] = j.xj.derivative(a);
  Jet norm2 = geo.zero(order - 1);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) norm2 += geo.ginv(a, b) * dx[a] * dx[b];
  if (norm2.value() <= 0) throw DegeneracyError("dx vanishes on " + s.description);
  Jet scale = pow(norm2, -0.5) * static_cast<double>(s.orientation);
  if (!s.extension.empty()) scale = scale * (1.0 + j.xj * s.extension(y));
  j.n.resize(d);
  j.nup.resize(d);
  for (int a = 0; a < d; ++a) j.n[a] = dx[a] * scale;
  for (int a = 0; a < d; ++a) {
    Jet acc = geo.ginv(a, 0) * j.n[0];
    for (int b = 1; b < d; ++b) acc += geo.ginv(a, b) * j.n[b];
    j.nup[a] = acc;
  }
  if (order >= 2) {
    // H = (nabla_a n^a - n^a n^b nabla_a n_b) / (d-1)
    Jet div = geo.zero(order - 2), nn = geo.zero(order - 2);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        Jet dn = j.n[b].derivative(a);
        for (int c = 0; c < d; ++c) dn -= geo.christoffel(c, a, b) * j.n[c];
        div += geo.ginv(a, b) * dn;
        nn += j.nup[a] * j.nup[b] * dn;
      }
    j.H = (div - nn) * (1.0 / (d - 1));
    j.N = LocalField(d, 0, 1, 0.0);
    j.N.c[0] = geo.zero(order - 2);
    for (int a = 0; a < d; ++a) j.N.c[1 + a] = j.n[a];
    j.N.c[d + 1] = -j.H;
  }
  return j;
}

inline double mean_curvature(const Hypersurface& s, std::span<const double> p) {
  s.require_on(p);
  return surface_jets(s, p, 2).H.value();
}

inline TractorValue normal_tractor(const Hypersurface& s, std::span<const double> p) {
  s.require_on(p);
  auto j = surface_jets(s, p, 2);
  std::vector<double> ginv;
  for (int a = 0; a < j.d; ++a)
    for (int b = 0; b < j.d; ++b) ginv.push_back(j.geo.ginv(a, b).value());
  return tractor_value(j.N, ginv, s.metric.scale, Point(p.begin(), p.end()));
}

// V -> V - N h(N, V) on tractor slot `slot`.
inline LocalField project_sigma_slot(const LocalGeometry& geo, const LocalField& f, const LocalField& N, int slot) {
  const int d = f.d;
  LocalField out = f;
  const std::size_t st = f.stride(slot);
  for (std::size_t k = 0; k < f.count(); ++k) {
    auto idx = f.unflatten(k);
    if (idx[slot] != 0) continue;
    // k is the base of a slot fibre; h(N, V) = N_sigma V_rho + N_rho V_sigma + g^{ab} N_a V_b
    Jet hnv = N.c[0] * f.c[k + (d + 1) * st] + N.c[d + 1] * f.c[k];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) hnv += geo.ginv(a, b) * N.c[1 + a] * f.c[k + (1 + b) * st];
    for (int s = 0; s < d + 2; ++s) out.c[k + s * st] -= N.c[s] * hnv;
  }
  return out;
}

inline LocalField project_sigma(const LocalGeometry& geo, const LocalField& f, const LocalField& N) {
  LocalField out = f;
  for (int slot = f.tensor_rank; slot < f.rank(); ++slot) out = project_sigma_slot(geo, out, N, slot);
  return out;
}

inline TractorValue project_sigma(const TractorValue& v, const TractorValue& N) {
  const double h = tractor_metric(N, v);
  TractorValue r = v;
  r.sigma -= h * N.sigma;
  for (int a = 0; a < v.dim(); ++a) r.mu[a] -= h * N.mu[a];
  r.rho -= h * N.rho;
  return r;
}

// delta F = n^a nabla_a F - w H F (coupled connection).
inline LocalField robin(const SurfaceJets& j, const LocalField& f) {
  if (f.tensor_rank != 0) throw ArgumentError("robin acts on tractor or density fields");
  auto df = covariant_derivative(j.geo, f);
  const std::size_t n = f.count();
  LocalField out(f.d, 0, f.tractor_rank, f.weight - 1);
  for (std::size_t k = 0; k < n; ++k) {
    Jet acc = j.nup[0] * df.c[k];
    for (int a = 1; a < j.d; ++a) acc += j.nup[a] * df.c[a * n + k];
    out.c[k] = acc - j.H * f.c[k] * f.weight;
  }
  return out;
}

inline double robin_delta(const Hypersurface& s, const ScalarJetField& u, double w, std::span<const double> p) {
  s.require_on(p);
  auto j = surface_jets(s, p, 2);
  return robin(j, LocalField::scalar(u(j.y), j.d, w)).c[0].value();
}

// N^A D_A u at p.
inline double normal_D(const Hypersurface& s, const ScalarJetField& u, double w, std::span<const double> p) {
  s.require_on(p);
  auto j = surface_jets(s, p, 3);
  auto Du = thomas_D(j.geo, LocalField::scalar(u(j.y), j.d, w));
  LocalField pair(j.d, 0, 2, 0.0);
  for (int a = 0; a < j.d + 2; ++a)
    for (int b = 0; b < j.d + 2; ++b) pair.c[a * (j.d + 2) + b] = j.N.c[a] * Du.c[b];
  return contract_tractor(j.geo, pair, 0, 1).c[0].value();
}

struct UmbilicReport {
  double tracefree_II = 0.0;   // |II - H Pi|_g
  double tangential_dN = 0.0;  // |Pi nabla N| in a positive frame norm
  double H = 0.0;
};

inline UmbilicReport umbilicity_defect(const Hypersurface& s, std::span<const double> p) {
  s.require_on(p);
  auto j = surface_jets(s, p, 3);
  const int d = j.d;
  const auto& geo = j.geo;
  std::vector<double> gi(d * d), g(d * d), dn(d * d), n(d), nu(d);
  for (int a = 0; a < d; ++a) {
    n[a] = j.n[a].value();
    nu[a] = j.nup[a].value();
  }
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      gi[a * d + b] = geo.ginv(a, b).value();
      g[a * d + b] = geo.g(a, b).value();
      double v = j.n[b].derivative(a).value();
      for (int c = 0; c < d; ++c) v -= geo.christoffel(c, a, b).value() * n[c];
      dn[a * d + b] = v;
    }
  }
  // Pi_a^c = delta - n_a n^c
  auto pi = [&](int a, int c) { return (a == c ? 1.0 : 0.0) - n[a] * nu[c]; };
  const double H = j.H.value();
  std::vector<double> tf(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double v = 0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) v += pi(a, c) * pi(b, e) * dn[c * d + e];
      tf[a * d + b] = v - H * (g[a * d + b] - n[a] * n[b]);
    }
  auto norm2 = [&](const std::vector<double>& t) {
    double s2 = 0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) s2 += gi[a * d + c] * gi[b * d + e] * t[a * d + b] * t[c * d + e];
    return s2;
  };
  UmbilicReport r;
  r.H = H;
  r.tracefree_II = std::sqrt(std::max(0.0, norm2(tf)));
  auto dN = covariant_derivative(geo, j.N);
  // tangential part in the first index, then |.|^2 with g^{-1} on coordinate
  // indices and sigma^2 + rho^2 + |mu|^2 on the tractor index
  std::vector<double> t(d * (d + 2), 0.0);
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c)
      for (int sl = 0; sl < d + 2; ++sl) t[a * (d + 2) + sl] += pi(c, a) * dN.c[c * (d + 2) + sl].value();
  double s2 = 0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double pair = t[a * (d + 2)] * t[b * (d + 2)] + t[a * (d + 2) + d + 1] * t[b * (d + 2) + d + 1];
      for (int e = 0; e < d; ++e)
        for (int f = 0; f < d; ++f) pair += gi[e * d + f] * t[a * (d + 2) + 1 + e] * t[b * (d + 2) + 1 + f];
      s2 += gi[a * d + b] * pair;
    }
  r.tangential_dN = std::sqrt(std::max(0.0, s2));
  return r;
}

// Graph chart s -> p + e_i s^i + t(s) nu of the surface near p, as jets in s.
struct IntrinsicChart {
  int n = 0;
  Point p;
  std::vector<Jet> phi;   // ambient coordinates as jets in s
  std::vector<Jet> dphi;  // dphi[i*d + a] = d phi^a / d s^i
};

inline IntrinsicChart intrinsic_chart(const Hypersurface& s, std::span<const double> p, int order) {
  const int d = s.dim();
  const int n = d - 1;
  auto grad = s.euclidean_gradient(p);
  double gn = 0;
  for (double v : grad) gn += v * v;
  gn = std::sqrt(gn);
  if (gn == 0) throw DegeneracyError("dx vanishes on " + s.description);
  std::vector<double> nu(d);
  for (int a = 0; a < d; ++a) nu[a] = grad[a] / gn;
  std::vector<std::vector<double>> basis;
  for (int k = 0; k < d && static_cast<int>(basis.size()) < n; ++k) {
    std::vector<double> v(d, 0.0);
    v[k] = 1.0;
    auto orth = [&](const std::vector<double>& e) {
      double dot = 0;
      for (int a = 0; a < d; ++a) dot += v[a] * e[a];
      for (int a = 0; a < d; ++a) v[a] -= dot * e[a];
    };
    orth(nu);
    for (auto& e : basis) orth(e);
    double nv = 0;
    for (double c : v) nv += c * c;
    nv = std::sqrt(nv);
    if (nv < 0.5) continue;
    for (auto& c : v) c /= nv;
    basis.push_back(v);
  }
  const JetSpace& space = JetSpace::get(n, order);
  std::vector<Jet> sv;
  for (int i = 0; i < n; ++i) sv.push_back(Jet::variable(space, i, 0.0));
  std::vector<Jet> lin(d);
  for (int a = 0; a < d; ++a) {
    Jet acc = Jet::constant(space, p[a]);
    for (int i = 0; i < n; ++i) acc += sv[i] * basis[i][a];
    lin[a] = acc;
  }
  Jet t = Jet::zero(space, order);
  std::vector<Jet> phi(d);
  for (int it = 0; it < order + 3; ++it) {
    for (int a = 0; a < d; ++a) phi[a] = lin[a] + t * nu[a];
    t -= s.x(phi) * (1.0 / gn);
  }
  for (int a = 0; a < d; ++a) phi[a] = lin[a] + t * nu[a];
  IntrinsicChart c{n, Point(p.begin(), p.end()), phi, {}};
  c.dphi.resize(n * d);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) c.dphi[i * d + a] = phi[a].derivative(i);
  return c;
}

inline Jet restrict_to(const IntrinsicChart& c, const Jet& f) { return f.substitute(c.phi); }

// Induced metric on the chart: g_ab(phi) dphi^a dphi^b.
inline LocalGeometry intrinsic_geometry(const Hypersurface& s, const IntrinsicChart& c,
                                        CurvatureLevel level = CurvatureLevel::ricci) {
  const int d = s.dim(), n = c.n;
  auto G = s.metric.at(c.phi);
  std::vector<Jet> g(n * n);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) {
      Jet acc = G[0] * c.dphi[i * d] * c.dphi[k * d];
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          if (a == 0 && b == 0) continue;
          acc += G[a * d + b] * c.dphi[i * d + a] * c.dphi[k * d + b];
        }
      g[i * n + k] = acc;
      g[k * n + i] = acc;
    }
  return LocalGeometry(std::move(g), n, level);
}

// Ambient tractor field orthogonal to N, restricted to the surface and
// written in the intrinsic splitting of the induced scale:
//   sigma' = sigma, mu'_i = dphi^a_i mu_a, rho' = rho + H^2 sigma / 2.
inline LocalField to_intrinsic(const IntrinsicChart& c, const SurfaceJets& j, const LocalField& f) {
  if (f.tensor_rank != 0) throw ArgumentError("to_intrinsic: coordinate indices are not supported");
  const int d = f.d, n = c.n;
  LocalField cur(d, 0, f.tractor_rank, f.weight);
  for (std::size_t k = 0; k < f.count(); ++k) cur.c[k] = restrict_to(c, f.c[k]);
  const Jet half_h2 = restrict_to(c, j.H * j.H) * 0.5;
  // convert one slot at a time, shrinking it from d+2 to n+2
  std::vector<int> ext(f.tractor_rank, d + 2);
  for (int slot = 0; slot < f.tractor_rank; ++slot) {
    std::vector<int> next_ext = ext;
    next_ext[slot] = n + 2;
    auto count = [](const std::vector<int>& e) {
      std::size_t m = 1;
      for (int v : e) m *= v;
      return m;
    };
    auto stride = [](const std::vector<int>& e, int s) {
      std::size_t m = 1;
      for (int i = static_cast<int>(e.size()) - 1; i > s; --i) m *= e[i];
      return m;
    };
    std::vector<Jet> next(count(next_ext));
    const std::size_t sto = stride(ext, slot), stn = stride(next_ext, slot);
    const std::size_t outer = count(ext) / (sto * ext[slot]);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < sto; ++in) {
        const std::size_t bo = o * sto * ext[slot] + in, bn = o * stn * next_ext[slot] + in;
        const Jet& sig = cur.c[bo];
        next[bn] = sig;
        for (int i = 0; i < n; ++i) {
          Jet acc = c.dphi[i * d] * cur.c[bo + sto];
          for (int a = 1; a < d; ++a) acc += c.dphi[i * d + a] * cur.c[bo + (1 + a) * sto];
          next[bn + (1 + i) * stn] = acc;
        }
        next[bn + (n + 1) * stn] = cur.c[bo + (d + 1) * sto] + half_h2 * sig;
      }
    cur.c = std::move(next);
    ext = next_ext;
  }
  LocalField out(n, 0, f.tractor_rank, f.weight);
  out.c = std::move(cur.c);
  return out;
}

// delta_l u at p for l in {0,1,2,3}; l = 0 is restriction. Densities and
// tractor-valued u are accepted; the result is intrinsic.
inline LocalField delta_ell_field(const Hypersurface& s, const LocalField& u, const SurfaceJets& j,
                                  const IntrinsicChart& c, const LocalGeometry& intrinsic, int ell) {
  if (ell < 0 || ell > 3) throw CapabilityError("delta_ell supports 0 <= l <= 3");
  (void)s;
  if (ell == 0) return to_intrinsic(c, j, u);
  if (ell == 1) return to_intrinsic(c, j, robin(j, u));
  LocalField f = thomas_D(j.geo, u);
  if (ell == 3) f = robin(j, f);
  f = project_sigma(j.geo, f, j.N);
  auto fi = to_intrinsic(c, j, f);
  // D_Sigma^A contracted with the slot created by the ambient D
  return contract_tractor(intrinsic, thomas_D(intrinsic, fi), 0, 1);
}

inline int delta_ell_order(int ell) { return ell <= 1 ? 2 : ell == 2 ? 4 : 5; }

inline double delta_ell(const Hypersurface& s, const ScalarJetField& u, double w, std::span<const double> p, int ell) {
  s.require_on(p);
  const int order = delta_ell_order(ell);
  auto j = surface_jets(s, p, order);
  auto c = intrinsic_chart(s, p, order);
  auto geo = intrinsic_geometry(s, c);
  return delta_ell_field(s, LocalField::scalar(u(j.y), j.d, w), j, c, geo, ell).c[0].value();
}

// D_Sigma^A (X_A f) / f for an intrinsic density f of weight w, with f given
// as an ambient function restricted to the surface.
inline double dxs_ratio(const Hypersurface& s, const ScalarJetField& f, double w, std::span<const double> p) {
  s.require_on(p);
  const int order = 4;
  auto c = intrinsic_chart(s, p, order);
  auto geo = intrinsic_geometry(s, c);
  const int n = c.n;
  auto y = seed_coordinates(p, order);
  Jet fr = restrict_to(c, f(y));
  LocalField xf(n, 0, 1, w + 1);
  xf.c[0] = geo.zero(order);
  for (int i = 0; i < n; ++i) xf.c[1 + i] = geo.zero(order);
  xf.c[n + 1] = fr;
  auto v = contract_tractor(geo, thomas_D(geo, xf), 0, 1).c[0].value();
  return v / fr.value();
}

struct NormalOrderReport {
  // largest r with B(x^r phi)(p) != 0 for some probe phi while B(x^{r+1} phi)(p) = 0 for all
  int order = -1;
  bool lower_bound_only = false;  // B(x^{max_r} phi) still nonzero
  double witness = 0.0;
  std::vector<double> probe_values;  // max_phi |B(x^r phi)| for r = 0..max_r
};

// B maps a jet-field u to its value at p. Probes phi are 10 random quadratics.
inline NormalOrderReport normal_order_probe(const std::function<double(const ScalarJetField&)>& B,
                                            const Hypersurface& s, int max_r, std::uint64_t seed = 1,
                                            double threshold = 1e-8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int d = s.dim();
  std::vector<ScalarJetField> probes;
  for (int t = 0; t < 10; ++t) {
    std::vector<double> coef(1 + d + d * d);
    for (auto& v : coef) v = U(rng);
    coef[0] = 1.0 + std::abs(coef[0]);
    probes.emplace_back([coef, d](std::span<const Jet> y) {
      Jet acc = Jet::constant(y[0].space(), coef[0]).truncated(y[0].order());
      for (int a = 0; a < d; ++a) acc += y[a] * coef[1 + a];
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) acc += y[a] * y[b] * coef[1 + d + a * d + b];
      return acc;
    });
  }
  NormalOrderReport r;
  auto x = s.x;
  for (int k = 0; k <= max_r; ++k) {
    double best = 0.0;
    for (const auto& phi : probes) {
      ScalarJetField u([x, phi, k](std::span<const Jet> y) { return pow(x(y), k) * phi(y); });
      best = std::max(best, std::abs(B(u)));
    }
    r.probe_values.push_back(best);
  }
  for (int k = max_r; k >= 0; --k)
    if (r.probe_values[k] > threshold) {
      r.order = k;
      r.witness = r.probe_values[k];
      r.lower_bound_only = (k == max_r);
      break;
    }
  return r;
}

}  // namespace tcalc
