#pragma once

// Tractors on the round S^3 = boundary of the model ball, trivialised by
// parallel sections. Ambient R^{5,1} with orthonormal basis
// (T', e_1..e_4, I), H = diag(-1, 1, 1, 1, 1, 1); S^3 sits in I^perp = R^{4,1}
// with X = T' + omega, Y = (omega - T')/2, Z_a = tangent vectors, so
// [V] = (sigma, mu, rho) means V = sigma Y + mu + rho X in the round scale.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "tractor_calc/dtn_model.hpp"
#include "tractor_calc/jet.hpp"

namespace tcalc {

using Vec4 = std::array<double, 4>;
using Ambient6 = std::array<double, 6>;

inline constexpr std::array<double, 6> kSphereH{-1, 1, 1, 1, 1, 1};
inline constexpr int kIDirection = 5;

inline double dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }
inline double ambient_h(const Ambient6& a, const Ambient6& b) {
  double s = 0;
  for (int i = 0; i < 6; ++i) s += kSphereH[i] * a[i] * b[i];
  return s;
}
// tangential projection at omega
inline Vec4 tangential(const Vec4& omega, const Vec4& v) {
  const double k = dot(omega, v);
  return {v[0] - k * omega[0], v[1] - k * omega[1], v[2] - k * omega[2], v[3] - k * omega[3]};
}

// Product Gauss rule on S^3: omega = (cos chi, sin chi cos th, sin chi sin th cos ph, sin chi sin th sin ph).
// Exact for polynomials of degree < 2 * min(nodes).
struct S3Quadrature {
  std::vector<Vec4> points;
  std::vector<double> weights;

  static S3Quadrature make(int m) {
    if (m < 2) throw ArgumentError("S3Quadrature: at least 2 nodes per direction");
    S3Quadrature q;
    // cos chi: Gauss-Chebyshev second kind
    std::vector<double> uc, uw;
    for (int k = 1; k <= m; ++k) {
      const double a = k * std::numbers::pi / (m + 1);
      uc.push_back(std::cos(a));
      uw.push_back(std::numbers::pi / (m + 1) * std::sin(a) * std::sin(a));
    }
    // cos th: Gauss-Legendre by Newton on P_m
    std::vector<double> lc, lw;
    for (int k = 1; k <= m; ++k) {
      double z = std::cos(std::numbers::pi * (k - 0.25) / (m + 0.5)), dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = z;
        for (int j = 2; j <= m; ++j) {
          const double p2 = ((2.0 * j - 1) * z * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = m * (z * p1 - p0) / (z * z - 1);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      lc.push_back(z);
      lw.push_back(2.0 / ((1 - z * z) * dp * dp));
    }
    const int mp = 2 * m;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < mp; ++k) {
          const double sc = std::sqrt(1 - uc[i] * uc[i]), st = std::sqrt(1 - lc[j] * lc[j]);
          const double ph = 2 * std::numbers::pi * k / mp;
          q.points.push_back({uc[i], sc * lc[j], sc * st * std::cos(ph), sc * st * std::sin(ph)});
          q.weights.push_back(uw[i] * lw[j] * 2 * std::numbers::pi / mp);
        }
    return q;
  }
  template <class F>
  double integrate(F&& f) const {
    double s = 0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
    return s;
  }
};

// Covector field on S^3 as an ambient field A; the field is the tangential
// part of A. Jets give the intrinsic divergence P_ij d_j V_i.
struct CovectorField {
  std::function<std::array<Jet, 4>(std::span<const Jet>)> ambient;

  Vec4 operator()(const Vec4& omega) const {
    auto y = seed_coordinates(omega, 0);
    auto a = ambient(y);
    return tangential(omega, {a[0].value(), a[1].value(), a[2].value(), a[3].value()});
  }
  double divergence(const Vec4& omega) const {
    auto y = seed_coordinates(omega, 1);
    auto a = ambient(y);
    // V = A - (x.A) x, extended off the sphere
    Jet k = y[0] * a[0] + y[1] * a[1] + y[2] * a[2] + y[3] * a[3];
    double div = 0;
    for (int i = 0; i < 4; ++i) {
      Jet Vi = a[i] - k * y[i];
      for (int j = 0; j < 4; ++j) {
        const double P = (i == j ? 1.0 : 0.0) - omega[i] * omega[j];
        div += P * Vi.coefficient(1 + j);
      }
    }
    return div;
  }
  static CovectorField zero() {
    return {[](std::span<const Jet> y) {
      Jet z = Jet::zero(y[0].space(), y[0].order());
      return std::array<Jet, 4>{z, z, z, z};
    }};
  }
};

struct SphereTractor {
  double sigma = 0.0;
  Vec4 mu{};
  double rho = 0.0;
};

// h(U, V) = sigma rho' + rho sigma' + mu . mu'
inline double tractor_pairing(const SphereTractor& u, const SphereTractor& v) {
  return u.sigma * v.rho + u.rho * v.sigma + dot(u.mu, v.mu);
}

struct TractorFieldS3 {
  std::function<SphereTractor(const Vec4&)> at;
  std::function<Vec4(const Vec4&)> grad_sigma;  // tangential gradient of the top slot
};

// E(phi) = (0, phi, -div phi)
inline SphereTractor splitting_E(const CovectorField& phi, const Vec4& omega) {
  return {0.0, phi(omega), -phi.divergence(omega)};
}
// middle-slot extraction
inline Vec4 splitting_T(const SphereTractor& t) { return t.mu; }
// integration-by-parts transpose: E* T = mu + grad sigma
inline Vec4 splitting_E_adjoint(const TractorFieldS3& T, const Vec4& omega) {
  auto t = T.at(omega);
  auto g = T.grad_sigma(omega);
  return tangential(omega, {t.mu[0] + g[0], t.mu[1] + g[1], t.mu[2] + g[2], t.mu[3] + g[3]});
}

inline Ambient6 to_parallel(const SphereTractor& t, const Vec4& omega) {
  // sigma Y + mu + rho X, Y = (omega - T')/2, X = T' + omega
  Ambient6 V{};
  V[0] = -0.5 * t.sigma + t.rho;
  for (int i = 0; i < 4; ++i) V[1 + i] = 0.5 * t.sigma * omega[i] + t.mu[i] + t.rho * omega[i];
  return V;
}
inline SphereTractor from_parallel(const Ambient6& V, const Vec4& omega) {
  Ambient6 X{1, omega[0], omega[1], omega[2], omega[3], 0};
  Ambient6 Y{-0.5, 0.5 * omega[0], 0.5 * omega[1], 0.5 * omega[2], 0.5 * omega[3], 0};
  SphereTractor t;
  t.sigma = ambient_h(V, X);
  t.rho = ambient_h(V, Y);
  t.mu = tangential(omega, {V[1], V[2], V[3], V[4]});
  return t;
}

// Scalar DtN on S^3 from a table: (Lambda f)(omega) = int K(omega.eta) f(eta),
// K(t) = sum_l Lambda_l (l+1) U_l(t) / (2 pi^2). Exact on polynomial data of
// degree <= lmax when the rule integrates degree 2 lmax.
struct SphereDtN {
  std::vector<double> Lambda;
  S3Quadrature quad;

  static SphereDtN from(const DtNTable& T, int lmax) {
    SphereDtN op;
    for (int l = 0; l <= lmax; ++l) op.Lambda.push_back(T.Lambda(l));
    op.quad = S3Quadrature::make(lmax + 2);
    return op;
  }
  int lmax() const { return static_cast<int>(Lambda.size()) - 1; }
  double kernel(double t) const {
    auto u = detail::chebyshev_u(lmax(), t);
    double k = 0;
    for (int l = 0; l <= lmax(); ++l) k += Lambda[l] * (l + 1) * u[l];
    return k / (2 * std::numbers::pi * std::numbers::pi);
  }
  double kernel_prime(double t) const {
    auto d = detail::chebyshev_u_prime(lmax(), t);
    double k = 0;
    for (int l = 0; l <= lmax(); ++l) k += Lambda[l] * (l + 1) * d[l];
    return k / (2 * std::numbers::pi * std::numbers::pi);
  }
};

// Tractor-twisted DtN: d+2 = 6 independent scalar DtN solves on the parallel
// components. Node values of V are cached.
struct TwistedDtN {
  const SphereDtN* op = nullptr;
  std::vector<Ambient6> nodes;

  static TwistedDtN apply(const SphereDtN& op, const std::function<SphereTractor(const Vec4&)>& V) {
    TwistedDtN t;
    t.op = &op;
    for (const auto& p : op.quad.points) t.nodes.push_back(to_parallel(V(p), p));
    return t;
  }
  Ambient6 value(const Vec4& omega) const {
    Ambient6 W{};
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double k = op->quad.weights[q] * op->kernel(dot(omega, op->quad.points[q]));
      for (int A = 0; A < 6; ++A) W[A] += k * nodes[q][A];
    }
    return W;
  }
  // tangential derivatives: dW[A] is the gradient of component A
  std::array<Vec4, 6> gradient(const Vec4& omega) const {
    std::array<Vec4, 6> dW{};
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const auto& eta = op->quad.points[q];
      const double k = op->quad.weights[q] * op->kernel_prime(dot(omega, eta));
      const Vec4 pe = tangential(omega, eta);
      for (int A = 0; A < 6; ++A)
        for (int i = 0; i < 4; ++i) dW[A][i] += k * nodes[q][A] * pe[i];
    }
    return dW;
  }
  TractorFieldS3 field() const {
    TractorFieldS3 T;
    auto self = *this;
    T.at = [self](const Vec4& w) { return from_parallel(self.value(w), w); };
    T.grad_sigma = [self](const Vec4& w) {
      // sigma = h(W, X), d_a X = e_a
      auto W = self.value(w);
      auto dW = self.gradient(w);
      Ambient6 X{1, w[0], w[1], w[2], w[3], 0};
      Vec4 g{};
      for (int i = 0; i < 4; ++i) {
        for (int A = 0; A < 6; ++A) g[i] += kSphereH[A] * dW[A][i] * X[A];
        g[i] += W[1 + i];
      }
      return tangential(w, g);
    };
    return T;
  }
  // max |h(W, I)| over the rule nodes
  double i_contraction() const {
    double m = 0;
    for (const auto& p : op->quad.points) m = std::max(m, std::abs(value(p)[kIDirection]));
    return m;
  }
};

// P phi = E* (P^T (E phi))
struct TranslatedOperator {
  SphereDtN op;

  Vec4 apply(const CovectorField& phi, const Vec4& omega) const {
    auto W = TwistedDtN::apply(op, [&](const Vec4& w) { return splitting_E(phi, w); });
    return splitting_E_adjoint(W.field(), omega);
  }
  // Gram-type matrix <phi_i, P phi_j> on the quadrature rule
  Eigen::MatrixXd matrix(const std::vector<CovectorField>& basis) const {
    const int m = static_cast<int>(basis.size());
    Eigen::MatrixXd M(m, m);
    std::vector<std::vector<Vec4>> vals(m), img(m);
    for (int j = 0; j < m; ++j) {
      auto W = TwistedDtN::apply(op, [&](const Vec4& w) { return splitting_E(basis[j], w); });
      auto T = W.field();
      for (const auto& p : op.quad.points) {
        vals[j].push_back(basis[j](p));
        img[j].push_back(splitting_E_adjoint(T, p));
      }
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0;
        for (std::size_t q = 0; q < op.quad.points.size(); ++q) s += op.quad.weights[q] * dot(vals[i][q], img[j][q]);
        M(i, j) = s;
      }
    return M;
  }
};

inline TranslatedOperator translated_operator(const DtNTable& T, int lmax = 6) {
  if (T.n != 3) throw CapabilityError("translated_operator: n = 3 only");
  return {SphereDtN::from(T, lmax)};
}

// L^2 pairing of covector fields
inline double covector_pairing(const S3Quadrature& q, const CovectorField& a, const CovectorField& b) {
  return q.integrate([&](const Vec4& w) { return dot(a(w), b(w)); });
}

// ---------------------------------------------------------------------------
// Probe fields

// Random ambient field with polynomial components of degree <= 2.
inline CovectorField random_covector(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  std::array<double, 4 * 15> c{};
  for (auto& v : c) v = U(rng);
  return {[c](std::span<const Jet> y) {
    std::array<Jet, 4> a;
    for (int i = 0; i < 4; ++i) {
      const double* k = &c[15 * i];
      Jet v = Jet::constant(y[0].space(), k[0]).truncated(y[0].order());
      int idx = 1;
      for (int j = 0; j < 4; ++j) v = v + y[j] * k[idx++];
      for (int j = 0; j < 4; ++j)
        for (int m = j; m < 4; ++m)
          if (idx < 15) v = v + y[j] * y[m] * k[idx++];
      a[i] = v;
    }
    return a;
  }};
}

// grad of the coordinate harmonic omega_k (degree 1)
inline CovectorField coordinate_gradient(int k) {
  return {[k](std::span<const Jet> y) {
    Jet z = Jet::zero(y[0].space(), y[0].order());
    std::array<Jet, 4> a{z, z, z, z};
    a[k] = Jet::constant(y[0].space(), 1.0).truncated(y[0].order());
    return a;
  }};
}

// Killing field omega_i e_j - omega_j e_i
inline CovectorField killing_field(int i, int j) {
  return {[i, j](std::span<const Jet> y) {
    Jet z = Jet::zero(y[0].space(), y[0].order());
    std::array<Jet, 4> a{z, z, z, z};
    a[j] = y[i];
    a[i] = y[j] * -1.0;
    return a;
  }};
}

// grad of the degree-2 harmonic omega_i omega_j (i != j)
inline CovectorField quadratic_gradient(int i, int j) {
  return {[i, j](std::span<const Jet> y) {
    Jet z = Jet::zero(y[0].space(), y[0].order());
    std::array<Jet, 4> a{z, z, z, z};
    a[i] = y[j];
    a[j] = y[i];
    return a;
  }};
}

inline std::vector<CovectorField> vector_harmonic_basis() {
  std::vector<CovectorField> b;
  for (int k = 0; k < 4; ++k) b.push_back(coordinate_gradient(k));
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) b.push_back(killing_field(i, j));
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) b.push_back(quadratic_gradient(i, j));
  return b;
}

// Random tractor of weight -1 with polynomial slots, for adjointness pairings.
inline TractorFieldS3 random_tractor(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  std::array<double, 5> sg{}, rh{};
  for (auto& v : sg) v = U(rng);
  for (auto& v : rh) v = U(rng);
  auto mu = random_covector(seed ^ 0x9e3779b97f4a7c15ULL);
  TractorFieldS3 T;
  T.at = [sg, rh, mu](const Vec4& w) {
    SphereTractor t;
    t.sigma = sg[0] + sg[1] * w[0] + sg[2] * w[1] * w[2] + sg[3] * w[3] * w[3] + sg[4] * w[0] * w[1];
    t.rho = rh[0] + rh[1] * w[1] + rh[2] * w[2] * w[3] + rh[3] * w[0] * w[0] + rh[4] * w[3];
    t.mu = mu(w);
    return t;
  };
  T.grad_sigma = [sg](const Vec4& w) {
    Vec4 g{sg[1] + sg[4] * w[1], sg[2] * w[2] + sg[4] * w[0], sg[2] * w[1], 2 * sg[3] * w[3]};
    return tangential(w, g);
  };
  return T;
}

}  // namespace tcalc
