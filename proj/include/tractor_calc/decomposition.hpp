#pragma once

// Null-space splitting for P[E] = (E - mu_1)...(E - mu_p) with distinct mu:
// Proj_i = Q_i prod_{j != i} (E - mu_j), Q_i = prod_{j != i} 1/(mu_i - mu_j).
// Backends: exact rational matrices, double matrices, and E = Delta^{g+} on
// jet fields.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tractor_calc/einstein_gjms.hpp"

namespace tcalc {

inline constexpr double kConditioningGap = 1e-8;

// Dense square matrix over Q.
struct RationalMatrix {
  int n = 0;
  std::vector<Rational> a;

  RationalMatrix() = default;
  explicit RationalMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, Rational(0)) {}
  static RationalMatrix identity(int size) {
    RationalMatrix m(size);
    for (int i = 0; i < size; ++i) m(i, i) = 1;
    return m;
  }
  static RationalMatrix from(const std::vector<std::vector<long long>>& rows) {
    RationalMatrix m(static_cast<int>(rows.size()));
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j) m(i, j) = rows[i].at(j);
    return m;
  }

  Rational& operator()(int i, int j) { return a[i * n + j]; }
  const Rational& operator()(int i, int j) const { return a[i * n + j]; }

  bool is_zero() const {
    for (const auto& v : a)
      if (v != Rational(0)) return false;
    return true;
  }
  Eigen::MatrixXd to_double() const {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = tcalc::to_double((*this)(i, j));
    return m;
  }
  friend bool operator==(const RationalMatrix& x, const RationalMatrix& y) { return x.n == y.n && x.a == y.a; }
  friend RationalMatrix operator+(RationalMatrix x, const RationalMatrix& y) {
    for (std::size_t k = 0; k < x.a.size(); ++k) x.a[k] += y.a[k];
    return x;
  }
  friend RationalMatrix operator-(RationalMatrix x, const RationalMatrix& y) {
    for (std::size_t k = 0; k < x.a.size(); ++k) x.a[k] -= y.a[k];
    return x;
  }
  friend RationalMatrix operator*(const Rational& s, RationalMatrix x) {
    for (auto& v : x.a) v *= s;
    return x;
  }
  friend RationalMatrix operator*(const RationalMatrix& x, const RationalMatrix& y) {
    RationalMatrix r(x.n);
    for (int i = 0; i < x.n; ++i)
      for (int k = 0; k < x.n; ++k) {
        if (x(i, k) == Rational(0)) continue;
        for (int j = 0; j < x.n; ++j) r(i, j) += x(i, k) * y(k, j);
      }
    return r;
  }
  std::vector<Rational> apply(const std::vector<Rational>& v) const {
    std::vector<Rational> r(n, Rational(0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }
};

namespace detail {
inline RationalMatrix shifted(const RationalMatrix& E, const Rational& mu) {
  return E - mu * RationalMatrix::identity(E.n);
}
inline Eigen::MatrixXd shifted(const Eigen::MatrixXd& E, double mu) {
  return E - mu * Eigen::MatrixXd::Identity(E.rows(), E.cols());
}
inline RationalMatrix identity_like(const RationalMatrix& E) { return RationalMatrix::identity(E.n); }
inline Eigen::MatrixXd identity_like(const Eigen::MatrixXd& E) { return Eigen::MatrixXd::Identity(E.rows(), E.cols()); }
inline double gap(const Rational& x) { return std::abs(to_double(x)); }
inline double gap(double x) { return std::abs(x); }
}  // namespace detail

// Q_i = prod_{j != i} 1/(mu_i - mu_j)
template <class S>
std::vector<S> q_coefficients(const std::vector<S>& mu) {
  const std::size_t p = mu.size();
  if (p == 0) throw ArgumentError("q_coefficients: empty shift list");
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) {
      if (mu[i] == mu[j]) throw DegeneracyError("shifts must be mutually distinct");
      if (detail::gap(mu[i] - mu[j]) < kConditioningGap)
        throw ConditioningError("shifts closer than 1e-8: Q_i would be amplified by 1/gap");
    }
  std::vector<S> q;
  for (std::size_t i = 0; i < p; ++i) {
    S v(1);
    for (std::size_t j = 0; j < p; ++j)
      if (j != i) v /= (mu[i] - mu[j]);
    q.push_back(v);
  }
  return q;
}

// sum_i Q_i prod_{j != i}(t - mu_j) - 1 at p+1 sample points t = 0..p (plus the mu_i for doubles).
template <class S>
S partial_fraction_defect(const std::vector<S>& mu) {
  auto q = q_coefficients(mu);
  S worst(0);
  for (int t = 0; t <= static_cast<int>(mu.size()); ++t) {
    S sum(0);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      S prod = q[i];
      for (std::size_t j = 0; j < mu.size(); ++j)
        if (j != i) prod *= (S(t) - mu[j]);
      sum += prod;
    }
    S err = sum - S(1);
    if (err < S(0)) err = -err;
    if (worst < err) worst = err;
  }
  return worst;
}

// Q_i prod_{j != i}(E - mu_j)
template <class M, class S>
M projector(const M& E, const std::vector<S>& mu, std::size_t i) {
  auto q = q_coefficients(mu);
  M P = detail::identity_like(E);
  for (std::size_t j = 0; j < mu.size(); ++j)
    if (j != i) P = P * detail::shifted(E, mu[j]);
  return q[i] * P;
}

template <class M, class S>
M characteristic_product(const M& E, const std::vector<S>& mu) {
  M P = detail::identity_like(E);
  for (const auto& m : mu) P = P * detail::shifted(E, m);
  return P;
}

// sum_i Proj_i - id: exactly zero for every E, being a polynomial identity.
inline RationalMatrix identity_decomposition_defect(const RationalMatrix& E, const std::vector<Rational>& mu) {
  RationalMatrix S(E.n);
  for (std::size_t i = 0; i < mu.size(); ++i) S = S + projector(E, mu, i);
  return S - RationalMatrix::identity(E.n);
}
inline double identity_decomposition_check(const Eigen::MatrixXd& E, const std::vector<double>& mu) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(E.rows(), E.cols());
  for (std::size_t i = 0; i < mu.size(); ++i) S += projector(E, mu, i);
  return (S - Eigen::MatrixXd::Identity(E.rows(), E.cols())).cwiseAbs().maxCoeff();
}

struct MatrixSplit {
  std::vector<Eigen::VectorXd> components;
  double null_residual = 0.0;     // |P[E] v| / |v|
  double sum_residual = 0.0;      // |sum v_i - v|
  double eigen_residual = 0.0;    // max_i |(E - mu_i) v_i|
  bool in_null_space = true;
};

inline MatrixSplit project_components(const Eigen::MatrixXd& E, const std::vector<double>& mu,
                                      const Eigen::VectorXd& v, double tol = 1e-12) {
  MatrixSplit s;
  const double scale = std::max(1.0, v.norm());
  s.null_residual = (characteristic_product(E, mu) * v).norm() / scale;
  s.in_null_space = s.null_residual <= tol * std::max(1.0, E.norm());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(v.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    Eigen::VectorXd vi = projector(E, mu, i) * v;
    s.eigen_residual = std::max(s.eigen_residual, (detail::shifted(E, mu[i]) * vi).norm() / scale);
    sum += vi;
    s.components.push_back(vi);
  }
  s.sum_residual = (sum - v).norm() / scale;
  return s;
}

// Integer matrix with determinant 1 from seeded elementary row operations.
inline RationalMatrix random_unimodular(int n, std::uint64_t seed, int steps = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> idx(0, n - 1), coef(-2, 2);
  RationalMatrix S = RationalMatrix::identity(n);
  if (steps <= 0) steps = 3 * n;
  for (int s = 0; s < steps; ++s) {
    int i = idx(rng), j = idx(rng);
    if (i == j) continue;
    const Rational c = coef(rng);
    for (int k = 0; k < n; ++k) S(i, k) += c * S(j, k);
  }
  return S;
}

// Inverse of a unimodular integer matrix by exact Gauss-Jordan.
inline RationalMatrix exact_inverse(RationalMatrix A) {
  const int n = A.n;
  RationalMatrix inv = RationalMatrix::identity(n);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    while (piv < n && A(piv, c) == Rational(0)) ++piv;
    if (piv == n) throw DegeneracyError("exact_inverse: singular matrix");
    if (piv != c)
      for (int k = 0; k < n; ++k) {
        std::swap(A(c, k), A(piv, k));
        std::swap(inv(c, k), inv(piv, k));
      }
    const Rational d = A(c, c);
    for (int k = 0; k < n; ++k) {
      A(c, k) /= d;
      inv(c, k) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || A(r, c) == Rational(0)) continue;
      const Rational f = A(r, c);
      for (int k = 0; k < n; ++k) {
        A(r, k) -= f * A(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

// E = S diag(eigenvalues) S^{-1}: diagonalisable with P[E] = 0 for the given list.
inline RationalMatrix diagonalisable_system(const std::vector<Rational>& eigenvalues, std::uint64_t seed) {
  const int n = static_cast<int>(eigenvalues.size());
  auto S = random_unimodular(n, seed);
  RationalMatrix D(n);
  for (int i = 0; i < n; ++i) D(i, i) = eigenvalues[i];
  return S * D * exact_inverse(S);
}

// ---------------------------------------------------------------------------
// Field backend: E = Delta^{g+} on scalar jet fields.

struct FieldFactorSystem {
  MetricModel metric;
  std::vector<double> mu;

  int p() const { return static_cast<int>(mu.size()); }
  // prod_{j in shifts} (Delta - mu_j) f
  Jet apply(const LocalGeometry& geo, Jet f, const std::vector<double>& shifts) const {
    for (double m : shifts) f = scalar_laplacian(geo, f) - f * m;
    return f;
  }
  std::vector<double> others(std::size_t i) const {
    std::vector<double> o;
    for (std::size_t j = 0; j < mu.size(); ++j)
      if (j != i) o.push_back(mu[j]);
    return o;
  }
};

struct FieldSplit {
  Point point;
  double value = 0.0;
  std::vector<double> components;
  std::vector<double> eigen_residual;  // |(Delta - mu_i) v_i(p)|
  double sum_residual = 0.0;
  double null_residual = 0.0;          // |P[Delta] v (p)|
  double idempotence = 0.0;            // max_i |Proj_i v_i - v_i|
  double cross = 0.0;                  // max_{i != j} |Proj_j v_i|
  bool in_null_space = true;
};

inline FieldSplit project_components(const FieldFactorSystem& F, const ScalarJetField& v, std::span<const double> p,
                                     double tol = 1e-8) {
  auto q = q_coefficients(F.mu);
  const int m = F.p();
  // two Laplacians of headroom for the residual and 2(p-1) for idempotence
  const int order = 2 * (m - 1) + 2 + 2 * (m - 1);
  auto geo = LocalGeometry::at(F.metric, p, order, CurvatureLevel::none);
  Jet vj = v.at(p, order);
  FieldSplit s;
  s.point.assign(p.begin(), p.end());
  s.value = vj.value();
  s.null_residual = std::abs(F.apply(geo, vj, F.mu).value());
  s.in_null_space = s.null_residual <= tol * std::max(1.0, std::abs(s.value));
  double sum = 0;
  std::vector<Jet> comps;
  for (int i = 0; i < m; ++i) {
    Jet vi = F.apply(geo, vj, F.others(i)) * q[i];
    comps.push_back(vi);
    s.components.push_back(vi.value());
    s.eigen_residual.push_back(std::abs(F.apply(geo, vi, {F.mu[i]}).value()));
    sum += vi.value();
  }
  s.sum_residual = std::abs(sum - s.value);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double pj = (F.apply(geo, comps[i], F.others(j)) * q[j]).value();
      if (i == j)
        s.idempotence = std::max(s.idempotence, std::abs(pj - comps[i].value()));
      else
        s.cross = std::max(s.cross, std::abs(pj));
    }
  return s;
}

inline double identity_decomposition_check(const FieldFactorSystem& F, const ScalarJetField& v,
                                           std::span<const double> p) {
  auto q = q_coefficients(F.mu);
  const int order = 2 * (F.p() - 1);
  auto geo = LocalGeometry::at(F.metric, p, std::max(order, 1), CurvatureLevel::none);
  Jet vj = v.at(p, std::max(order, 1));
  double sum = 0;
  for (int i = 0; i < F.p(); ++i) sum += (F.apply(geo, vj, F.others(i)) * q[i]).value();
  return std::abs(sum - vj.value());
}

// ---------------------------------------------------------------------------
// Eigenfunctions of Delta^{g+} on the Poincare ball B^D, regular at the centre:
// f = Re (y_1 + i y_2)^l h(|y|^2), h = sum a_j t^j. With
// c = 2D + 4l, b_k = a_k k(4(k-1)+c), e_k = a_k(l+2k), the ODE
// (1-t)^2 (4t h'' + c h') + 2(D-2)(1-t)(l h + 2t h') + 4 mu h = 0 gives
// b_{j+1} = 2b_j - b_{j-1} - 2(D-2)(e_j - e_{j-1}) - 4 mu a_j.
struct HyperbolicEigenfunction {
  int D = 4;
  int l = 0;
  double mu = 0.0;
  std::vector<double> a;

  ScalarJetField field() const {
    auto self = *this;
    return ScalarJetField(
        [self](std::span<const Jet> y) {
          Jet t = detail::radius_squared(y);
          Jet h = Jet::constant(t.space(), self.a.back()).truncated(t.order());
          for (int j = static_cast<int>(self.a.size()) - 2; j >= 0; --j) h = h * t + self.a[j];
          // Re (y1 + i y2)^l
          Jet re = Jet::constant(t.space(), 1.0).truncated(t.order());
          Jet im = Jet::zero(t.space(), t.order());
          for (int k = 0; k < self.l; ++k) {
            Jet nr = re * y[0] - im * y[1];
            im = re * y[1] + im * y[0];
            re = nr;
          }
          return re * h;
        },
        "hyperbolic eigenfunction l=" + std::to_string(l));
  }
};

inline HyperbolicEigenfunction hyperbolic_eigenfunction(int D, int l, double mu, int terms = 400) {
  if (D < 3) throw ArgumentError("hyperbolic_eigenfunction needs D >= 3");
  if (l < 0) throw ArgumentError("l >= 0");
  HyperbolicEigenfunction f{D, l, mu, {}};
  const double c = 2.0 * D + 4.0 * l;
  std::vector<double> a{1.0}, b{0.0}, e{static_cast<double>(l)};
  for (int j = 0; j + 1 < terms; ++j) {
    const double bm = j >= 1 ? b[j - 1] : 0.0, em = j >= 1 ? e[j - 1] : 0.0;
    const double bn = 2 * b[j] - bm - 2.0 * (D - 2) * (e[j] - em) - 4 * mu * a[j];
    const double an = bn / ((j + 1) * (4.0 * j + c));
    a.push_back(an);
    b.push_back(bn);
    e.push_back(an * (l + 2.0 * (j + 1)));
  }
  f.a = std::move(a);
  return f;
}

}  // namespace tcalc
