#pragma once

// Dirichlet-to-Neumann data for the scattering Laplacian on the model
// H^{n+1} = (0, inf) x S^n, g+ = dt^2 + sinh^2 t h. A degree-l mode u(t) Y_l
// solves -(u'' + n coth t u') + l(l+n-1) sinh^{-2} t u = s(n-s) u.
// With x = 2 e^{-t}, x^2 g+ = dx^2 + (1 - x^2/4)^2 h is geodesic, totally
// geodesic at x = 0, and u = x^{n-s}(F + O(x^2)) + x^s (G + O(x^2)).
// Lambda_l = G/F for the solution regular at t = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "tractor_calc/errors.hpp"

namespace tcalc {

inline constexpr double kDtNWindowTolerance = 1e-5;
inline constexpr double kDtNXMin = 1e-7;
inline constexpr int kDtNDefaultGrid = 400;

struct HarmonicMode {
  int l = 0;
  int n = 3;
  // Laplacian eigenvalue on the unit S^n (positive convention)
  double eigenvalue() const { return static_cast<double>(l) * (l + n - 1); }
};

// Sampling and integration controls. `grid` is the number of samples per
// unit of t; the integrator tolerance tightens with it at eighth order.
struct RadialGrid {
  int grid = kDtNDefaultGrid;
  int f_terms = 6;
  int g_terms = 6;
  double x_min = kDtNXMin;

  double tolerance() const { return std::max(1e-11 * std::pow(static_cast<double>(kDtNDefaultGrid) / grid, 8), 1e-15); }
  double t_max() const { return std::log(2.0 / x_min); }
  RadialGrid refined() const {
    RadialGrid r = *this;
    r.grid *= 2;
    return r;
  }
};

struct BoundaryFit {
  double F = 0.0;
  double G = 0.0;
  std::vector<double> f_series;  // coefficients of xi^{2j}
  std::vector<double> g_series;  // coefficients of xi^{2s-n+2j}
  double residual = 0.0;         // max |fit - data| / max |data|
  double x1 = 0.0;               // window (0, x1]
};

struct RadialSolution {
  int n = 3;
  double s = 0.0;
  int l = 0;
  RadialGrid grid;
  std::vector<double> t;
  std::vector<double> log_w;  // u = sinh(t)^l w
  std::vector<double> y;      // w'/w
  double F = 0.0, G = 0.0;
  double Lambda = 0.0;
  double fit_residual = 0.0;
  double ode_residual = 0.0;
  double window = 0.0;

  double x_at(std::size_t i) const { return 2.0 * std::exp(-t[i]); }
  // log |u / x^{n-s}|
  double log_v(std::size_t i) const {
    const double ti = t[i];
    const double log_sinh = ti + std::log1p(-std::exp(-2.0 * ti)) - std::numbers::ln2;
    return l * log_sinh + log_w[i] - (n - s) * std::log(x_at(i));
  }
};

namespace detail {

inline void require_nonresonant(int n, double s) {
  const double e = 2.0 * s - n;
  const double r = std::round(e);
  if (std::abs(e - r) < 1e-12 && static_cast<long>(r) % 2 == 0) {
    std::ostringstream m;
    m << "s = " << s << " excluded: 2s - n = " << r << " is an even integer (indicial collision or log terms)";
    throw ResonanceError(m.str());
  }
}

inline double default_window(int l) { return std::min(0.4, 2.0 / (l + 4.0)); }

}  // namespace detail

// Least squares for v(xi) = sum F_j xi^{2j} + sum G_j xi^{2s-n+2j}, xi = x/x1,
// on samples with x <= x1. Returns F = F_0 and G = G_0 / x1^{2s-n}.
inline BoundaryFit two_term_fit(const std::vector<double>& x, const std::vector<double>& v, int n, double s, double x1,
                                int f_terms, int g_terms) {
  const double e = 2.0 * s - n;
  std::vector<int> rows;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] <= x1 && x[i] >= x1 * 1e-4) rows.push_back(static_cast<int>(i));
  const int m = f_terms + g_terms;
  if (static_cast<int>(rows.size()) < 4 * m) throw GridError("boundary fit: too few samples in the window");
  Eigen::MatrixXd A(rows.size(), m);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double xi = x[rows[r]] / x1;
    for (int j = 0; j < f_terms; ++j) A(r, j) = std::pow(xi, 2.0 * j);
    for (int j = 0; j < g_terms; ++j) A(r, f_terms + j) = std::pow(xi, e + 2.0 * j);
    b(r) = v[rows[r]];
  }
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (int j = 0; j < m; ++j) A.col(j) /= scale(j);
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  BoundaryFit f;
  f.residual = (A * c - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  c = c.cwiseQuotient(scale);
  for (int j = 0; j < f_terms; ++j) f.f_series.push_back(c(j));
  for (int j = 0; j < g_terms; ++j) f.g_series.push_back(c(f_terms + j));
  f.F = c(0);
  f.G = c(f_terms) / std::pow(x1, e);
  f.x1 = x1;
  return f;
}

// Regular solution by Riccati integration of w = u / sinh^l t:
//   w'' + (2l+n) coth t w' + (l(l+n) + s(n-s)) w = 0,  w(0) = 1,
// state (log w, w'/w), started from the Frobenius branch at t = eps.
inline RadialSolution radial_solve(double s, int l, int n, const RadialGrid& grid = {}) {
  namespace ode = boost::numeric::odeint;
  if (n < 1) throw ArgumentError("radial_solve: n >= 1");
  if (l < 0) throw ArgumentError("radial_solve: l >= 0");
  if (grid.grid < 50) throw ArgumentError("radial_solve: grid >= 50");
  detail::require_nonresonant(n, s);

  RadialSolution sol;
  sol.n = n;
  sol.s = s;
  sol.l = l;
  sol.grid = grid;
  const double mu = s * (n - s);
  const double K = l * static_cast<double>(l + n) + mu;
  const double a = 2.0 * l + n;
  const double c = -K / (2.0 * (a + 1.0));

  const double eps = 1e-6;
  const double h = 1.0 / grid.grid;
  const int steps = static_cast<int>(std::ceil(grid.t_max() / h));
  sol.t.push_back(eps);
  for (int i = 1; i <= steps; ++i) sol.t.push_back(i * h);

  using State = std::array<double, 2>;
  State z{std::log1p(c * eps * eps), 2.0 * c * eps / (1.0 + c * eps * eps)};
  auto rhs = [&](const State& q, State& dq, double t) {
    dq[0] = q[1];
    dq[1] = -q[1] * q[1] - a * q[1] / std::tanh(t) - K;
  };
  auto stepper = ode::make_controlled(grid.tolerance(), grid.tolerance(), ode::runge_kutta_fehlberg78<State>());
  ode::integrate_times(stepper, rhs, z, sol.t.begin(), sol.t.end(), h / 4, [&](const State& q, double) {
    if (!std::isfinite(q[0]) || !std::isfinite(q[1])) throw GridError("radial_solve: Riccati variable blew up");
    sol.log_w.push_back(q[0]);
    sol.y.push_back(q[1]);
  });

  // ODE residual y' + y^2 + a coth t y + K, y' by the 8th-order central stencil
  static constexpr std::array<double, 4> d1{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  for (std::size_t i = 4; i + 4 < sol.t.size(); ++i) {
    if (sol.t[i] < 0.05) continue;
    double dy = 0;
    for (int k = 1; k <= 4; ++k) dy += d1[k - 1] * (sol.y[i + k] - sol.y[i - k]);
    dy /= h;
    const double yi = sol.y[i], ct = a * yi / std::tanh(sol.t[i]);
    const double r = std::abs(dy + yi * yi + ct + K) / (std::abs(dy) + yi * yi + std::abs(ct) + std::abs(K));
    sol.ode_residual = std::max(sol.ode_residual, r);
  }

  std::vector<double> x(sol.t.size()), v(sol.t.size());
  const double ref = sol.log_v(sol.t.size() - 1);
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    x[i] = sol.x_at(i);
    v[i] = std::exp(sol.log_v(i) - ref);
  }
  // halve the window until Lambda is stable
  double x1 = detail::default_window(l);
  BoundaryFit fit = two_term_fit(x, v, n, s, x1, grid.f_terms, grid.g_terms);
  bool stable = false;
  for (int k = 0; k < 6 && !stable; ++k) {
    BoundaryFit half = two_term_fit(x, v, n, s, x1 / 2, grid.f_terms, grid.g_terms);
    const double L0 = fit.G / fit.F, L1 = half.G / half.F;
    stable = std::abs(L1 - L0) <= kDtNWindowTolerance * std::max(1.0, std::abs(L1));
    fit = half;
    x1 /= 2;
  }
  if (!stable) throw GridError("radial_solve: Lambda not stable under window halving");
  sol.F = fit.F;
  sol.G = fit.G;
  sol.Lambda = fit.G / fit.F;
  sol.fit_residual = fit.residual;
  sol.window = x1;
  return sol;
}

// Exponents of the two-term boundary form by log-slope regression: the
// leading one from log u, the second from the remainder after removing the
// fitted x^{n-s} series.
struct ExponentCheck {
  double leading = 0.0;
  double second = 0.0;
};

namespace detail {
inline double slope(const std::vector<double>& X, const std::vector<double>& Y) {
  const double n = static_cast<double>(X.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sx += X[i];
    sy += Y[i];
    sxx += X[i] * X[i];
    sxy += X[i] * Y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace detail

inline ExponentCheck fitted_exponents(const RadialSolution& sol) {
  const int n = sol.n;
  const double s = sol.s;
  const double lo = std::min(n - s, s), e = std::abs(2.0 * s - n);
  ExponentCheck ex;
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    const double x = sol.x_at(i);
    if (x <= 10 * sol.grid.x_min) {
      X.push_back(std::log(x));
      Y.push_back(sol.log_v(i) + (n - s) * std::log(x));
    }
  }
  ex.leading = detail::slope(X, Y);
  // remainder relative to v(0): window where it is ~1e-6 of v
  const double xa = std::pow(1e-6, 1.0 / e);
  X.clear();
  Y.clear();
  std::vector<double> xs(sol.t.size()), v(sol.t.size());
  const double ref = sol.log_v(sol.t.size() - 1);
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    xs[i] = sol.x_at(i);
    v[i] = std::exp(sol.log_v(i) - ref);
  }
  BoundaryFit fit = two_term_fit(xs, v, n, s, sol.window, sol.grid.f_terms, sol.grid.g_terms);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < xa || xs[i] > 4 * xa) continue;
    const double xi = xs[i] / fit.x1;
    double lead = 0;
    for (std::size_t j = 0; j < fit.f_series.size(); ++j) lead += fit.f_series[j] * std::pow(xi, 2.0 * j);
    X.push_back(std::log(xs[i]));
    Y.push_back(std::log(std::abs(v[i] - lead)));
  }
  ex.second = detail::slope(X, Y) + lo;
  if (s < n / 2.0) std::swap(ex.leading, ex.second);
  return ex;
}

struct DtNEntry {
  int l = 0;
  double Lambda = 0.0;
  double fit_residual = 0.0;
  double ode_residual = 0.0;
};

struct DtNTable {
  int n = 3;
  double s = 0.0;
  RadialGrid grid;
  std::vector<DtNEntry> entries;
  std::vector<RadialSolution> solutions;

  int lmax() const { return static_cast<int>(entries.size()) - 1; }
  double Lambda(int l) const {
    if (l < 0 || l > lmax()) throw ArgumentError("DtNTable: degree " + std::to_string(l) + " not tabulated");
    return entries[l].Lambda;
  }
  // max relative change against a table on another grid
  double relative_change(const DtNTable& other) const {
    double worst = 0;
    for (int l = 0; l <= std::min(lmax(), other.lmax()); ++l)
      worst = std::max(worst, std::abs(Lambda(l) - other.Lambda(l)) / std::max(1.0, std::abs(other.Lambda(l))));
    return worst;
  }
  // spread of Lambda_l / l over [l0, l1], relative to its mean
  double principal_ratio_spread(int l0, int l1) const {
    double lo = INFINITY, hi = -INFINITY, sum = 0;
    for (int l = l0; l <= l1; ++l) {
      const double r = Lambda(l) / l;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      sum += r;
    }
    return (hi - lo) / std::abs(sum / (l1 - l0 + 1));
  }
  bool monotone() const {
    for (int l = 1; l <= lmax(); ++l)
      if (std::abs(Lambda(l)) <= std::abs(Lambda(l - 1))) return false;
    return true;
  }
  std::string csv() const {
    std::ostringstream o;
    o.precision(17);
    o << "l,Lambda_l,fit_residual\n";
    for (const auto& e : entries) o << e.l << ',' << e.Lambda << ',' << e.fit_residual << '\n';
    return o.str();
  }
};

inline DtNTable dtn_table(int n, double s, int lmax, const RadialGrid& grid = {}) {
  if (lmax < 0) throw ArgumentError("dtn_table: lmax >= 0");
  DtNTable T;
  T.n = n;
  T.s = s;
  T.grid = grid;
  for (int l = 0; l <= lmax; ++l) {
    auto sol = radial_solve(s, l, n, grid);
    T.entries.push_back({l, sol.Lambda, sol.fit_residual, sol.ode_residual});
    T.solutions.push_back(std::move(sol));
  }
  return T;
}

// ---------------------------------------------------------------------------
// Zonal data on S^3: f(theta) = sum_l c_l U_l(cos theta), U_l Chebyshev of the
// second kind (the zonal harmonics of S^3).

struct ZonalExpansion {
  std::vector<double> c;

  int degree() const { return static_cast<int>(c.size()) - 1; }
  double operator()(double cos_theta) const;
};

namespace detail {
inline std::vector<double> chebyshev_u(int lmax, double t) {
  std::vector<double> u(lmax + 1);
  u[0] = 1.0;
  if (lmax >= 1) u[1] = 2.0 * t;
  for (int k = 2; k <= lmax; ++k) u[k] = 2.0 * t * u[k - 1] - u[k - 2];
  return u;
}
// d/dt U_k
inline std::vector<double> chebyshev_u_prime(int lmax, double t) {
  auto u = chebyshev_u(lmax, t);
  std::vector<double> d(lmax + 1, 0.0);
  if (lmax >= 1) d[1] = 2.0;
  for (int k = 2; k <= lmax; ++k) d[k] = 2.0 * u[k - 1] + 2.0 * t * d[k - 1] - d[k - 2];
  return d;
}
}  // namespace detail

inline double ZonalExpansion::operator()(double cos_theta) const {
  if (c.empty()) return 0.0;
  auto u = detail::chebyshev_u(degree(), cos_theta);
  double v = 0;
  for (std::size_t l = 0; l < c.size(); ++l) v += c[l] * u[l];
  return v;
}

struct DtNMapResult {
  ZonalExpansion dirichlet;  // recovered F(theta) projected back
  ZonalExpansion neumann;    // G(theta) projected
  double fit_residual = 0.0;
};

// Boundary data -> harmonic solve -> pointwise two-term fit on Gauss nodes ->
// projection of G back onto zonal harmonics. Only the table's profiles are
// used, so mode coupling can enter only through the fit and quadrature.
inline DtNMapResult dtn_map(const DtNTable& T, const ZonalExpansion& f, int out_degree = -1) {
  if (T.n != 3) throw CapabilityError("dtn_map: zonal synthesis implemented for n = 3");
  const int L = std::max(f.degree(), 0);
  if (L > T.lmax()) throw ArgumentError("dtn_map: data degree exceeds the table");
  if (out_degree < 0) out_degree = L;
  DtNMapResult out;
  out.dirichlet.c.assign(out_degree + 1, 0.0);
  out.neumann.c.assign(out_degree + 1, 0.0);
  if (f.c.empty()) return out;

  // Gauss-Chebyshev (second kind): exact for polynomial degree < 2Q
  const int Q = L + out_degree + 2;
  const auto& ref = T.solutions.front();
  std::vector<double> x(ref.t.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = ref.x_at(i);
  // profiles with F = 1
  std::vector<std::vector<double>> prof(L + 1);
  for (int l = 0; l <= L; ++l) {
    if (f.c[l] == 0.0) continue;
    const auto& sol = T.solutions[l];
    const double r = sol.log_v(sol.t.size() - 1);
    double F0 = 0;
    {
      std::vector<double> v(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::exp(sol.log_v(i) - r);
      F0 = two_term_fit(x, v, 3, T.s, sol.window, T.grid.f_terms, T.grid.g_terms).F;
      for (auto& vi : v) vi /= F0;
      prof[l] = std::move(v);
    }
  }
  const double x1 = T.solutions[L].window;
  std::vector<double> norm2(out_degree + 1, 0.0);
  for (int q = 1; q <= Q; ++q) {
    const double th = q * std::numbers::pi / (Q + 1);
    const double ct = std::cos(th), w = std::numbers::pi / (Q + 1) * std::sin(th) * std::sin(th);
    auto u = detail::chebyshev_u(std::max(L, out_degree), ct);
    std::vector<double> v(x.size(), 0.0);
    for (int l = 0; l <= L; ++l)
      if (!prof[l].empty())
        for (std::size_t i = 0; i < x.size(); ++i) v[i] += f.c[l] * u[l] * prof[l][i];
    auto fit = two_term_fit(x, v, 3, T.s, x1, T.grid.f_terms, T.grid.g_terms);
    out.fit_residual = std::max(out.fit_residual, fit.residual);
    for (int l = 0; l <= out_degree; ++l) {
      out.dirichlet.c[l] += w * fit.F * u[l];
      out.neumann.c[l] += w * fit.G * u[l];
      norm2[l] += w * u[l] * u[l];
    }
  }
  for (int l = 0; l <= out_degree; ++l) {
    out.dirichlet.c[l] /= norm2[l];
    out.neumann.c[l] /= norm2[l];
  }
  return out;
}

// k = 2: s = (n+1)/2
inline DtNTable dtn_table_k2(int n, int lmax, const RadialGrid& grid = {}) {
  return dtn_table(n, (n + 1) / 2.0, lmax, grid);
}

// Matrix of the map on the zonal basis, in the orthonormal normalization
// (|U_l|^2 = pi/2 for every l on S^3, so no rescaling is needed).
inline Eigen::MatrixXd dtn_matrix(const DtNTable& T, int lmax) {
  Eigen::MatrixXd M(lmax + 1, lmax + 1);
  for (int l = 0; l <= lmax; ++l) {
    ZonalExpansion e;
    e.c.assign(l + 1, 0.0);
    e.c[l] = 1.0;
    auto r = dtn_map(T, e, lmax);
    for (int k = 0; k <= lmax; ++k) M(k, l) = r.neumann.c[k];
  }
  return M;
}

struct DtNMatrixReport {
  double cross_talk = 0.0;   // max off-diagonal / max diagonal
  double asymmetry = 0.0;    // max |M - M^T| / max |M|
  double diagonal_vs_table = 0.0;
};

inline DtNMatrixReport dtn_matrix_report(const DtNTable& T, const Eigen::MatrixXd& M) {
  DtNMatrixReport r;
  const double scale = M.cwiseAbs().maxCoeff();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) {
      if (i != j) r.cross_talk = std::max(r.cross_talk, std::abs(M(i, j)) / scale);
      r.asymmetry = std::max(r.asymmetry, std::abs(M(i, j) - M(j, i)) / scale);
    }
  for (int l = 0; l < M.rows(); ++l)
    r.diagonal_vs_table =
        std::max(r.diagonal_vs_table, std::abs(M(l, l) - T.Lambda(l)) / std::max(1.0, std::abs(T.Lambda(l))));
  return r;
}

// Experimental: mode-diagonal boundary map for the j-th factor of P_k on the
// ball, s_j = (k + n - 1 - 2 m_j)/2. k = 2 is the conformal DtN map.
struct GJMSDtNProbe {
  int k = 2;
  int m_j = 0;
  double s = 0.0;
  DtNTable table;
  bool experimental = true;
};

inline GJMSDtNProbe gjms_dtn_probe(int k, int m_j, int n, int lmax, const RadialGrid& grid = {}) {
  if (k != 2 && k != 4) throw CapabilityError("gjms_dtn_probe: k in {2, 4}");
  if (m_j < 0 || m_j >= k / 2) throw ArgumentError("gjms_dtn_probe: m_j in [0, k/2)");
  std::vector<double> shifts;
  for (int m = 0; m < k / 2; ++m) {
    const double s = (k + n - 1 - 2.0 * m) / 2.0;
    detail::require_nonresonant(n, s);
    shifts.push_back(s * (n - s));
  }
  for (std::size_t i = 0; i < shifts.size(); ++i)
    for (std::size_t j = i + 1; j < shifts.size(); ++j)
      if (shifts[i] == shifts[j]) throw DegeneracyError("gjms_dtn_probe: repeated shift");
  GJMSDtNProbe p;
  p.k = k;
  p.m_j = m_j;
  p.s = (k + n - 1 - 2.0 * m_j) / 2.0;
  p.table = dtn_table(n, p.s, lmax, grid);
  p.experimental = k != 2;
  return p;
}

}  // namespace tcalc
