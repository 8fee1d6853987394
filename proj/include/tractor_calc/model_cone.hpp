#pragma once

// Flat model: R^{d+2} with a signature (d+1,1) form H, its forward null cone
// N_+ over the round S^d, sections cut out by a constant I, and the objects
// they descend to on the sphere.
//
// Ambient coordinates follow the tractor frame: slot 0 pairs with slot d+1
// (H_{0,d+1} = 1), slots 1..d form an identity block. A constant I is stored
// as an ambient vector; sigma = H(I, X).

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "tractor_calc/almost_einstein.hpp"
#include "tractor_calc/hypersurface.hpp"
#include "tractor_calc/tractor.hpp"

namespace tcalc {

struct AmbientForm {
  int d = 0;
  Eigen::MatrixXd H;

  static AmbientForm standard(int d) {
    if (d < 2) throw ArgumentError("ambient form needs d >= 2");
    AmbientForm f{d, Eigen::MatrixXd::Zero(d + 2, d + 2)};
    f.H(0, d + 1) = f.H(d + 1, 0) = 1.0;
    for (int i = 1; i <= d; ++i) f.H(i, i) = 1.0;
    return f;
  }

  int dimension() const { return d + 2; }
  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(H * b); }

  // (positive, negative) eigenvalue counts.
  std::pair<int, int> signature() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    int pos = 0, neg = 0;
    for (int i = 0; i < H.rows(); ++i) {
      const double l = es.eigenvalues()(i);
      if (l > 1e-12) ++pos;
      if (l < -1e-12) ++neg;
    }
    return {pos, neg};
  }
  void verify() const {
    auto [p, n] = signature();
    if (p != d + 1 || n != 1)
      throw ArgumentError("ambient form has signature (" + std::to_string(p) + "," + std::to_string(n) +
                          "), expected (" + std::to_string(d + 1) + ",1)");
  }

  // T' timelike and E spacelike, both unit; e_i the identity block.
  Eigen::VectorXd timelike() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 2);
    v(0) = M_SQRT1_2;
    v(d + 1) = -M_SQRT1_2;
    return v;
  }
  Eigen::VectorXd polar() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 2);
    v(0) = v(d + 1) = M_SQRT1_2;
    return v;
  }
  Eigen::VectorXd basis(int i) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 2);
    v(i) = 1.0;
    return v;
  }
};

inline Jet ambient_pair(const AmbientForm& f, const Eigen::VectorXd& I, std::span<const Jet> Z) {
  Eigen::VectorXd HI = f.H * I;
  Jet acc = Z[0] * HI(0);
  for (int A = 1; A < f.dimension(); ++A) acc += Z[A] * HI(A);
  return acc;
}

// N_+ over stereographic coordinates on S^d. The round section is
// X(y) = T' + u(y) with u on the unit sphere of span{E, e_i}:
//   u_0 = s (|y|^2-1)/(1+|y|^2), u_i = 2 y_i/(1+|y|^2),
// s = +1 for the main chart (bad point u = E) and s = -1 for the antipodal one.
// Its companion null vector is Y = (u - T')/2, with H(X,Y) = 1, H(Y, dX) = 0.
struct ConeChart {
  AmbientForm form;
  int pole = +1;

  static ConeChart standard(int d, int pole = +1) {
    auto f = AmbientForm::standard(d);
    f.verify();
    return {f, pole};
  }

  int dim() const { return form.d; }

  std::vector<Jet> sphere_point(std::span<const Jet> y) const {
    const int d = dim();
    Jet r2 = detail::radius_squared(y);
    Jet inv = 1.0 / (1.0 + r2);
    Jet u0 = (r2 - 1.0) * inv * static_cast<double>(pole);
    Eigen::VectorXd E = form.polar();
    std::vector<Jet> u;
    for (int A = 0; A < d + 2; ++A) u.push_back(u0 * E(A));
    for (int i = 0; i < d; ++i) u[1 + i] = y[i] * inv * 2.0;
    return u;
  }
  std::vector<Jet> X(std::span<const Jet> y) const {
    auto u = sphere_point(y);
    Eigen::VectorXd T = form.timelike();
    for (int A = 0; A < dim() + 2; ++A) u[A] += T(A);
    return u;
  }
  std::vector<Jet> Y(std::span<const Jet> y) const {
    auto u = sphere_point(y);
    Eigen::VectorXd T = form.timelike();
    for (int A = 0; A < dim() + 2; ++A) u[A] = (u[A] - T(A)) * 0.5;
    return u;
  }
  // Section whose induced metric is delta: X_flat = (1+|y|^2)/2 X (main chart).
  std::vector<Jet> X_flat(std::span<const Jet> y) const {
    auto x = X(y);
    Jet f = (1.0 + detail::radius_squared(y)) * 0.5;
    for (auto& c : x) c = c * f;
    return x;
  }

  Eigen::VectorXd lift(std::span<const double> p) const {
    auto y = seed_coordinates(p, 0);
    auto x = X(y);
    Eigen::VectorXd v(dim() + 2);
    for (int A = 0; A < dim() + 2; ++A) v(A) = x[A].value();
    return v;
  }

  // Ray through Z (forward, null) back to chart coordinates.
  Point to_chart(const Eigen::VectorXd& Z) const {
    const double t = -form(Z, form.timelike());
    if (!(t > 0)) throw DomainError("vector is not in the forward cone");
    if (std::abs(form(Z, Z)) > 1e-10 * t * t) throw DomainError("vector is not null");
    const double u0 = form(Z, form.polar()) / t;
    const double den = 1.0 - pole * u0;
    if (den < 1e-12) throw DomainError("ray hits the bad point of the stereographic chart");
    Point y(dim());
    for (int i = 0; i < dim(); ++i) y[i] = Z(1 + i) / t / den;
    return y;
  }

  MetricModel metric() const {
    auto m = sphere_metric(dim());
    if (pole < 0) {
      m.scale = "round(1)";
      m.chart.description = "antipodal " + m.chart.description;
    }
    return m;
  }
};

// H(dX_i, dX_j) for a section: the metric 𝐠 pushed down.
inline std::vector<double> descended_metric(const ConeChart& c, std::span<const double> p, bool flat = false) {
  const int d = c.dim();
  auto y = seed_coordinates(p, 1);
  auto x = flat ? c.X_flat(y) : c.X(y);
  std::vector<double> g(d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd a(d + 2), b(d + 2);
      for (int A = 0; A < d + 2; ++A) {
        a(A) = x[A].coefficient(1 + i);
        b(A) = x[A].coefficient(1 + j);
      }
      g[i * d + j] = c.form(a, b);
    }
  return g;
}

// Homogeneous function on the cone, evaluable on ambient jets.
struct ConeFunction {
  std::function<Jet(std::span<const Jet>)> fn;
  double degree = 0.0;
};

// Representative in the round scale of the density a degree-w function defines.
inline DensityField descend_density(const ConeChart& c, const ConeFunction& F, bool flat = false) {
  auto fn = F.fn;
  ScalarJetField rep([c, fn, flat](std::span<const Jet> y) { return fn(flat ? c.X_flat(y) : c.X(y)); },
                     flat ? "F(X_flat)" : "F(X)");
  return {F.degree, flat ? "flat" : c.metric().scale, rep};
}

inline ScalarJetField section_sigma(const ConeChart& c, const Eigen::VectorXd& I) {
  return ScalarJetField([c, I](std::span<const Jet> y) { return ambient_pair(c.form, I, c.X(y)); }, "H(I,X)");
}

// sigma^{-2} g_round on {sigma > 0}: the metric H induces on {H(I,Z) = 1}.
inline MetricModel section_metric(const ConeChart& c, const Eigen::VectorXd& I) {
  auto round = c.metric();
  auto sigma = section_sigma(c, I);
  MetricModel m;
  m.chart = round.chart;
  m.chart.validity_radius = INFINITY;
  m.chart.domain = [sigma](std::span<const double> p) { return sigma.value(p) > 1e-3; };
  m.chart.description = "cap {H(I,X) > 0} in " + round.chart.description;
  auto comps = round.components;
  m.components = [comps, sigma](std::span<const Jet> y) {
    auto g = comps(y);
    Jet f = pow(sigma(y), -2.0);
    for (auto& e : g) e = e * f;
    return g;
  };
  m.family = MetricFamily::cap_pullback;
  m.scale = "cap";
  m.parameter = c.form(I, I);
  return m;
}

inline void require_unit(const AmbientForm& f, const Eigen::VectorXd& I, double target, const char* what) {
  const double n2 = f(I, I);
  if (std::abs(n2 - target) > 1e-12 * std::max(1.0, I.squaredNorm()))
    throw BranchError(std::string(what) + ": |I|^2_H = " + std::to_string(n2) + ", needs " + std::to_string(target));
}

// Induced metric at a cap point; |I|^2_H = 1.
inline std::vector<double> cap_metric(const ConeChart& c, const Eigen::VectorXd& I, std::span<const double> p) {
  require_unit(c.form, I, 1.0, "cap_metric");
  const double s = section_sigma(c, I).value(p);
  if (!(s > 0))
    throw DomainError("point is outside the cap: its null ray meets H(I,Z)=1 only at infinity or in the past cone");
  return section_metric(c, I).values(p);
}

// Cap centre for |I|^2 = 1 on the main chart: I = -E gives sigma = (1-|y|^2)/(1+|y|^2)
// and g_+ = 4 (1-|y|^2)^{-2} delta, the Poincare ball with the identity chart map.
inline Eigen::VectorXd ball_I(const AmbientForm& f) { return -f.polar(); }
// |I|^2 = -1 with sigma = cosh b + sinh b u_0 > 0; b = 0 is the round metric.
inline Eigen::VectorXd sphere_I(const AmbientForm& f, double boost = 0.0) {
  return std::cosh(boost) * (-f.timelike()) + std::sinh(boost) * f.polar();
}
// |I|^2 = 0 with sigma = 1 - <w, u>, vanishing only at the sphere point w.
inline Eigen::VectorXd null_I(const ConeChart& c, std::span<const double> zero_point) {
  Eigen::VectorXd u = c.lift(zero_point) - c.form.timelike();
  return -(c.form.timelike() + u);
}

struct DescendedTractor {
  ConeChart chart;
  Eigen::VectorXd I;
  ScalarJetField sigma;

  // (sigma, mu_i, rho) = (H(I,X), H(I,dX_i), H(I,Y)) in the round scale.
  LocalField at(std::span<const double> p, int order) const {
    const int d = chart.dim();
    auto y = seed_coordinates(p, order);
    LocalField f(d, 0, 1, 0.0);
    f.c[0] = ambient_pair(chart.form, I, chart.X(y));
    for (int i = 0; i < d; ++i) f.c[1 + i] = f.c[0].derivative(i);
    f.c[d + 1] = ambient_pair(chart.form, I, chart.Y(y));
    return f;
  }
  TractorValue value(std::span<const double> p) const {
    auto geo = LocalGeometry::at(chart.metric(), p, 1, CurvatureLevel::none);
    const int d = chart.dim();
    std::vector<double> gi(d * d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) gi[a * d + b] = geo.ginv(a, b).value();
    return tractor_value(at(p, 1), gi, chart.metric().scale, Point(p.begin(), p.end()));
  }
  double parallel_defect(std::span<const double> p) const {
    auto geo = LocalGeometry::at(chart.metric(), p, 3, CurvatureLevel::ricci);
    return positive_norm(geo, tractor_connection(geo, at(p, 3)));
  }
  AEStructure structure(std::uint64_t seed = 1) const { return build_I(sigma, chart.metric(), seed); }
};

inline DescendedTractor descend_tractor(const ConeChart& c, const Eigen::VectorXd& I) {
  if (I.size() != c.dim() + 2) throw ArgumentError("descend_tractor: I has the wrong length");
  if (I.norm() == 0.0) throw DegeneracyError("descend_tractor: I = 0");
  return {c, I, section_sigma(c, I)};
}

// Zero set of sigma for |I|^2_H = 1: a round S^{d-1} in S^d.
inline Hypersurface equator_boundary(const ConeChart& c, const Eigen::VectorXd& I) {
  require_unit(c.form, I, 1.0, "equator_boundary");
  Hypersurface s;
  s.x = section_sigma(c, I);
  s.orientation = +1;
  s.metric = c.metric();
  s.description = "equator {H(I,X) = 0}";
  return s;
}

// Geodesic distance on the cap: Z = X/sigma lies on {H(I,Z) = 1}, and
// Z - I on the unit hyperboloid of I^perp, so cosh d = 1 - H(Z_a, Z_b).
inline double cap_distance(const ConeChart& c, const Eigen::VectorXd& I, std::span<const double> a,
                           std::span<const double> b) {
  Eigen::VectorXd Za = c.lift(a), Zb = c.lift(b);
  Za /= c.form(I, Za);
  Zb /= c.form(I, Zb);
  return std::acosh(std::max(1.0, 1.0 - c.form(Za, Zb)));
}

// x -> u H(v,x) - v H(u,x)
inline Eigen::MatrixXd h_generator(const AmbientForm& f, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return u * (f.H * v).transpose() - v * (f.H * u).transpose();
}

inline Eigen::MatrixXd rotation_map(const AmbientForm& f, int i, int j, double angle) {
  Eigen::MatrixXd A = angle * h_generator(f, f.basis(i), f.basis(j));
  return A.exp();
}

// Scales the slot-0 (Y) and slot-(d+1) (X) directions by e^{t}, e^{-t}.
inline Eigen::MatrixXd boost_map(const AmbientForm& f, double t) {
  Eigen::MatrixXd A = t * h_generator(f, f.basis(0), f.basis(f.d + 1));
  return A.exp();
}

// exp of a random generator built from two vectors H-orthogonal to I (|I|^2 != 0).
inline Eigen::MatrixXd random_isotropy_map(const AmbientForm& f, const Eigen::VectorXd& I, std::uint64_t seed,
                                           double scale = 0.7) {
  const double n2 = f(I, I);
  if (std::abs(n2) < 1e-12) throw BranchError("random_isotropy_map needs non-null I");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto draw = [&] {
    Eigen::VectorXd v(f.dimension());
    for (int A = 0; A < f.dimension(); ++A) v(A) = g(rng);
    return Eigen::VectorXd(v - f(v, I) / n2 * I);
  };
  Eigen::VectorXd u = draw(), v = draw();
  Eigen::MatrixXd A = scale * h_generator(f, u, v) / (u.norm() * v.norm());
  return A.exp();
}

struct IsotropySample {
  double h_defect = 0.0;
  bool fixes_I = false;
  double sigma_change = 0.0;     // max |H(I, L Z) - 1| over sampled cap points
  double distance_defect = 0.0;  // max relative change of cap distance
  int pairs = 0;
  bool isotropy_ok = false;
};

struct IsotropyReport {
  std::vector<IsotropySample> samples;
  bool consistent = true;  // every I-fixing map preserved distances
};

inline constexpr double kIsotropyTolerance = 1e-9;

inline IsotropyReport isotropy_spotcheck(const ConeChart& c, const Eigen::VectorXd& I,
                                         const std::vector<Eigen::MatrixXd>& maps, std::uint64_t seed = 1,
                                         int pairs = 20) {
  require_unit(c.form, I, 1.0, "isotropy_spotcheck");
  const auto& H = c.form.H;
  for (const auto& L : maps) {
    const double defect = (L.transpose() * H * L - H).cwiseAbs().maxCoeff();
    if (defect > 1e-12 * std::max(1.0, L.squaredNorm()))
      throw ArgumentError("isotropy_spotcheck: sample map does not preserve H (defect " + std::to_string(defect) + ")");
  }
  auto cap = section_metric(c, I);
  auto sigma = section_sigma(c, I);
  PointSampler sampler(cap.chart, seed);
  std::vector<Point> pts = sampler.take(2 * pairs);
  IsotropyReport rep;
  for (const auto& L : maps) {
    IsotropySample s;
    s.h_defect = (L.transpose() * H * L - H).cwiseAbs().maxCoeff();
    s.fixes_I = (L * I - I).norm() <= 1e-12 * std::max(1.0, I.norm());
    std::vector<Point> moved;
    for (const auto& p : pts) {
      Eigen::VectorXd Z = c.lift(p) / sigma.value(p);
      Eigen::VectorXd LZ = L * Z;
      s.sigma_change = std::max(s.sigma_change, std::abs(c.form(I, LZ) - 1.0));
      try {
        moved.push_back(c.to_chart(LZ));
      } catch (const DomainError&) {
        moved.push_back({});
      }
    }
    for (int k = 0; k < pairs; ++k) {
      const auto &a = moved[2 * k], &b = moved[2 * k + 1];
      if (a.empty() || b.empty() || !(sigma.value(a) > 0) || !(sigma.value(b) > 0)) {
        s.distance_defect = INFINITY;
        continue;
      }
      const double d0 = cap_distance(c, I, pts[2 * k], pts[2 * k + 1]);
      const double d1 = cap_distance(c, I, a, b);
      s.distance_defect = std::max(s.distance_defect, std::abs(d1 - d0) / std::max(1.0, d0));
      ++s.pairs;
    }
    s.isotropy_ok = s.fixes_I && s.distance_defect <= kIsotropyTolerance && s.sigma_change <= kIsotropyTolerance;
    if (s.fixes_I && !s.isotropy_ok) rep.consistent = false;
    rep.samples.push_back(s);
  }
  return rep;
}

}  // namespace tcalc
