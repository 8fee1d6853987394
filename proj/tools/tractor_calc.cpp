#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tractor_calc/acceptance.hpp"

using json = nlohmann::ordered_json;
using namespace tcalc;

namespace {

struct RunConfig {
  std::string verb;
  std::string metric = "flat";
  std::string surface = "ellipsoid";
  std::string sigma = "ball";
  std::string op = "boxk";
  std::string form = "all";
  std::string format = "json";
  std::string input, out, csv, mu;
  int dim = 4, n = 3, k = 2, ell = 2, norm = 1, points = 5, lmax = 20, grid = kDtNDefaultGrid, mj = 0;
  double w = 0.5, radius = 1.0, tol = -1.0;
  std::vector<double> point;
  std::uint64_t seed = 1;
  std::string seed_source = "default";
  std::string config_file;

  double tolerance(double fallback) const { return tol > 0 ? tol : fallback; }

  json echo(double resolved_tol) const {
    json j;
    j["verb"] = verb;
    j["metric"] = metric;
    j["radius"] = radius;
    j["dim"] = dim;
    j["n"] = n;
    j["k"] = k;
    j["ell"] = ell;
    j["w"] = w;
    j["surface"] = surface;
    j["sigma"] = sigma;
    j["norm"] = norm;
    j["op"] = op;
    j["form"] = form;
    j["point"] = point;
    j["points"] = points;
    j["lmax"] = lmax;
    j["grid"] = grid;
    j["mj"] = mj;
    j["mu"] = mu;
    j["input"] = input;
    j["tol"] = resolved_tol;
    j["seed"] = seed;
    j["seed_source"] = seed_source;
    j["format"] = format;
    j["out"] = out;
    j["csv"] = csv;
    j["config_file"] = config_file;
    return j;
  }
};

struct Report {
  json body;
  double tol = 0.0;
  json failures = json::array();
  std::string csv;

  void check(const std::string& what, double value, double bound) {
    if (!(value <= bound)) failures.push_back({{"check", what}, {"value", value}, {"bound", bound}});
  }
};

json slots(const TractorValue& t) { return t.slots(); }

std::vector<Point> sample_points(const RunConfig& c, const Chart& chart) {
  if (!c.point.empty()) {
    if (static_cast<int>(c.point.size()) != chart.dim)
      throw ArgumentError("--point has " + std::to_string(c.point.size()) + " coordinates, chart needs " +
                          std::to_string(chart.dim));
    chart.require_valid(c.point);
    return {c.point};
  }
  return PointSampler(chart, c.seed).take(c.points);
}

std::string csv_row(const std::vector<double>& v) {
  std::ostringstream o;
  o.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << v[i];
  o << '\n';
  return o.str();
}

std::string coord_header(int d) {
  std::string h;
  for (int i = 1; i <= d; ++i) h += "y" + std::to_string(i) + ",";
  return h;
}

// ---------------------------------------------------------------- verbs

void run_curvature(const RunConfig& c, Report& r) {
  r.tol = c.tolerance(0.0);
  auto g = metric_by_name(c.metric, c.dim, c.radius);
  json pts = json::array();
  r.csv = coord_header(c.dim) + "Sc,J,W_max\n";
  for (const auto& p : sample_points(c, g.chart)) {
    auto cp = curvature_pack(g, p);
    pts.push_back({{"point", p},
                   {"Gamma", cp.Gamma},
                   {"R", cp.R},
                   {"Ric", cp.Ric},
                   {"Sc", cp.Sc},
                   {"P", cp.P},
                   {"J", cp.J},
                   {"W", cp.W}});
    auto row = p;
    row.insert(row.end(), {cp.Sc, cp.J, detail::max_abs(cp.W)});
    r.csv += csv_row(row);
  }
  r.body["metric"] = {{"family", c.metric}, {"d", c.dim}, {"chart", g.chart.description}};
  r.body["points"] = pts;
}

void run_boundary_report(const RunConfig& c, Report& r) {
  r.tol = c.tolerance(0.0);
  auto g = metric_by_name(c.metric, c.dim, c.radius);
  auto s = surface_by_name(c.surface, g);
  std::vector<Point> pts;
  if (!c.point.empty()) {
    s.require_on(c.point);
    pts = {c.point};
  } else {
    pts = s.sample(c.seed, c.points);
  }
  auto u = probe_density();
  json out = json::array();
  r.csv = coord_header(c.dim) + "H,tracefree_II,tangential_dN";
  for (int l = 0; l <= c.ell; ++l) r.csv += ",delta_" + std::to_string(l);
  r.csv += "\n";
  for (const auto& p : pts) {
    auto umb = umbilicity_defect(s, p);
    std::vector<double> deltas;
    for (int l = 0; l <= c.ell; ++l) deltas.push_back(delta_ell(s, u, c.w, p, l));
    out.push_back({{"point", p},
                   {"H", mean_curvature(s, p)},
                   {"N_components", slots(normal_tractor(s, p))},
                   {"umbilic_defect", {{"tracefree_II", umb.tracefree_II}, {"tangential_dN", umb.tangential_dN}}},
                   {"delta_ell_values", deltas}});
    auto row = p;
    row.insert(row.end(), {umb.H, umb.tracefree_II, umb.tangential_dN});
    row.insert(row.end(), deltas.begin(), deltas.end());
    r.csv += csv_row(row);
  }
  r.body["surface"] = s.description;
  r.body["density"] = {{"field", u.description()}, {"weight", c.w}};
  r.body["points"] = out;
}

ScalarJetField sigma_by_name(const std::string& name) {
  if (name == "ball") return ball_defining_density();
  if (name == "scaled-ball") return 2.0 * ball_defining_density();
  if (name == "one") return ScalarJetField::constant(1.0);
  if (name == "round")
    return ScalarJetField([](std::span<const Jet> y) {
      Jet r = detail::radius_squared(y);
      return (1.0 - r) / (1.0 + r);
    }, "(1-|y|^2)/(1+|y|^2)");
  if (name == "rough")
    return ball_defining_density() + 0.1 * ScalarJetField::radius_squared() * ScalarJetField::radius_squared();
  throw ArgumentError("unknown sigma '" + name + "' (ball, scaled-ball, one, round, rough)");
}

void run_check_ae(const RunConfig& c, Report& r) {
  r.tol = c.tolerance(kAETolerance);
  auto g = metric_by_name(c.metric, c.dim, c.radius);
  auto sigma = sigma_by_name(c.sigma);
  auto ae = build_I(sigma, g, c.seed);
  const bool bounded = c.sigma != "one";
  auto interior = bounded ? Chart::euclidean(c.dim, "unit ball", 1.0, 1.0) : g.chart;
  double res = 0, par = 0;
  for (const auto& p : sample_points(c, interior)) {
    res = std::max(res, ae_residual(sigma, g, p).max_abs);
    par = std::max(par, parallel_defect(ae, p));
  }
  r.body["sigma"] = sigma.description();
  r.body["residual_max"] = std::max(res, ae.residual_max);
  r.body["parallel_defect_max"] = par;
  r.body["I_norm2"] = ae.I_norm2;
  r.body["I_norm2_spread"] = ae.I_norm2_spread;
  r.body["almost_einstein"] = ae.almost_einstein;
  r.body["warnings"] = ae.warnings;
  r.check("residual_max", std::max(res, ae.residual_max), r.tol);
  if (!ae.almost_einstein) {
    r.body["class"] = nullptr;
    r.body["pe"] = nullptr;
    return;
  }
  auto cl = classify(ae, c.seed);
  r.body["class"] = {{"sign", to_string(cl.sign)},
                     {"branch", cl.branch},
                     {"zero_set", cl.zero_set},
                     {"zero_samples", cl.zero_samples.size()}};
  try {
    auto pe = pe_check(ae, interior, c.seed);
    r.body["pe"] = {{"is_pe", pe.is_pe},
                    {"I_norm2", pe.I_norm2},
                    {"einstein_residual", pe.einstein_residual},
                    {"special_defining", pe.special_defining},
                    {"hint", pe.hint}};
  } catch (const BoundaryError& e) {
    r.body["pe"] = {{"is_pe", false}, {"hint", e.what()}};
  }
}

void run_model(const RunConfig& c, Report& r) {
  r.tol = c.tolerance(1e-9);
  auto cone = ConeChart::standard(c.dim);
  const int d = c.dim;
  Eigen::VectorXd I;
  double lambda = 0;
  if (c.norm == 1) {
    I = ball_I(cone.form);
    lambda = -(d - 1);
  } else if (c.norm == -1) {
    I = sphere_I(cone.form, 0.4);
    lambda = d - 1;
  } else if (c.norm == 0) {
    Point z(d, 0.0);
    z[0] = 0.5;
    I = null_I(cone, z);
  } else {
    throw ArgumentError("--norm takes +1, -1 or 0");
  }
  auto m = section_metric(cone, I);
  auto t = descend_tractor(cone, I);
  auto ball = hyperbolic_ball_metric(d);
  const Chart& chart = c.norm == 1 ? ball.chart : m.chart;
  json pts = json::array();
  double einstein = 0, cap = 0, par = 0;
  for (const auto& p : sample_points(c, chart)) {
    if (!m.chart.valid(p)) continue;
    json e{{"point", p}, {"metric", m.values(p)}, {"I", slots(t.value(p))}};
    const double ed = einstein_defect(m, p, lambda);
    einstein = std::max(einstein, ed);
    par = std::max(par, t.parallel_defect(p));
    e["einstein_defect"] = ed;
    if (c.norm == 1) {
      auto a = cap_metric(cone, I, p);
      auto b = ball.values(p);
      double dm = 0, sc = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dm = std::max(dm, std::abs(a[i] - b[i]));
        sc = std::max(sc, std::abs(b[i]));
      }
      e["cap_vs_ball"] = dm / std::max(1.0, sc);
      cap = std::max(cap, dm / std::max(1.0, sc));
    }
    pts.push_back(e);
  }
  r.body["I_ambient"] = std::vector<double>(I.data(), I.data() + I.size());
  r.body["I_norm2_H"] = cone.form(I, I);
  r.body["branch"] = c.norm == 1 ? "hyperbolic cap" : c.norm == -1 ? "round" : "flat";
  r.body["einstein_constant"] = lambda;
  r.body["samples"] = pts;
  r.body["residuals"] = {{"einstein_defect", einstein}, {"parallel_defect", par}};
  r.check("einstein_defect", einstein, r.tol);
  r.check("parallel_defect", par, r.tol);
  if (c.norm == 1) {
    r.body["residuals"]["cap_vs_ball"] = cap;
    r.check("cap_vs_ball", cap, r.tol);
  }
}

void run_invariance(const RunConfig& c, Report& r, const std::string& op) {
  r.tol = c.tolerance(1e-8);
  const int k = op == "delta_ell" ? c.ell : c.k;
  auto rep = check_invariance(op, c.dim, k, c.w, c.seed, c.points, c.metric);
  r.body["op"] = rep.op;
  r.body["k"] = rep.k;
  r.body["d"] = rep.d;
  r.body["w"] = rep.w;
  r.body["w_out"] = rep.w_out;
  r.body["scale_pair"] = {{"g", rep.base}, {"g_hat", "e^{2 omega} g"}, {"omega", rep.omega}};
  r.body["max_rel_err"] = rep.max_rel_err;
  json pts = json::array();
  r.csv = coord_header(c.dim) + "value,rescaled,rel_err\n";
  for (const auto& s : rep.samples) {
    pts.push_back({{"point", s.point}, {"value", s.value}, {"rescaled", s.rescaled}, {"rel_err", s.rel_err}});
    auto row = s.point;
    row.insert(row.end(), {s.value, s.rescaled, s.rel_err});
    r.csv += csv_row(row);
  }
  r.body["points"] = pts;
  r.check("max_rel_err", rep.max_rel_err, r.tol);
}

void run_gjms(const RunConfig& c, Report& r) {
  r.tol = c.tolerance(1e-8);
  const int d = c.n + 1;
  auto spec = GJMSSpec::make(c.k, d);
  json lam = json::array(), s = json::array();
  for (auto& v : spec.lambda) lam.push_back(to_string(v));
  for (auto& v : spec.s) s.push_back(to_string(v));
  r.body["k"] = c.k;
  r.body["n"] = c.n;
  r.body["lambda"] = lam;
  r.body["s"] = s;
  r.body["identity_holds"] = spec.identity_holds();
  if (!spec.identity_holds()) r.failures.push_back({{"check", "lambda_{k/2+1-i} = -s_i(n-s_i)"}});
  if (c.form == "exact") return;
  if (c.form != "all" && c.form != "tractor" && c.form != "product" && c.form != "scp")
    throw ArgumentError("--form takes tractor, product, scp, all or exact");

  auto E = EinsteinScale::from(build_I(ball_defining_density(), flat_metric(d)));
  DensityField u{(c.k - d) / 2.0, "flat", gjms_probe_density()};
  json pts = json::array();
  r.csv = coord_header(d) + "tractor,product,scp,max_rel\n";
  double worst = 0;
  for (const auto& p : sample_points(c, E.probe_chart())) {
    double t = NAN, pr = NAN, sc = NAN, mr = NAN;
    const double w_out = -(c.k + d) / 2.0;
    if (c.form == "all") {
      auto a = gjms_compare(E, c.k, u, p);
      t = a.tractor;
      pr = a.product;
      sc = a.scp;
      mr = pairwise_rel(a);
      worst = std::max(worst, mr);
    } else if (c.form == "tractor") {
      t = E.to_gplus(gjms_tractor_form(E, c.k, u, p), w_out, p);
    } else if (c.form == "product") {
      pr = gjms_product_form(E, c.k, E.to_gplus(u), p);
    } else {
      sc = gjms_scp_form(E, c.k, u, p);
    }
    json e{{"point", p}};
    if (!std::isnan(t)) e["tractor"] = t;
    if (!std::isnan(pr)) e["product"] = pr;
    if (!std::isnan(sc)) e["scp"] = sc;
    if (!std::isnan(mr)) e["max_rel"] = mr;
    pts.push_back(e);
    auto row = p;
    row.insert(row.end(), {t, pr, sc, mr});
    r.csv += csv_row(row);
  }
  r.body["trivialisation"] = "g+";
  r.body["points"] = pts;
  if (c.form == "all") {
    r.body["max_rel"] = worst;
    r.check("max_rel", worst, r.tol);
  }
}

Rational parse_rational(const json& v) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const long long a = std::stoll(s, &used);
        if (used == s.size()) return Rational(a);
      } else {
        const long long a = std::stoll(s.substr(0, slash), &used);
        std::size_t used2 = 0;
        const long long b = std::stoll(s.substr(slash + 1), &used2);
        if (used == slash && used2 == s.size() - slash - 1 && b != 0) return Rational(a, b);
      }
    } catch (const std::logic_error&) {
    }
  }
  throw ArgumentError("expected an integer or a \"p/q\" string, got " + v.dump());
}

json fraction_matrix(const RationalMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.n; ++i) {
    json row = json::array();
    for (int j = 0; j < m.n; ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

void run_decompose(const RunConfig& c, Report& r) {
  r.tol = c.tolerance(1e-6);
  json in;
  if (!c.input.empty()) {
    std::ifstream f(c.input);
    if (!f) throw ArgumentError("cannot read --input " + c.input);
    try {
      in = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ArgumentError(std::string("malformed --input: ") + e.what());
    }
  }
  if (!c.mu.empty()) {
    in["mu"] = json::array();
    std::stringstream ss(c.mu);
    for (std::string t; std::getline(ss, t, ',');) in["mu"].push_back(t);
  }
  if (!in.contains("mu")) throw ArgumentError("decompose needs a mu list (--mu or \"mu\" in --input)");
  std::vector<Rational> mu;
  for (const auto& v : in["mu"]) mu.push_back(parse_rational(v));
  json mus = json::array();
  for (auto& m : mu) mus.push_back(to_string(m));
  r.body["mu"] = mus;
  auto q = q_coefficients(mu);
  json qs = json::array();
  for (auto& v : q) qs.push_back(to_string(v));
  r.body["Q"] = qs;

  if (in.contains("matrix")) {
    const auto& rows = in["matrix"];
    const int n = static_cast<int>(rows.size());
    RationalMatrix E(n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n) throw ArgumentError("matrix must be square");
      for (int j = 0; j < n; ++j) E(i, j) = parse_rational(rows[i][j]);
    }
    json projs = json::array();
    bool idem = true;
    std::vector<RationalMatrix> P;
    for (std::size_t i = 0; i < mu.size(); ++i) P.push_back(projector(E, mu, i));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      projs.push_back(fraction_matrix(P[i]));
      if (!(P[i] * P[i] == P[i])) idem = false;
      for (std::size_t j = 0; j < mu.size(); ++j)
        if (j != i && !(P[i] * P[j]).is_zero()) idem = false;
    }
    const bool annihilated = characteristic_product(E, mu).is_zero();
    r.body["projectors"] = projs;
    r.body["identity_defect_zero"] = identity_decomposition_defect(E, mu).is_zero();
    r.body["annihilated"] = annihilated;
    r.body["idempotent_orthogonal"] = idem;
    if (!identity_decomposition_defect(E, mu).is_zero()) r.failures.push_back({{"check", "sum Proj_i = id"}});
    std::vector<double> mud;
    for (auto& m : mu) mud.push_back(to_double(m));
    r.body["float_identity_defect"] = identity_decomposition_check(E.to_double(), mud);
    if (in.contains("vector")) {
      std::vector<Rational> v;
      for (const auto& x : in["vector"]) v.push_back(parse_rational(x));
      if (static_cast<int>(v.size()) != n) throw ArgumentError("vector length must match the matrix");
      json comps = json::array();
      bool null_space = true;
      for (auto& x : characteristic_product(E, mu).apply(v))
        if (x != Rational(0)) null_space = false;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        json ci = json::array();
        for (auto& x : P[i].apply(v)) ci.push_back(to_string(x));
        comps.push_back(ci);
      }
      r.body["in_null_space"] = null_space;
      r.body["components"] = comps;
    }
    return;
  }
  if (!in.contains("field")) throw ArgumentError("decompose input needs \"matrix\" or \"field\"");
  const auto& f = in["field"];
  const int D = f.value("dim", 4);
  std::vector<double> mud;
  for (auto& m : mu) mud.push_back(to_double(m));
  FieldFactorSystem F{hyperbolic_ball_metric(D), mud};
  std::vector<ScalarJetField> truth(mu.size(), ScalarJetField::constant(0.0));
  ScalarJetField u = ScalarJetField::constant(0.0);
  for (const auto& m : f.at("modes")) {
    const std::size_t i = m.at("mu_index").get<std::size_t>();
    if (i >= mu.size()) throw ArgumentError("mode mu_index out of range");
    auto e = m.value("coefficient", 1.0) * hyperbolic_eigenfunction(D, m.at("l").get<int>(), mud[i]).field();
    truth[i] = truth[i] + e;
    u = u + e;
  }
  json pts = json::array();
  double rec = 0;
  for (const auto& p : sample_points(c, F.metric.chart)) {
    auto s = project_components(F, u, p);
    double e = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) e = std::max(e, std::abs(s.components[i] - truth[i].value(p)));
    rec = std::max(rec, e);
    pts.push_back({{"point", p},
                   {"value", s.value},
                   {"components", s.components},
                   {"recovery_error", e},
                   {"eigen_residual", s.eigen_residual},
                   {"sum_residual", s.sum_residual},
                   {"idempotence", s.idempotence},
                   {"cross", s.cross},
                   {"in_null_space", s.in_null_space}});
  }
  r.body["points"] = pts;
  r.body["recovery_error"] = rec;
  r.check("recovery_error", rec, r.tol);
}

void run_dtn(const RunConfig& c, Report& r) {
  r.tol = c.tolerance(1e-6);
  RadialGrid grid;
  grid.grid = c.grid;
  DtNTable T;
  bool experimental = false;
  if (c.k == 2) {
    T = dtn_table_k2(c.n, c.lmax, grid);
  } else {
    auto probe = gjms_dtn_probe(c.k, c.mj, c.n, c.lmax, grid);
    T = probe.table;
    experimental = probe.experimental;
    r.body["m_j"] = c.mj;
  }
  double fit = 0, ode = 0;
  for (const auto& e : T.entries) {
    fit = std::max(fit, e.fit_residual);
    ode = std::max(ode, e.ode_residual);
  }
  r.body["n"] = T.n;
  r.body["k"] = c.k;
  r.body["s"] = T.s;
  r.body["lmax"] = T.lmax();
  r.body["grid"] = T.grid.grid;
  r.body["ode_tolerance"] = T.grid.tolerance();
  r.body["x_min"] = T.grid.x_min;
  r.body["experimental"] = experimental;
  r.body["monotone"] = T.monotone();
  if (T.lmax() >= 4) {
    const int l1 = T.lmax(), l0 = std::max(1, l1 - 5);
    r.body["principal_ratio_spread"] = {{"l0", l0}, {"l1", l1}, {"value", T.principal_ratio_spread(l0, l1)}};
  }
  r.body["max_fit_residual"] = fit;
  r.body["max_ode_residual"] = ode;
  json rows = json::array();
  for (const auto& e : T.entries)
    rows.push_back({{"l", e.l}, {"Lambda_l", e.Lambda}, {"fit_residual", e.fit_residual}});
  r.body["entries"] = rows;
  r.csv = T.csv();
  r.check("max_fit_residual", fit, r.tol);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ArgumentError("cannot write " + path);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Numerical conformal tractor calculus on model geometries"};
  app.set_config("--config", "", "plain key = value file; flags override it");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--metric", c.metric, "flat | sphere | hyperbolic")->capture_default_str();
  app.add_option("--radius", c.radius, "sphere radius")->capture_default_str();
  app.add_option("--dim", c.dim, "manifold dimension d")->capture_default_str();
  app.add_option("--n", c.n, "boundary dimension n")->capture_default_str();
  app.add_option("--k", c.k, "operator order")->capture_default_str();
  app.add_option("--ell", c.ell, "boundary operator index")->capture_default_str();
  app.add_option("--w", c.w, "density weight")->capture_default_str();
  app.add_option("--surface", c.surface, "sphere | ellipsoid | plane")->capture_default_str();
  app.add_option("--sigma", c.sigma, "ball | scaled-ball | one | round | rough")->capture_default_str();
  app.add_option("--norm", c.norm, "|I|^2_H in {+1, -1, 0}")->capture_default_str();
  app.add_option("--op", c.op, "yamabe | boxk | thomas_D | robin | delta_ell")->capture_default_str();
  app.add_option("--form", c.form, "tractor | product | scp | all | exact")->capture_default_str();
  app.add_option("--point", c.point, "single point, comma separated")->delimiter(',');
  app.add_option("--points", c.points, "number of seeded sample points")->capture_default_str();
  app.add_option("--lmax", c.lmax, "largest harmonic degree")->capture_default_str();
  app.add_option("--grid", c.grid, "radial grid parameter")->capture_default_str();
  app.add_option("--mj", c.mj, "factor index for k = 4 DtN probes")->capture_default_str();
  app.add_option("--mu", c.mu, "shift list, e.g. 1,3/2");
  app.add_option("--input", c.input, "JSON input for decompose");
  app.add_option("--tol", c.tol, "tolerance override");
  auto* seed = app.add_option("--seed", c.seed, "sampling seed (default: $TRACTOR_CALC_SEED, else 1)");
  app.add_option("--format", c.format, "json | csv: what goes to stdout")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", c.out, "JSON report path");
  app.add_option("--csv", c.csv, "CSV table path");

  const std::vector<std::pair<std::string, std::string>> verbs{
      {"curvature", "Christoffel symbols, curvature, Schouten and Weyl tensors"},
      {"boundary-report", "mean curvature, normal tractor, umbilicity and delta_l on a hypersurface"},
      {"check-ae", "almost-Einstein and Poincare-Einstein checks for a scale sigma"},
      {"model", "null-cone model: section metric and descended parallel tractor"},
      {"boxk-apply", "conformal Laplacian power in two conformally related scales"},
      {"check-invariance", "conformal invariance of an operator across two scales"},
      {"gjms-factor", "GJMS factorisation on the ball: tractor, product and scattering forms"},
      {"decompose", "null-space decomposition of a commuting factor system"},
      {"dtn", "Dirichlet-to-Neumann table on the hyperbolic ball"}};
  for (const auto& [name, help] : verbs) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  c.verb = app.get_subcommands().front()->get_name();
  if (auto* cfg = app.get_config_ptr(); cfg && cfg->count() > 0) c.config_file = cfg->as<std::string>();
  if (seed->count() > 0) {
    c.seed_source = "flag or config";
  } else if (const char* env = std::getenv("TRACTOR_CALC_SEED")) {
    try {
      c.seed = std::stoull(env);
      c.seed_source = "TRACTOR_CALC_SEED";
    } catch (const std::logic_error&) {
      std::cerr << "TRACTOR_CALC_SEED is not an unsigned integer: " << env << "\n";
      return 1;
    }
  }

  Report r;
  try {
    if (c.points < 1) throw ArgumentError("--points must be positive");
    if (c.verb == "curvature") run_curvature(c, r);
    else if (c.verb == "boundary-report") run_boundary_report(c, r);
    else if (c.verb == "check-ae") run_check_ae(c, r);
    else if (c.verb == "model") run_model(c, r);
    else if (c.verb == "boxk-apply") run_invariance(c, r, "boxk");
    else if (c.verb == "check-invariance") run_invariance(c, r, c.op);
    else if (c.verb == "gjms-factor") run_gjms(c, r);
    else if (c.verb == "decompose") run_decompose(c, r);
    else run_dtn(c, r);
  } catch (const Error& e) {
    std::cerr << c.verb << ": " << e.what() << "\n";
    return 1;
  }

  json report;
  report["verb"] = c.verb;
  report["config"] = c.echo(r.tol);
  for (auto& [key, v] : r.body.items()) report[key] = v;
  report["status"] = r.failures.empty() ? "ok" : "tolerance_failure";
  report["failures"] = r.failures;
  const std::string text = report.dump(2) + "\n";
  try {
    if (c.format == "csv") {
      if (r.csv.empty()) throw ArgumentError(c.verb + " has no CSV table");
      write_text(c.csv.empty() ? "-" : c.csv, r.csv);
      if (!c.out.empty()) write_text(c.out, text);
    } else {
      write_text(c.out, text);
      if (!c.csv.empty() && !r.csv.empty()) write_text(c.csv, r.csv);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  if (!r.failures.empty()) {
    std::cerr << c.verb << ": tolerance failure\n";
    for (const auto& f : r.failures) std::cerr << "  " << f.dump() << "\n";
    return 2;
  }
  return 0;
}
