// conelab: command-line experiments on critical exponents in cones.
//
// Exit codes: 0 pass, 1 certificate fail, 2 usage error, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conelab/angular_spectral.hpp"
#include "conelab/certificates.hpp"
#include "conelab/cone_grid.hpp"
#include "conelab/errors.hpp"
#include "conelab/exponents.hpp"
#include "conelab/minimal_solutions.hpp"
#include "conelab/radial_ode.hpp"
#include "conelab/solver.hpp"
#include "conelab/sphere_geometry.hpp"

using namespace conelab;
using nlohmann::json;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

double radians(double deg) { return deg * pi / 180.0; }

struct RunConfig {
  std::string command;
  int dim = 3;
  std::optional<double> cap_deg;
  std::vector<double> band_deg;
  bool full_sphere = false;
  std::string matrix = "id";
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> delta;
  std::optional<double> k;
  std::optional<double> p;
  std::optional<double> c;
  std::optional<double> lb_alpha;
  std::optional<double> eps;
  std::optional<double> inner_cap_deg;
  std::size_t nodes = 0;
  std::size_t K = 8;
  std::uint64_t seed = 1;
  std::string out;
  std::string csv;
  std::optional<double> tol;
  std::string cap_deg_range;
  double r0 = 10.0;
  double r1 = 1e4;
  double rho = 0.0;
  int levels = 3;
  int trials = 0;
  std::vector<double> radii{10.0, 30.0, 90.0};

  AngularDomain domain() const {
    const int chosen = (cap_deg ? 1 : 0) + (band_deg.empty() ? 0 : 1) + (full_sphere ? 1 : 0);
    if (chosen != 1) throw usage_error("domain", "choose exactly one of --cap-deg, --band-deg, --full-sphere");
    if (full_sphere) return AngularDomain::full_sphere(dim);
    if (cap_deg) return AngularDomain::cap(dim, radians(*cap_deg));
    return AngularDomain::band(dim, radians(band_deg[0]), radians(band_deg[1]));
  }

  std::optional<RadialCoefficient> coefficient() const {
    auto need = [](const std::optional<double>& v, const char* flag) {
      if (!v) throw usage_error("missing-flag", std::string("matrix gallery needs ") + flag);
      return *v;
    };
    if (matrix == "id") return std::nullopt;
    if (matrix == "const-d") return RadialCoefficient::constant(need(alpha, "--alpha"), dim);
    if (matrix == "log-d") return RadialCoefficient::log_corrected(need(alpha, "--alpha"), dim);
    if (matrix == "osc-d")
      return RadialCoefficient::oscillating(need(gamma, "--gamma"), need(delta, "--delta"), need(k, "--k"), dim);
    throw usage_error("matrix", "unknown matrix gallery " + matrix);
  }

  MatrixModel matrix_model(double lambda1) const {
    auto c = coefficient();
    if (!c) return MatrixModel::identity();
    return MatrixModel::radial_angular(*c, lambda1);
  }

  double need_p() const {
    if (!p) throw usage_error("missing-flag", "--p is required");
    return *p;
  }

  json to_json() const {
    json j{{"command", command}, {"N", dim}, {"matrix", matrix}, {"K", K}, {"seed", seed}, {"nodes", nodes}};
    if (cap_deg) j["cap_deg"] = *cap_deg;
    if (!band_deg.empty()) j["band_deg"] = band_deg;
    if (full_sphere) j["full_sphere"] = true;
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) j[key] = *v;
    };
    put("alpha", alpha);
    put("gamma", gamma);
    put("delta", delta);
    put("k", k);
    put("p", p);
    put("c", c);
    put("lb_alpha", lb_alpha);
    put("eps", eps);
    put("inner_cap_deg", inner_cap_deg);
    put("tol", tol);
    return j;
  }
};

std::size_t nodes_or(const RunConfig& cfg, std::size_t fallback) { return cfg.nodes ? cfg.nodes : fallback; }

AngularDomain inner_domain(const RunConfig& cfg, const AngularDomain& d) {
  if (cfg.inner_cap_deg) return AngularDomain::cap(cfg.dim, radians(*cfg.inner_cap_deg));
  if (d.kind() == DomainKind::full_sphere) return AngularDomain::cap(cfg.dim, 0.75 * pi);
  return shrink_fraction(d, 0.25);
}

void emit(const RunConfig& cfg, json report) {
  report["schema"] = certificate_schema;
  report["config"] = cfg.to_json();
  const std::string text = report.dump(2);
  if (cfg.out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw usage_error("output", "cannot open " + cfg.out);
    f << text << '\n';
  }
}

template <typename Writer>
void write_side_csv(const std::string& path, Writer&& w) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw usage_error("output", "cannot open " + path);
  w(f);
}

int verdict_code(bool pass) { return pass ? exit_pass : exit_fail; }

int run_eigen(const RunConfig& cfg) {
  const auto d = cfg.domain();
  const auto n = nodes_or(cfg, 2000);
  PotentialSpec spec;
  if (cfg.eps) spec = PotentialSpec::indicator(*cfg.eps, inner_domain(cfg, d));
  const auto est = richardson_principal(d, n, spec);
  const auto op = assemble(d, 2 * n, spec);
  const auto basis = eigen_basis(op, std::min<std::size_t>(cfg.K, op.mesh.size() / 4));
  write_side_csv(cfg.csv, [&](std::ostream& os) { write_csv(os, basis); });
  emit(cfg, {{"domain", d},
             {"potential", spec.tag()},
             {"lambda1", est.lambda},
             {"lambda1_coarse", est.lambda_coarse},
             {"lambda1_fine", est.lambda_fine},
             {"closed_form", est.exact},
             {"nodes", {est.n_coarse, est.n_fine}},
             {"h", {est.h_coarse, est.h_fine}},
             {"eigenvalues_fine", basis.lambda}});
  return exit_pass;
}

int run_pstar(const RunConfig& cfg) {
  const auto d = cfg.domain();
  const auto est = richardson_principal(d, nodes_or(cfg, 2000));
  json report;
  if (auto c = cfg.coefficient()) {
    const auto g = gallery_exponent(*c);
    report = {{"domain", d}, {"lambda1", est.lambda}, {"coefficient", *c}, {"gallery", g}};
    if (g.exact()) report["p_star"] = g.p_low;
  } else {
    const auto r = characteristic_roots(est.lambda, d.dim());
    report = critical_exponent(r, d);
    report["nodes"] = {est.n_coarse, est.n_fine};
  }
  emit(cfg, report);
  return exit_pass;
}

int run_radial(const RunConfig& cfg) {
  const auto c = cfg.coefficient();
  if (!c) throw usage_error("matrix", "radial needs --matrix const-d, log-d or osc-d");
  const auto prof = decaying_profile(*c, cfg.r0, cfg.r1);
  const auto e = local_exponent(prof.profile);
  double lo = e.front(), hi = e.front(), worst = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    lo = std::min(lo, e[j]);
    hi = std::max(hi, e[j]);
    worst = std::max(worst, std::abs(e[j] - c->closed_form_exponent(prof.profile.t[j])));
  }
  const auto grid = log_spaced(cfg.r0, cfg.r1, 200.0);
  write_side_csv(cfg.csv, [&](std::ostream& os) { write_csv(os, prof.profile); });
  emit(cfg, {{"coefficient", *c},
             {"r0", cfg.r0},
             {"r1", cfg.r1},
             {"samples", prof.profile.size()},
             {"local_exponent_min", lo},
             {"local_exponent_max", hi},
             {"closed_form_exponent_error", worst},
             {"closed_form_residual", closed_form_residual(*c, grid)},
             {"contamination_estimate", prof.contamination_estimate},
             {"gallery", gallery_exponent(*c)}});
  return exit_pass;
}

int run_series(const RunConfig& cfg) {
  const auto d = cfg.domain();
  const auto n = nodes_or(cfg, 800);
  const auto basis = eigen_basis(assemble(d, n), std::min(cfg.K + 1, n / 4));
  const auto s = build_series(basis, Bump::for_domain(d), std::min(cfg.K, basis.count()));
  const auto inner = inner_domain(cfg, d);
  const double rho = cfg.rho > 0.0 ? cfg.rho : 2.0;
  json grads = json::array();
  for (std::size_t k = 1; k <= std::min<std::size_t>(5, s.terms()); ++k) {
    const auto g = gradient_norm_check(s, k);
    grads.push_back({{"k", k}, {"energy", g.energy}, {"abs_alpha", g.abs_alpha}, {"relative_gap", g.relative_gap}});
  }
  double cross = 0.0;
  for (std::size_t a = 1; a <= s.terms(); ++a)
    for (std::size_t b = 1; b <= s.terms(); ++b)
      if (a != b) cross = std::max(cross, std::abs(gradient_pairing(s, a, b)));
  const auto lb = lower_bound_check(s, inner, rho);
  json report{{"series", s}, {"gradient", grads}, {"cross_gradient_max", cross}, {"lower_bound", lb},
              {"inner", inner}};
  bool pass = lb.pass;
  if (s.terms() >= 2) {
    const double rhos[] = {10.0 * rho, 100.0 * rho};
    const auto tb = tail_bound_check(s, inner, rhos);
    report["tail_bound"] = tb;
    pass = pass && tb.pass;
  }
  const auto fu = fundamental_upper_check(s);
  report["fundamental_upper"] = fu;
  pass = pass && fu.pass();
  report["verdict"] = pass ? "pass" : "fail";
  write_side_csv(cfg.csv, [&](std::ostream& os) {
    const auto radii = log_scan(1.0, 1e4, 10);
    write_scan_csv(os, s, radii);
  });
  emit(cfg, report);
  return verdict_code(pass);
}

int run_certify_super(const RunConfig& cfg) {
  const auto d = cfg.domain();
  const double p = cfg.need_p();
  CertificateOptions opts;
  if (cfg.nodes) opts.angular_nodes = cfg.nodes;
  const auto mode = principal_mode(d, opts.angular_nodes);
  const auto matrix = cfg.matrix_model(mode.lambda1);
  double cmax = 0.0;
  std::optional<double> c = cfg.c;
  if (!c) {
    const double beta = homogeneity_exponent(p);
    double gmin = mode.lambda1 - beta * (beta + d.dim() - 2.0);
    if (!matrix.is_identity()) {
      gmin = std::numeric_limits<double>::infinity();
      const double r0 = std::max(1.0, matrix.min_radius());
      for (double r : log_spaced(r0, 1e6 * r0, 40.0))
        gmin = std::min(gmin, mode.lambda1 * matrix.angular_factor(std::log(r)) - beta * (beta + d.dim() - 2.0));
    }
    if (!(gmin > 0.0)) throw usage_error("subcritical", "no supersolution of power form; pass --c explicitly");
    cmax = std::pow(gmin, 1.0 / (p - 1.0));
    c = 0.5 * cmax;
  }
  auto cert = verify_supersolution_strong(d, p, *c, matrix, opts);
  json report = certificate_json(cert);
  if (cfg.trials > 0) {
    const double r0 = std::max(1.0, matrix.min_radius());
    const auto mesh = make_cone_mesh(d, r0, 100.0 * r0, 64, 64.0, matrix);
    const auto op = assemble_cone(mesh);
    const auto field = power_candidate(mesh, *c, homogeneity_exponent(p));
    const auto weak = verify_supersolution_weak(op, field, p, cfg.trials, cfg.seed, opts);
    cert.weak_trials = weak.weak_trials;
    cert.weak_margin = weak.weak_margin;
    cert.seed = cfg.seed;
    cert.flags.clear();
    report = certificate_json(cert);
    report["evidence"]["weak_grid"] = weak.grid;
  }
  if (cmax > 0.0) report["evidence"]["c_max"] = cmax;
  emit(cfg, report);
  return verdict_code(cert.pass());
}

int run_certify_nonexist(const RunConfig& cfg) {
  const auto d = cfg.domain();
  const double p = cfg.need_p();
  CertificateOptions opts;
  if (cfg.nodes) opts.angular_nodes = cfg.nodes;
  const auto mode = principal_mode(d, opts.angular_nodes);
  const auto matrix = cfg.matrix_model(mode.lambda1);
  double alpha = 0.0;
  if (cfg.lb_alpha) {
    alpha = *cfg.lb_alpha;
  } else if (auto coef = cfg.coefficient()) {
    const auto g = gallery_exponent(*coef);
    if (!g.exact()) throw usage_error("missing-flag", "oscillating gallery needs --lb-alpha");
    alpha = g.alpha_low;
  } else {
    alpha = characteristic_roots(mode.lambda1, d.dim()).alpha_minus;
  }
  const auto cert = nonexistence_certificate(d, p, alpha, cfg.c.value_or(1.0), matrix, opts);
  emit(cfg, certificate_json(cert));
  return verdict_code(cert.pass);
}

int run_certify_critical(const RunConfig& cfg) {
  const auto d = cfg.domain();
  if (cfg.matrix != "id") throw usage_error("matrix", "the critical-case certificate is implemented for the identity");
  CertificateOptions opts;
  if (cfg.nodes) opts.angular_nodes = cfg.nodes;
  CriticalCaseOptions crit;
  crit.epsilon = cfg.eps;
  if (cfg.inner_cap_deg) crit.support = AngularDomain::cap(cfg.dim, radians(*cfg.inner_cap_deg));
  crit.K = cfg.K;
  const auto cert = critical_case_certificate(d, crit, opts);
  emit(cfg, certificate_json(cert));
  return verdict_code(cert.pass);
}

int run_solve(const RunConfig& cfg) {
  const auto d = cfg.domain();
  const double p = cfg.need_p();
  ExhaustionOptions opts;
  if (cfg.nodes) opts.angular_nodes = cfg.nodes;
  opts.K = cfg.K;
  if (cfg.tol) opts.solve.tolerance = *cfg.tol;
  const auto rep = exhaustion_solve(d, p, cfg.radii, opts);
  if (!cfg.csv.empty()) {
    const auto op = assemble(d, opts.angular_nodes);
    const auto basis = eigen_basis(op, std::min(opts.K + 1, opts.angular_nodes / 4));
    const auto series = build_series(basis, Bump::for_domain(d), std::min(opts.K, basis.count()));
    const auto pb = build_problem(d, p, cfg.radii.back(), series, rep.cmax, opts);
    write_side_csv(cfg.csv, [&](std::ostream& os) { write_csv(os, pb.op.mesh, rep.levels.back().w); });
  }
  json report = rep;
  report["domain"] = d;
  report["psi"] = Bump::for_domain(d);
  report["verdict"] = rep.stabilizing() ? "pass" : "fail";
  emit(cfg, report);
  return verdict_code(rep.stabilizing());
}

int run_harnack(const RunConfig& cfg) {
  const auto d = cfg.domain();
  const auto inner = inner_domain(cfg, d);
  HarnackOptions opts;
  if (cfg.nodes) opts.angular_nodes = cfg.nodes;
  if (cfg.trials > 0) opts.trials = cfg.trials;
  const double rho = cfg.rho > 0.0 ? cfg.rho : 1.0;
  const auto lambda1 = cfg.matrix == "id" ? 1.0 : richardson_principal(d, 1000).lambda;
  const auto rep = harnack_exponent(d, inner, cfg.matrix_model(lambda1), rho, cfg.levels, cfg.seed, opts);
  const bool pass = rep.alpha <= 2.0 - d.dim();
  emit(cfg, {{"domain", d},
             {"inner", inner},
             {"C_S", rep.c_s},
             {"alpha", rep.alpha},
             {"fundamental_exponent", 2.0 - d.dim()},
             {"level_ratio", rep.level_ratio},
             {"kernels", rep.kernels},
             {"seed", rep.seed},
             {"verdict", pass ? "pass" : "fail"}});
  return verdict_code(pass);
}

int run_gbnorm(const RunConfig& cfg) {
  const auto rep = gb_norm_estimate(cfg.eps.value_or(1.0), cfg.dim);
  emit(cfg, certificate_json(rep));
  return verdict_code(rep.estimate < 1.0);
}

int run_sweep(const RunConfig& cfg) {
  double a = 30.0, b = 180.0, step = 10.0;
  {
    std::stringstream ss(cfg.cap_deg_range);
    char c1 = 0, c2 = 0;
    if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0 || b < a)
      throw usage_error("cap-deg-range", "expected --cap-deg-range start:stop:step");
  }
  const auto n = nodes_or(cfg, 1000);
  std::ostringstream csv;
  csv.precision(17);
  csv << "theta1_deg,lambda1,alpha_minus,p_star\n";
  double prev = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  const auto count = static_cast<int>(std::floor((b - a) / step + 1e-9));
  for (int i = 0; i <= count; ++i) {
    const double deg = a + step * i;
    const auto d = deg >= 180.0 ? AngularDomain::full_sphere(cfg.dim) : AngularDomain::cap(cfg.dim, radians(deg));
    const auto est = richardson_principal(d, n);
    const auto r = characteristic_roots(est.lambda, cfg.dim);
    const double ps = critical_exponent_from_alpha(r.alpha_minus);
    if (ps < prev - 1e-12) monotone = false;
    prev = ps;
    csv << deg << ',' << est.lambda << ',' << r.alpha_minus << ',' << ps << '\n';
  }
  if (cfg.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw usage_error("output", "cannot open " + cfg.out);
    f << csv.str();
  }
  return verdict_code(monotone);
}

void domain_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--dim", cfg.dim, "space dimension N >= 3")->capture_default_str();
  sub->add_option("--cap-deg", cfg.cap_deg, "cap {theta < theta1}, degrees");
  sub->add_option("--band-deg", cfg.band_deg, "band {theta0 < theta < theta1}, degrees")->expected(2);
  sub->add_flag("--full-sphere", cfg.full_sphere, "whole sphere S^{N-1}");
  sub->add_option("--nodes", cfg.nodes, "angular mesh nodes");
}

void matrix_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--matrix", cfg.matrix, "id, const-d, log-d or osc-d")
      ->check(CLI::IsMember({"id", "const-d", "log-d", "osc-d"}))
      ->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "gallery exponent alpha < 2 - N");
  sub->add_option("--gamma", cfg.gamma, "oscillating gallery: gamma");
  sub->add_option("--delta", cfg.delta, "oscillating gallery: delta");
  sub->add_option("--k", cfg.k, "oscillating gallery: k");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"conelab: critical exponents of -div(a grad u) = u^p in cone-like domains"};
  app.require_subcommand(1);

  auto* eigen = app.add_subcommand("eigen", "principal angular eigenvalue with Richardson extrapolation");
  domain_flags(eigen, cfg);
  eigen->add_option("--K", cfg.K, "eigenpairs to report");
  eigen->add_option("--eps", cfg.eps, "strength of an indicator potential on the inner domain");
  eigen->add_option("--inner-cap-deg", cfg.inner_cap_deg, "support cap of the potential, degrees");
  eigen->add_option("--csv", cfg.csv, "eigenfunction CSV");

  auto* pstar = app.add_subcommand("pstar", "critical exponent p*");
  domain_flags(pstar, cfg);
  matrix_flags(pstar, cfg);

  auto* radial = app.add_subcommand("radial", "decaying radial profile of a matrix gallery");
  radial->add_option("--dim", cfg.dim)->capture_default_str();
  matrix_flags(radial, cfg);
  radial->add_option("--r0", cfg.r0)->capture_default_str();
  radial->add_option("--r1", cfg.r1)->capture_default_str();
  radial->add_option("--csv", cfg.csv, "profile CSV");

  auto* series = app.add_subcommand("series", "minimal-solution series and its checks");
  domain_flags(series, cfg);
  series->add_option("--K", cfg.K)->capture_default_str();
  series->add_option("--rho", cfg.rho, "start of the lower-bound scan (default 2)");
  series->add_option("--inner-cap-deg", cfg.inner_cap_deg, "Omega' as a cap, degrees");
  series->add_option("--csv", cfg.csv, "scan CSV (r, theta, v)");

  auto* csuper = app.add_subcommand("certify-super", "supersolution certificate for c r^beta phi1");
  domain_flags(csuper, cfg);
  matrix_flags(csuper, cfg);
  csuper->add_option("--p", cfg.p)->required();
  csuper->add_option("--c", cfg.c, "amplitude (default c_max/2)");
  csuper->add_option("--trials", cfg.trials, "weak-form trials")->capture_default_str();

  auto* cnon = app.add_subcommand("certify-nonexist", "nonexistence certificate by dyadic annulus search");
  domain_flags(cnon, cfg);
  matrix_flags(cnon, cfg);
  cnon->add_option("--p", cfg.p)->required();
  cnon->add_option("--c", cfg.c, "lower-bound constant (default 1)");
  cnon->add_option("--lb-alpha", cfg.lb_alpha, "lower-bound exponent (default from the domain or gallery)");

  auto* ccrit = app.add_subcommand("certify-critical", "nonexistence at p = p* via a perturbed operator");
  domain_flags(ccrit, cfg);
  matrix_flags(ccrit, cfg);
  ccrit->add_option("--eps", cfg.eps, "perturbation strength");
  ccrit->add_option("--inner-cap-deg", cfg.inner_cap_deg, "perturbation support cap, degrees");
  ccrit->add_option("--K", cfg.K)->capture_default_str();

  auto* solve = app.add_subcommand("solve", "monotone iteration on an exhaustion by truncated cones");
  domain_flags(solve, cfg);
  solve->add_option("--p", cfg.p)->required();
  solve->add_option("--radii", cfg.radii, "truncation radii")->capture_default_str();
  solve->add_option("--K", cfg.K)->capture_default_str();
  solve->add_option("--tol", cfg.tol, "nonlinear residual tolerance");
  solve->add_option("--csv", cfg.csv, "solution CSV for the last level");

  auto* harnack = app.add_subcommand("harnack", "empirical Harnack constant and exponent");
  domain_flags(harnack, cfg);
  matrix_flags(harnack, cfg);
  harnack->add_option("--inner-cap-deg", cfg.inner_cap_deg, "Omega' as a cap, degrees");
  harnack->add_option("--rho", cfg.rho, "first dyadic radius (default 1)");
  harnack->add_option("--levels", cfg.levels)->capture_default_str();
  harnack->add_option("--trials", cfg.trials, "harmonic samples per level");

  auto* gb = app.add_subcommand("gbnorm", "Green-bounded norm of eps / (|x|^2 log^2(|x|+2))");
  gb->add_option("--dim", cfg.dim)->capture_default_str();
  gb->add_option("--eps", cfg.eps, "epsilon (default 1)");

  auto* sweep = app.add_subcommand("sweep", "p* over caps as CSV (theta1, lambda1, alpha_minus, p*)");
  sweep->add_option("--dim", cfg.dim)->capture_default_str();
  sweep->add_option("--cap-deg-range", cfg.cap_deg_range, "start:stop:step in degrees")->required();
  sweep->add_option("--nodes", cfg.nodes);

  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--out", cfg.out, "write the report to a file instead of stdout");
    sub->add_option("--seed", cfg.seed, "64-bit master seed")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << '\n';
    return exit_usage;
  }

  const std::pair<CLI::App*, int (*)(const RunConfig&)> table[] = {
      {eigen, run_eigen},         {pstar, run_pstar},
      {radial, run_radial},       {series, run_series},
      {csuper, run_certify_super}, {cnon, run_certify_nonexist},
      {ccrit, run_certify_critical}, {solve, run_solve},
      {harnack, run_harnack},     {gb, run_gbnorm},
      {sweep, run_sweep}};
  try {
    for (const auto& [sub, fn] : table) {
      if (!sub->parsed()) continue;
      cfg.command = sub->get_name();
      return fn(cfg);
    }
  } catch (const Error& e) {
    std::cout << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump() << '\n';
    return e.error_class() == ErrorClass::usage ? exit_usage : exit_numerical;
  } catch (const std::exception& e) {
    std::cout << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return exit_numerical;
  }
  return exit_usage;
}
