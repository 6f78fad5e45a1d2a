#pragma once

// Evidence objects for existence and nonexistence of positive supersolutions
// of -div(a grad u) = u^p at infinity in a cone C_Omega.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "conelab/angular_spectral.hpp"
#include "conelab/cone_grid.hpp"
#include "conelab/errors.hpp"
#include "conelab/exponents.hpp"
#include "conelab/minimal_solutions.hpp"
#include "conelab/random.hpp"
#include "conelab/sphere_geometry.hpp"

namespace conelab {

inline constexpr int certificate_schema = 1;

/// alpha (p - 1) within this distance of -2 counts as the critical case.
inline constexpr double critical_tolerance = 1e-8;

struct CertificateOptions {
  std::size_t angular_nodes = 1000;  // coarse Richardson level; the fine level doubles it
  double strong_slack = -1e-12;
  double weak_slack = -1e-10;
  double shrink = 0.25;              // Omega' = shrink_fraction(Omega, shrink)
  int max_doublings = 60;
  ConeGridOptions grid;
};

/// Principal eigenpair of -Delta_omega on a domain, eigenfunction scaled to sup 1.
struct PrincipalMode {
  double lambda1 = 0.0;
  AngularMesh mesh;
  std::vector<double> phi;
};

inline PrincipalMode principal_mode(const AngularDomain& domain, std::size_t n_coarse,
                                    const PotentialSpec& spec = {}) {
  auto est = richardson_principal(domain, n_coarse, spec);
  PrincipalMode m{est.lambda, est.fine_mesh, std::move(est.fine.phi)};
  const double top = *std::max_element(m.phi.begin(), m.phi.end());
  for (double& v : m.phi) v /= top;
  return m;
}

/// c_max(p): largest c for which c r^beta phi1 (sup phi1 = 1) is a supersolution.
inline double supersolution_cmax(const AngularDomain& domain, double p, const CertificateOptions& opts = {}) {
  const auto m = principal_mode(domain, opts.angular_nodes);
  return supersolution_amplitude(p, m.lambda1, domain.dim(), 1.0);
}

struct SupersolutionCertificate {
  nlohmann::json candidate;
  nlohmann::json grid;
  std::optional<double> strong_margin;
  double strong_slack = -1e-12;
  int weak_trials = 0;
  std::optional<double> weak_margin;
  double weak_slack = -1e-10;
  std::uint64_t seed = 0;
  std::vector<std::string> flags;

  bool strong_pass() const { return !strong_margin || *strong_margin >= strong_slack; }
  bool weak_pass() const { return !weak_margin || *weak_margin >= weak_slack; }
  bool pass() const { return strong_pass() && weak_pass(); }
};

/// Pointwise check of u = c r^beta phi1, beta = 2/(1-p), through the exact reduction
///   -div(a grad u) - u^p = c r^{beta-2} phi1 [g(r) - c^{p-1} phi1^{p-1}],
///   g(r) = lambda1 q(r) - beta(beta+N-2),
/// with q the tangential factor of the matrix (1, or d(r)/lambda1).
/// The margin is the minimum of the bracket over the mesh nodes and radii.
inline SupersolutionCertificate verify_supersolution_strong(const AngularDomain& domain, double p, double c,
                                                            const MatrixModel& matrix = MatrixModel::identity(),
                                                            const CertificateOptions& opts = {}) {
  require(c > 0.0, "invalid-amplitude", "c must be positive");
  const double beta = homogeneity_exponent(p);
  const int dim = domain.dim();
  const auto mode = principal_mode(domain, opts.angular_nodes);
  std::vector<double> ts;
  bool constant_gap = matrix.is_identity();
  if (!constant_gap) constant_gap = std::holds_alternative<radial::Constant>(matrix.coefficient->variant());
  if (constant_gap) {
    ts.push_back(0.0);
  } else {
    const double r0 = std::max(1.0, matrix.min_radius());
    for (double r : log_spaced(r0, 1e6 * r0, 40.0)) ts.push_back(std::log(r));
  }
  double gmin = std::numeric_limits<double>::infinity();
  for (double t : ts) gmin = std::min(gmin, mode.lambda1 * matrix.angular_factor(t) - beta * (beta + dim - 2.0));
  double margin = std::numeric_limits<double>::infinity();
  for (double v : mode.phi) margin = std::min(margin, gmin - std::pow(c, p - 1.0) * std::pow(v, p - 1.0));

  SupersolutionCertificate cert;
  cert.candidate = {{"form", "c*r^beta*phi1"}, {"c", c}, {"beta", beta}, {"p", p}, {"lambda1", mode.lambda1},
                    {"gap_min", gmin}, {"matrix", matrix}, {"domain", domain}};
  cert.grid = {{"angular_nodes", mode.mesh.size()}, {"radial_samples", ts.size()}};
  cert.strong_margin = margin;
  cert.strong_slack = opts.strong_slack;
  cert.weak_slack = opts.weak_slack;
  cert.flags.push_back("no-trials");
  return cert;
}

/// c r^beta phi1 at every node of the cone mesh, phi1 the discrete principal
/// eigenvector on the same angular mesh (sup 1).
inline DiscreteField power_candidate(const ConeMesh& mesh, double c, double beta) {
  const auto op = assemble(mesh.angular.domain, mesh.angular.size());
  auto phi = principal_eigenpair(op).phi;
  const double top = *std::max_element(phi.begin(), phi.end());
  DiscreteField u{std::vector<double>(mesh.size(), 0.0)};
  for (std::size_t i = 0; i < mesh.radial_count(); ++i) {
    const double radial = c * std::exp(beta * mesh.t[i]);
    for (std::size_t j = 1; j <= mesh.angular.size(); ++j) u[mesh.index(i, j)] = radial * phi[j - 1] / top;
  }
  return u;
}

namespace detail {

inline double bump01(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * pi * s);
  return c * c;
}

}  // namespace detail

/// Discrete weak-form check of u against `trials` random tensor bumps
/// phi(t, theta) >= 0 supported in the mesh interior:
///   phi^T S u - sum M phi u^p >= weak_slack * sum phi (|S u| + M u^p).
inline SupersolutionCertificate verify_supersolution_weak(const ConeOperator& op, const DiscreteField& u, double p,
                                                          int trials, std::uint64_t seed,
                                                          const CertificateOptions& opts = {}) {
  require(p > 1.0, "invalid-exponent", "p must exceed 1");
  require(trials >= 0, "invalid-trials", "trial count must be nonnegative");
  const auto& mesh = op.mesh;
  require(u.values.size() == mesh.size(), "size-mismatch", "field does not match the mesh");
  for (std::size_t k = 0; k < mesh.size(); ++k)
    if (op.interior[k]) require(u[k] > 0.0, "nonpositive-field", "field must be positive on the mesh interior");

  std::vector<double> su(mesh.size(), 0.0);
  apply(op.stiffness, u.values, su);

  SupersolutionCertificate cert;
  cert.candidate = {{"form", "field"}, {"p", p}, {"matrix", mesh.matrix}, {"domain", mesh.angular.domain}};
  cert.grid = {{"angular_nodes", mesh.angular.size()},
               {"radial_nodes", mesh.radial_count()},
               {"r_min", std::exp(mesh.t.front())},
               {"r_max", std::exp(mesh.t.back())}};
  cert.weak_trials = trials;
  cert.seed = seed;
  cert.strong_slack = opts.strong_slack;
  cert.weak_slack = opts.weak_slack;
  if (trials == 0) {
    cert.flags.push_back("no-trials");
    return cert;
  }
  const double t_lo = mesh.t[1], t_hi = mesh.t[mesh.radial_count() - 2];
  const double th_lo = mesh.angular.theta.front(), th_hi = mesh.angular.theta.back();
  const double t_span = t_hi - t_lo, th_span = th_hi - th_lo;
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 gen(sub_seed(seed, static_cast<std::uint64_t>(trial)));
    const double tc = t_lo + t_span * uniform01(gen);
    const double thc = th_lo + th_span * uniform01(gen);
    const double wt = 2.0 * mesh.ht + (0.5 * t_span) * uniform01(gen);
    const double wth = 2.0 * mesh.angular.h + (0.5 * th_span) * uniform01(gen);
    double form = 0.0, scale = 0.0;
    for (std::size_t i = 1; i + 1 < mesh.radial_count(); ++i) {
      const double bt = detail::bump01((mesh.t[i] - tc) / wt);
      if (bt == 0.0) continue;
      for (std::size_t j = 1; j <= mesh.angular.size(); ++j) {
        const std::size_t k = mesh.index(i, j);
        const double phi = bt * detail::bump01((mesh.angular.theta[j - 1] - thc) / wth);
        if (phi == 0.0) continue;
        const double nl = op.mass[k] * std::pow(u[k], p);
        form += phi * (su[k] - nl);
        scale += phi * (std::abs(su[k]) + nl);
      }
    }
    if (scale == 0.0) continue;
    worst = std::min(worst, form / scale);
  }
  cert.weak_margin = worst;
  return cert;
}

/// alpha^{1/(1-p)} u^{1/alpha} with alpha = (p-1)/(p0-1).
inline DiscreteField power_lift(const DiscreteField& u, double p0, double p) {
  require(p0 > 1.0 && p >= p0, "invalid-exponent", "power lift needs p >= p0 > 1");
  const double a = (p - 1.0) / (p0 - 1.0);
  const double scale = std::pow(a, 1.0 / (1.0 - p));
  DiscreteField v{std::vector<double>(u.values.size())};
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    if (u[k] < 0.0 || !std::isfinite(u[k])) throw usage_error("nonpositive-field", "power lift needs a positive field");
    v[k] = a == 1.0 ? u[k] : scale * std::pow(u[k], 1.0 / a);
  }
  return v;
}

struct NonexistenceCertificate {
  double p = 0.0;
  double alpha = 0.0;
  double c = 0.0;
  AngularDomain inner = AngularDomain::full_sphere(3);
  MatrixModel matrix;
  double R_star = 0.0;
  double mu = 0.0;       // c^{p-1} (2 R*)^{alpha (p-1)}
  double Lambda1 = 0.0;  // annular eigenvalue of C_{Omega'}^{(R*, 2R*)}
  int doublings = 0;
  bool pass = false;
  std::vector<std::string> flags;
  nlohmann::json extra = nlohmann::json::object();
};

/// Dyadic search for R* with c^{p-1} (2R*)^{alpha(p-1)} > Lambda1(C_{Omega'}^{(R*,2R*)}):
/// beyond R* the potential W = u^{p-1} of any supersolution u >= c r^alpha
/// exceeds the annular eigenvalue, which is impossible.
inline NonexistenceCertificate nonexistence_search(const AngularDomain& inner, double p, double alpha, double c,
                                                   const MatrixModel& matrix, const CertificateOptions& opts = {}) {
  require(p > 1.0, "invalid-exponent", "p must exceed 1");
  require(c > 0.0, "invalid-amplitude", "lower-bound constant c must be positive");
  require(alpha < 0.0, "invalid-exponent", "lower-bound exponent must be negative");
  if (!(alpha * (p - 1.0) > -2.0 + critical_tolerance))
    throw usage_error("supercritical-input", "p >= 1 - 2/alpha: the lower bound cannot beat the annular eigenvalue");
  NonexistenceCertificate cert;
  cert.p = p;
  cert.alpha = alpha;
  cert.c = c;
  cert.inner = inner;
  cert.matrix = matrix;
  auto grid = opts.grid;
  grid.max_modes = std::min<std::size_t>(grid.max_modes, 8);
  const auto basis = default_angular_basis(inner, grid);
  const double r0 = std::max(1.0, matrix.min_radius());
  const double q = alpha * (p - 1.0);
  for (int j = 0; j <= opts.max_doublings; ++j) {
    const double R = std::ldexp(r0, j);
    const double mu = std::pow(c, p - 1.0) * std::pow(2.0 * R, q);
    const double lam = annular_eigenvalue(basis, R, 2.0, matrix, grid).lambda;
    if (mu > lam) {
      cert.R_star = R;
      cert.mu = mu;
      cert.Lambda1 = lam;
      cert.doublings = j;
      cert.pass = true;
      return cert;
    }
  }
  throw numerical_error("search-exhausted", "no R* found below 2^60 times the base radius");
}

/// Nonexistence search on Omega' = shrink(Omega) for p < 1 - 2/alpha.
inline NonexistenceCertificate nonexistence_certificate(const AngularDomain& domain, double p, double alpha, double c,
                                                        const MatrixModel& matrix = MatrixModel::identity(),
                                                        const CertificateOptions& opts = {}) {
  const auto inner = domain.kind() == DomainKind::full_sphere ? domain : shrink_fraction(domain, opts.shrink);
  return nonexistence_search(inner, p, alpha, c, matrix, opts);
}

struct CriticalCaseOptions {
  std::optional<double> epsilon;
  std::optional<AngularDomain> support;  // support of the perturbing potential
  std::size_t K = 8;
  double lower_bound_rho = 2.0;
};

/// Default support of the perturbation at the critical exponent.
inline AngularDomain critical_support(const AngularDomain& domain, double shrink) {
  if (domain.kind() == DomainKind::full_sphere) return AngularDomain::cap(domain.dim(), 0.75 * pi);
  return shrink_fraction(domain, shrink);
}

/// Critical exponent p = p*: a supersolution u >= c r^{alpha_-} satisfies
/// u^{p-1} >= c^{p-1} r^{-2}, so u is also a supersolution of
/// -Delta - eps chi_{Omega'} r^{-2} and obeys the improved lower bound
/// u >= c' r^{alpha~_1} with alpha~_1 > alpha_-; the search then runs with
/// alpha~_1, for which alpha~_1 (p* - 1) > -2.
inline NonexistenceCertificate critical_case_certificate(const AngularDomain& domain,
                                                         const CriticalCaseOptions& crit = {},
                                                         const CertificateOptions& opts = {}) {
  const int dim = domain.dim();
  const auto mode = principal_mode(domain, opts.angular_nodes);
  const auto roots = characteristic_roots(mode.lambda1, dim);
  const double p_star = critical_exponent_from_alpha(roots.alpha_minus);
  const double eps = crit.epsilon.value_or(std::min(0.5, 0.5 * (mode.lambda1 - spectral_floor(dim))));
  require(eps >= 0.0, "invalid-epsilon", "epsilon must be nonnegative");
  const auto support = crit.support.value_or(critical_support(domain, opts.shrink));
  require(domain.compactly_contains(support), "not-compactly-contained", "the perturbation must be supported inside Omega");
  const auto spec = PotentialSpec::indicator(eps, support);
  const auto perturbed = richardson_principal(domain, opts.angular_nodes, spec);
  const double lt = perturbed.lambda;
  if (!(lt > spectral_floor(dim))) throw numerical_error("below-spectral-floor", "perturbed eigenvalue below the floor");
  const double at = characteristic_roots(lt, dim).alpha_minus;
  const double gap = at * (p_star - 1.0) + 2.0;

  NonexistenceCertificate cert;
  cert.p = p_star;
  cert.alpha = at;
  cert.inner = domain.kind() == DomainKind::full_sphere ? support : shrink_fraction(domain, opts.shrink);
  cert.extra = {{"epsilon", eps},         {"support", support},     {"lambda1", mode.lambda1},
                {"alpha_minus", roots.alpha_minus}, {"lambda_tilde", lt}, {"alpha_tilde", at},
                {"gap", gap}};
  if (!(gap > critical_tolerance)) {
    cert.flags.push_back("gap-failure");
    return cert;
  }

  const auto op = assemble(domain, 2 * opts.angular_nodes, spec);
  const auto basis = eigen_basis(op, crit.K + 1);
  const auto series = build_series(basis, Bump::for_domain(domain), crit.K);
  const auto lb = lower_bound_check(series, cert.inner, crit.lower_bound_rho);
  cert.extra["lower_bound"] = lb;
  cert.extra["psi"] = series.psi_descriptor;
  if (!lb.pass) {
    cert.flags.push_back("lower-bound-unstable");
    return cert;
  }
  auto found = nonexistence_search(cert.inner, p_star, at, lb.c, MatrixModel::identity(), opts);
  found.extra = std::move(cert.extra);
  return found;
}

struct GBReport {
  double epsilon = 0.0;
  int dim = 3;
  double estimate = 0.0;     // sup_x int Gamma(x, y) W(y) dy
  double quadrature_error = 0.0;
  double tail = 0.0;         // analytic contribution beyond the cut
  double cut = 0.0;          // log of the truncation radius
  double epsilon_star = 0.0; // epsilon with estimate 1
};

/// Newtonian potential of W_eps = eps / (|x|^2 log^2(|x|+2)) restricted to
/// |x| >= 1. For a radial density the potential is nonincreasing in |x|, so
/// the sup sits at the origin:
///   u(0) = eps/(N-2) int_1^inf ds / (s log^2(s+2)) = eps/(N-2) int_0^inf dv / log^2(e^v + 2).
/// Beyond v = cut the integrand equals 1/v^2 to double precision, so the
/// tail is 1/cut.
inline GBReport gb_norm_estimate(double epsilon, int dim = 3, double cut = 40.0) {
  require(epsilon > 0.0, "invalid-epsilon", "epsilon must be positive");
  require(dim >= 3, "invalid-dimension", "N must be at least 3");
  require(cut >= 40.0, "invalid-cut", "truncation must reach log radius 40");
  auto f = [](double v) {
    const double l = v + std::log1p(2.0 * std::exp(-v));
    return 1.0 / (l * l);
  };
  double err = 0.0;
  const double head =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, cut, 30, 1e-14, &err);
  if (!(err <= 1e-10 * head)) throw numerical_error("non-convergence", "GB quadrature did not converge");
  GBReport rep;
  rep.epsilon = epsilon;
  rep.dim = dim;
  rep.cut = cut;
  rep.tail = 1.0 / cut;
  const double integral = head + rep.tail;
  rep.estimate = epsilon * integral / (dim - 2.0);
  rep.quadrature_error = epsilon * err / (dim - 2.0);
  rep.epsilon_star = (dim - 2.0) / integral;
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization with a stable layout.

inline nlohmann::json certificate_json(const SupersolutionCertificate& c) {
  nlohmann::json ev{{"candidate", c.candidate}, {"grid", c.grid}, {"flags", c.flags}};
  ev["strong_margin"] = c.strong_margin ? nlohmann::json(*c.strong_margin) : nlohmann::json(nullptr);
  ev["strong_slack"] = c.strong_slack;
  ev["weak_trials"] = c.weak_trials;
  ev["weak_margin"] = c.weak_margin ? nlohmann::json(*c.weak_margin) : nlohmann::json(nullptr);
  ev["weak_slack"] = c.weak_slack;
  ev["seed"] = c.seed;
  return {{"schema", certificate_schema}, {"kind", "supersolution"}, {"verdict", c.pass() ? "pass" : "fail"},
          {"evidence", ev}};
}

inline nlohmann::json certificate_json(const NonexistenceCertificate& c) {
  nlohmann::json ev{{"p", c.p},           {"alpha", c.alpha},     {"c", c.c},          {"inner", c.inner},
                    {"matrix", c.matrix}, {"R_star", c.R_star},   {"mu", c.mu},        {"Lambda1", c.Lambda1},
                    {"doublings", c.doublings}, {"flags", c.flags}, {"details", c.extra}};
  return {{"schema", certificate_schema}, {"kind", "nonexistence"}, {"verdict", c.pass ? "pass" : "fail"},
          {"evidence", ev}};
}

inline nlohmann::json certificate_json(const GBReport& r) {
  nlohmann::json ev{{"epsilon", r.epsilon}, {"N", r.dim},   {"estimate", r.estimate},
                    {"quadrature_error", r.quadrature_error}, {"tail", r.tail}, {"log_cut", r.cut},
                    {"epsilon_star", r.epsilon_star}};
  return {{"schema", certificate_schema}, {"kind", "gb-norm"}, {"verdict", r.estimate < 1.0 ? "pass" : "fail"},
          {"evidence", ev}};
}

}  // namespace conelab
