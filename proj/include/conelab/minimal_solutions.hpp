#pragma once

// Minimal positive solution v_psi of -Delta v - V(omega) r^{-2} v = 0 in the
// exterior cone section C_Omega^1 with v = psi on the base r = 1, written as
//   v_psi(r, omega) = sum_k psi_k r^{alpha_k} phi_k(omega),
// where alpha_k is the decaying root of alpha(alpha + N - 2) = lambda_k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "conelab/angular_spectral.hpp"
#include "conelab/errors.hpp"
#include "conelab/exponents.hpp"
#include "conelab/sphere_geometry.hpp"

namespace conelab {

struct MinimalSolutionSeries {
  SpectralDecomposition decomposition;
  std::vector<double> psi;     // base data at the angular nodes
  nlohmann::json psi_descriptor;
  std::vector<double> psi_k;
  std::vector<double> alpha_k;
  double projection_error = 0.0;  // weighted L^2 norm of the discarded part of psi
  double psi_norm = 0.0;
  double tail_exponent = 0.0;     // alpha of the first discarded mode (or the last kept one)
  double rho = 1.0;

  int dim() const { return decomposition.mesh.domain.dim(); }
  std::size_t terms() const noexcept { return psi_k.size(); }
  const AngularDomain& domain() const { return decomposition.mesh.domain; }

  /// L^2(Omega) bound on the discarded modes at radius r.
  double truncation_tail(double r) const { return projection_error * std::pow(r, tail_exponent); }
};

/// Series from the first K modes of `decomp` for node-sampled psi >= 0.
inline MinimalSolutionSeries build_series(const SpectralDecomposition& decomp, std::span<const double> psi,
                                          std::size_t K, nlohmann::json descriptor = nullptr) {
  require(K >= 1 && K <= decomp.count(), "K-too-large", "K must lie between 1 and the number of computed modes");
  require(psi.size() == decomp.mesh.size(), "size-mismatch", "psi must be sampled at the mesh nodes");
  double peak = 0.0;
  for (double v : psi) {
    require(std::isfinite(v) && v >= 0.0, "negative-psi", "psi must be nonnegative");
    peak = std::max(peak, v);
  }
  require(peak > 0.0, "zero-psi", "psi must not vanish identically");
  const int dim = decomp.mesh.domain.dim();
  for (double l : decomp.lambda)
    if (!(l > spectral_floor(dim)))
      throw numerical_error("below-spectral-floor", "an angular eigenvalue lies at or below -(N-2)^2/4");

  SpectralDecomposition kept = decomp;
  kept.lambda.resize(K);
  kept.phi.resize(K);
  const auto proj = project_samples(kept, psi);

  MinimalSolutionSeries s{kept, std::vector<double>(psi.begin(), psi.end()), std::move(descriptor), proj.coefficients,
                          {}, proj.truncation_error, proj.psi_norm, 0.0, 1.0};
  for (double l : kept.lambda) s.alpha_k.push_back(characteristic_roots(l, dim).alpha_minus);
  s.tail_exponent = K < decomp.count() ? characteristic_roots(decomp.lambda[K], dim).alpha_minus : s.alpha_k.back();
  return s;
}

/// Convenience: psi is the default bump of the domain.
inline MinimalSolutionSeries build_series(const SpectralDecomposition& decomp, const Bump& bump, std::size_t K) {
  std::vector<double> psi(decomp.mesh.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = bump(decomp.mesh.theta[i]);
  return build_series(decomp, psi, K, nlohmann::json(bump));
}

inline double evaluate(const MinimalSolutionSeries& s, double r, double theta) {
  require(r >= s.rho, "below-base", "the series is defined for r >= 1");
  double v = 0.0;
  for (std::size_t k = 0; k < s.terms(); ++k)
    v += s.psi_k[k] * std::pow(r, s.alpha_k[k]) * s.decomposition.interpolate(k, theta);
  return v;
}

/// Series value at r for every angular node.
inline std::vector<double> evaluate_nodes(const MinimalSolutionSeries& s, double r) {
  require(r >= s.rho, "below-base", "the series is defined for r >= 1");
  std::vector<double> v(s.decomposition.mesh.size(), 0.0);
  for (std::size_t k = 0; k < s.terms(); ++k) {
    const double a = s.psi_k[k] * std::pow(r, s.alpha_k[k]);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * s.decomposition.phi[k][i];
  }
  return v;
}

struct GradientNorm {
  double energy = 0.0;     // int_{C^1} |grad v_k|^2 - V r^{-2} v_k^2 dx
  double abs_alpha = 0.0;  // |alpha_k|
  double relative_gap = 0.0;
};

/// Energy of v_k = r^{alpha_k} phi_k over C_Omega^1; the radial integral is
/// int_1^inf r^{2 alpha + N - 3} dr = 1/(2 - N - 2 alpha).
inline double gradient_pairing(const MinimalSolutionSeries& s, std::size_t k, std::size_t n) {
  require(k >= 1 && k <= s.terms() && n >= 1 && n <= s.terms(), "K-too-large", "mode index out of range");
  const double ak = s.alpha_k[k - 1], an = s.alpha_k[n - 1];
  const double exponent = 2.0 - s.dim() - ak - an;
  if (!(exponent > 0.0)) throw numerical_error("divergent-integral", "radial energy integral diverges");
  const auto& m = s.decomposition.mesh;
  const auto& fk = s.decomposition.phi[k - 1];
  const auto& fn = s.decomposition.phi[n - 1];
  std::vector<double> vfn(fn.size());
  for (std::size_t i = 0; i < fn.size(); ++i)
    vfn[i] = (s.decomposition.potential.empty() ? 0.0 : s.decomposition.potential[i]) * fn[i];
  const double angular = ak * an * m.inner(fk, fn) + m.dirichlet_form(fk, fn) - m.inner(fk, vfn);
  return angular / exponent;
}

inline GradientNorm gradient_norm_check(const MinimalSolutionSeries& s, std::size_t k) {
  GradientNorm g{gradient_pairing(s, k, k), std::abs(s.alpha_k.at(k - 1)), 0.0};
  g.relative_gap = std::abs(g.energy - g.abs_alpha) / g.abs_alpha;
  return g;
}

/// Angular nodes of the series mesh lying in `inner`.
inline std::vector<std::size_t> nodes_in(const MinimalSolutionSeries& s, const AngularDomain& inner) {
  std::vector<std::size_t> idx;
  const auto& th = s.decomposition.mesh.theta;
  for (std::size_t i = 0; i < th.size(); ++i)
    if (inner.contains(th[i])) idx.push_back(i);
  if (idx.empty()) throw usage_error("empty-subdomain", "no angular nodes inside the subdomain");
  return idx;
}

inline std::vector<double> log_scan(double r0, double r1, int per_decade) {
  const int n = std::max(1, static_cast<int>(std::ceil(std::log10(r1 / r0) * per_decade)));
  std::vector<double> r(n + 1);
  for (int i = 0; i <= n; ++i) r[i] = r0 * std::pow(r1 / r0, static_cast<double>(i) / n);
  return r;
}

struct LowerBoundReport {
  double c = 0.0;               // inf of v r^{-alpha_1} over the scan
  double last_decade_variation = 0.0;
  double truncation_tail = 0.0; // tail bound relative to r^{alpha_1}, at the scan start
  std::vector<double> radii;
  std::vector<double> profile;  // min over theta of v r^{-alpha_1} per radius
  bool pass = false;
};

/// inf of v_psi r^{-alpha_1} over r in [rho, 1e4 rho] and theta in Omega'.
inline LowerBoundReport lower_bound_check(const MinimalSolutionSeries& s, const AngularDomain& inner, double rho,
                                          int per_decade = 20) {
  require(rho > s.rho, "invalid-radius", "rho must exceed the base radius 1");
  require(s.domain().compactly_contains(inner), "not-compactly-contained", "Omega' must be compactly inside Omega");
  const auto idx = nodes_in(s, inner);
  LowerBoundReport rep;
  rep.radii = log_scan(rho, 1e4 * rho, per_decade);
  const double a1 = s.alpha_k[0];
  for (double r : rep.radii) {
    const auto v = evaluate_nodes(s, r);
    double m = std::numeric_limits<double>::infinity();
    for (auto i : idx) m = std::min(m, v[i] * std::pow(r, -a1));
    rep.profile.push_back(m);
  }
  rep.c = *std::min_element(rep.profile.begin(), rep.profile.end());
  const auto tail = rep.profile.end() - (per_decade + 1);
  const auto [lo, hi] = std::minmax_element(tail, rep.profile.end());
  rep.last_decade_variation = (*hi - *lo) / std::abs(*hi);
  rep.truncation_tail = s.truncation_tail(rho) * std::pow(rho, -a1);
  rep.pass = rep.c > 0.0 && rep.last_decade_variation <= 0.01;
  return rep;
}

struct TailBoundReport {
  std::vector<double> rho;
  std::vector<double> constant;  // sup |w| rho^{-alpha_2} on C_{Omega'}^{(rho, 2 rho)}
  double spread = 0.0;            // max/min - 1
  bool pass = false;
};

/// Remainder w = v_psi - psi_1 r^{alpha_1} phi_1 against rho^{alpha_2}.
inline double tail_constant(const MinimalSolutionSeries& s, const AngularDomain& inner, double rho,
                            int samples = 41) {
  require(s.terms() >= 2, "K-too-small", "the tail estimate needs K >= 2");
  const auto idx = nodes_in(s, inner);
  double sup = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double r = rho * std::pow(2.0, static_cast<double>(j) / (samples - 1));
    const auto v = evaluate_nodes(s, r);
    const double lead = s.psi_k[0] * std::pow(r, s.alpha_k[0]);
    for (auto i : idx) sup = std::max(sup, std::abs(v[i] - lead * s.decomposition.phi[0][i]));
  }
  return sup * std::pow(rho, -s.alpha_k[1]);
}

inline TailBoundReport tail_bound_check(const MinimalSolutionSeries& s, const AngularDomain& inner,
                                        std::span<const double> rhos, double tolerance = 0.1) {
  require(s.domain().compactly_contains(inner), "not-compactly-contained", "Omega' must be compactly inside Omega");
  require(rhos.size() >= 2, "invalid-radii", "the tail estimate compares at least two radii");
  TailBoundReport rep;
  for (double r : rhos) {
    require(r > s.rho, "invalid-radius", "rho must exceed the base radius 1");
    rep.rho.push_back(r);
    rep.constant.push_back(tail_constant(s, inner, r));
  }
  const auto [lo, hi] = std::minmax_element(rep.constant.begin(), rep.constant.end());
  rep.spread = *lo > 0.0 ? *hi / *lo - 1.0 : std::numeric_limits<double>::infinity();
  rep.pass = rep.spread <= tolerance;
  return rep;
}

struct FundamentalUpperReport {
  double alpha_1 = 0.0;
  double fundamental_exponent = 0.0;  // 2 - N
  std::vector<double> radii;
  std::vector<double> scaled_sup;     // sup_theta v r^{N-2}
  bool exponent_ok = false;
  bool nonincreasing = false;

  bool pass() const noexcept { return exponent_ok && nonincreasing; }
};

/// v_psi <= C |x|^{2-N}: sup_theta v r^{N-2} must be nonincreasing for r >= 10.
inline FundamentalUpperReport fundamental_upper_check(const MinimalSolutionSeries& s, double r1 = 1e4,
                                                      int per_decade = 20) {
  for (double v : s.decomposition.potential)
    require(v == 0.0, "nonzero-potential", "the fundamental-solution bound applies to V = 0");
  FundamentalUpperReport rep;
  const int n = s.dim();
  rep.alpha_1 = s.alpha_k[0];
  rep.fundamental_exponent = 2.0 - n;
  rep.exponent_ok = rep.alpha_1 <= rep.fundamental_exponent + 1e-12;
  rep.radii = log_scan(10.0, r1, per_decade);
  rep.nonincreasing = true;
  for (double r : rep.radii) {
    const auto v = evaluate_nodes(s, r);
    const double sup = *std::max_element(v.begin(), v.end()) * std::pow(r, n - 2.0);
    if (!std::isfinite(sup)) rep.nonincreasing = false;
    if (!rep.scaled_sup.empty() && sup > rep.scaled_sup.back() * (1.0 + 1e-9)) rep.nonincreasing = false;
    rep.scaled_sup.push_back(sup);
  }
  return rep;
}

inline void to_json(nlohmann::json& j, const MinimalSolutionSeries& s) {
  j = nlohmann::json{{"psi", s.psi_descriptor},
                     {"psi_k", s.psi_k},
                     {"alpha_k", s.alpha_k},
                     {"lambda_k", s.decomposition.lambda},
                     {"theta", s.decomposition.mesh.theta},
                     {"phi", s.decomposition.phi},
                     {"K", s.terms()},
                     {"projection_error", s.projection_error},
                     {"tail_exponent", s.tail_exponent},
                     {"domain", s.domain()},
                     {"potential", s.decomposition.potential_tag}};
}

inline void to_json(nlohmann::json& j, const LowerBoundReport& r) {
  j = nlohmann::json{{"c", r.c},
                     {"last_decade_variation", r.last_decade_variation},
                     {"truncation_tail", r.truncation_tail},
                     {"pass", r.pass}};
}

inline void to_json(nlohmann::json& j, const TailBoundReport& r) {
  j = nlohmann::json{{"rho", r.rho}, {"constant", r.constant}, {"spread", r.spread}, {"pass", r.pass}};
}

inline void to_json(nlohmann::json& j, const FundamentalUpperReport& r) {
  j = nlohmann::json{{"alpha_1", r.alpha_1},
                     {"fundamental_exponent", r.fundamental_exponent},
                     {"exponent_ok", r.exponent_ok},
                     {"nonincreasing", r.nonincreasing},
                     {"pass", r.pass()}};
}

/// Scan as CSV rows (r, theta, v).
inline void write_scan_csv(std::ostream& os, const MinimalSolutionSeries& s, std::span<const double> radii) {
  os << "r,theta,v\n";
  os.precision(17);
  for (double r : radii) {
    const auto v = evaluate_nodes(s, r);
    for (std::size_t i = 0; i < v.size(); ++i) os << r << ',' << s.decomposition.mesh.theta[i] << ',' << v[i] << '\n';
  }
}

}  // namespace conelab
