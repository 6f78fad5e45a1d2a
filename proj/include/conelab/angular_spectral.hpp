#pragma once

// Dirichlet eigenproblem for -Delta_omega - V(theta) on an axisymmetric
// angular domain. The Laplace-Beltrami operator reduces to
//   -(1/sin^{N-2}) d/dtheta ( sin^{N-2} d/dtheta )
// which is discretized in divergence form on a uniform theta grid.
//
// Grid layout: at a Dirichlet endpoint the boundary node sits one step h
// outside the first interior node; at a pole the first node sits h/2 away,
// so the half-node weight sin^{N-2} vanishes exactly there (mirror ghost).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conelab/errors.hpp"
#include "conelab/sphere_geometry.hpp"
#include "conelab/tridiagonal.hpp"

namespace conelab {

/// Surface measure of S^{N-2}, the orbit of a point under rotations about x_N.
inline double orbit_measure(int dim) {
  const double k = 0.5 * (dim - 1);
  return 2.0 * std::pow(pi, k) / std::tgamma(k);
}

struct AngularMesh {
  AngularDomain domain;
  double h = 0.0;
  std::vector<double> theta;        // interior nodes, increasing
  std::vector<double> weight;       // sin^{N-2}(theta_i)
  std::vector<double> edge_weight;  // n+1 half-node weights; [i] sits left of node i
  bool lower_dirichlet = true;
  bool upper_dirichlet = true;

  std::size_t size() const noexcept { return theta.size(); }
  double lower_boundary() const { return theta.front() - (lower_dirichlet ? h : 0.5 * h); }
  double upper_boundary() const { return theta.back() + (upper_dirichlet ? h : 0.5 * h); }

  /// Weighted L^2(Omega) inner product, orbit measure included.
  double inner(std::span<const double> f, std::span<const double> g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weight[i] * f[i] * g[i];
    return orbit_measure(domain.dim()) * h * s;
  }

  /// Discrete Dirichlet form of the angular gradient, orbit measure included.
  double dirichlet_form(std::span<const double> f, std::span<const double> g) const {
    const std::size_t n = size();
    double s = 0.0;
    for (std::size_t e = 0; e <= n; ++e) {
      const double fl = e > 0 ? f[e - 1] : (lower_dirichlet ? 0.0 : f[0]);
      const double gl = e > 0 ? g[e - 1] : (lower_dirichlet ? 0.0 : g[0]);
      const double fr = e < n ? f[e] : (upper_dirichlet ? 0.0 : f[n - 1]);
      const double gr = e < n ? g[e] : (upper_dirichlet ? 0.0 : g[n - 1]);
      s += edge_weight[e] * (fr - fl) * (gr - gl);
    }
    return orbit_measure(domain.dim()) * s / h;
  }
};

inline AngularMesh make_angular_mesh(const AngularDomain& domain, std::size_t n) {
  if (n < 16) throw usage_error("mesh-too-coarse", "angular mesh needs at least 16 nodes");
  AngularMesh m{domain, 0.0, {}, {}, {}};
  m.lower_dirichlet = !domain.lower_is_pole();
  m.upper_dirichlet = !domain.upper_is_pole();
  const double len = domain.extent();
  const double nd = static_cast<double>(n);
  // Distance from endpoint to first node: h (Dirichlet) or h/2 (pole).
  const double slots = nd - 1.0 + (m.lower_dirichlet ? 1.0 : 0.5) + (m.upper_dirichlet ? 1.0 : 0.5);
  m.h = len / slots;
  const double first = domain.theta0() + (m.lower_dirichlet ? m.h : 0.5 * m.h);
  const int p = domain.dim() - 2;
  m.theta.resize(n);
  m.weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.theta[i] = first + static_cast<double>(i) * m.h;
    m.weight[i] = std::pow(std::sin(m.theta[i]), p);
  }
  m.edge_weight.resize(n + 1);
  for (std::size_t e = 0; e <= n; ++e) {
    const double at = first + (static_cast<double>(e) - 0.5) * m.h;
    m.edge_weight[e] = std::pow(std::abs(std::sin(at)), p);
  }
  if (!m.lower_dirichlet) m.edge_weight.front() = 0.0;
  if (!m.upper_dirichlet) m.edge_weight.back() = 0.0;
  return m;
}

/// How a potential is specified independently of any mesh: zero, or
/// epsilon times the indicator of a subdomain.
struct PotentialSpec {
  double epsilon = 0.0;
  std::optional<AngularDomain> support;

  static PotentialSpec zero() { return {}; }
  static PotentialSpec indicator(double eps, AngularDomain sub) { return {eps, sub}; }

  double operator()(double theta) const {
    if (!support || epsilon == 0.0) return 0.0;
    return support->contains(theta) ? epsilon : 0.0;
  }

  std::string tag() const {
    if (!support || epsilon == 0.0) return "zero";
    return "eps*indicator";
  }
};

struct AngularPotential {
  std::vector<double> values;
  std::string tag = "zero";

  static AngularPotential zero(const AngularMesh& m) { return {std::vector<double>(m.size(), 0.0), "zero"}; }

  static AngularPotential sample(const AngularMesh& m, const PotentialSpec& spec) {
    AngularPotential v{std::vector<double>(m.size()), spec.tag()};
    for (std::size_t i = 0; i < m.size(); ++i) v.values[i] = spec(m.theta[i]);
    return v;
  }

  double max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
};

/// Assembled discrete operator in symmetric standard form
/// B = W^{-1/2} K W^{-1/2}, where K is the stiffness matrix and W the node
/// weights; eigenvectors of B map to eigenfunctions via phi = W^{-1/2} y.
struct AngularOperator {
  AngularMesh mesh;
  AngularPotential potential;
  SymmetricTridiagonal standard;
  std::vector<double> inv_sqrt_weight;

  std::vector<double> to_function(std::span<const double> y) const {
    std::vector<double> phi(y.size());
    const double scale = 1.0 / std::sqrt(orbit_measure(mesh.domain.dim()) * mesh.h);
    for (std::size_t i = 0; i < y.size(); ++i) phi[i] = y[i] * inv_sqrt_weight[i] * scale;
    return phi;
  }
};

inline AngularOperator assemble(const AngularDomain& domain, std::size_t n, const PotentialSpec& spec = {}) {
  auto mesh = make_angular_mesh(domain, n);
  auto pot = AngularPotential::sample(mesh, spec);
  for (double v : pot.values)
    require(std::isfinite(v) && v >= 0.0, "invalid-potential", "potential must be finite and nonnegative");
  const double h2 = mesh.h * mesh.h;
  AngularOperator op{mesh, pot, {}, {}};
  op.standard.diag.resize(n);
  op.standard.off.resize(n - 1);
  op.inv_sqrt_weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) op.inv_sqrt_weight[i] = 1.0 / std::sqrt(mesh.weight[i]);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = (mesh.edge_weight[i] + mesh.edge_weight[i + 1]) / h2;
    op.standard.diag[i] = k / mesh.weight[i] - pot.values[i];
    if (i + 1 < n)
      op.standard.off[i] = -mesh.edge_weight[i + 1] / h2 * op.inv_sqrt_weight[i] * op.inv_sqrt_weight[i + 1];
  }
  return op;
}

struct Eigenpair {
  double lambda = 0.0;
  std::vector<double> phi;  // L^2(Omega)-normalized, positive
  int iterations = 0;
};

inline Eigenpair principal_eigenpair(const AngularOperator& op, const EigenOptions& opts = {}) {
  auto pairs = lowest_eigenpairs(op.standard, 1, opts);
  return {pairs.values[0], op.to_function(pairs.vectors[0]), pairs.iterations[0]};
}

/// Ordered Dirichlet eigenpairs of -Delta_omega - V, orthonormal in L^2(Omega).
struct SpectralDecomposition {
  AngularMesh mesh;
  std::string potential_tag = "zero";
  std::vector<double> lambda;
  std::vector<std::vector<double>> phi;
  std::vector<double> potential;  // V at the nodes

  std::size_t count() const noexcept { return lambda.size(); }

  /// Linear interpolation between nodes; zero at Dirichlet ends, flat
  /// extension to a pole.
  double interpolate(std::size_t k, double theta) const {
    return interpolate_samples(phi.at(k), theta);
  }

  double interpolate_samples(std::span<const double> f, double theta) const {
    const double lo = mesh.lower_boundary();
    const double hi = mesh.upper_boundary();
    if (theta < lo - 1e-12 || theta > hi + 1e-12)
      throw usage_error("out-of-domain", "theta outside the angular domain");
    const std::size_t n = mesh.size();
    const double s = (theta - mesh.theta.front()) / mesh.h;
    if (s <= 0.0) {
      if (!mesh.lower_dirichlet) return f[0];
      const double w = 1.0 + s;  // s in [-1, 0]
      return std::max(w, 0.0) * f[0];
    }
    const double last = static_cast<double>(n - 1);
    if (s >= last) {
      if (!mesh.upper_dirichlet) return f[n - 1];
      const double w = 1.0 - (s - last);
      return std::max(w, 0.0) * f[n - 1];
    }
    const auto i = static_cast<std::size_t>(s);
    const double frac = s - static_cast<double>(i);
    return (1.0 - frac) * f[i] + frac * f[i + 1];
  }
};

inline SpectralDecomposition eigen_basis(const AngularOperator& op, std::size_t K, const EigenOptions& opts = {}) {
  if (K < 1 || K > op.mesh.size() / 4)
    throw usage_error("K-too-large", "K must satisfy 1 <= K <= n/4");
  auto pairs = lowest_eigenpairs(op.standard, K, opts);
  SpectralDecomposition d{op.mesh, op.potential.tag, pairs.values, {}, op.potential.values};
  for (const auto& y : pairs.vectors) d.phi.push_back(op.to_function(y));
  return d;
}

/// Principal eigenvalue from two meshes (n, 2n) with h^2 Richardson extrapolation.
struct PrincipalEstimate {
  double lambda = 0.0;
  double lambda_coarse = 0.0;
  double lambda_fine = 0.0;
  std::size_t n_coarse = 0;
  std::size_t n_fine = 0;
  double h_coarse = 0.0;
  double h_fine = 0.0;
  Eigenpair fine;  // eigenfunction on the fine mesh
  AngularMesh fine_mesh;
  bool exact = false;  // lambda known in closed form (constants on the whole sphere)
};

inline PrincipalEstimate richardson_principal(const AngularDomain& domain, std::size_t n_coarse,
                                              const PotentialSpec& spec = {}, const EigenOptions& opts = {}) {
  const auto coarse_op = assemble(domain, n_coarse, spec);
  const auto fine_op = assemble(domain, 2 * n_coarse, spec);
  const auto coarse = principal_eigenpair(coarse_op, opts);
  auto fine = principal_eigenpair(fine_op, opts);
  const double hc2 = coarse_op.mesh.h * coarse_op.mesh.h;
  const double hf2 = fine_op.mesh.h * fine_op.mesh.h;
  PrincipalEstimate est{(hc2 * fine.lambda - hf2 * coarse.lambda) / (hc2 - hf2),
                        coarse.lambda,
                        fine.lambda,
                        n_coarse,
                        2 * n_coarse,
                        coarse_op.mesh.h,
                        fine_op.mesh.h,
                        std::move(fine),
                        fine_op.mesh,
                        false};
  if (domain.kind() == DomainKind::full_sphere && spec.tag() == "zero") {
    est.lambda = 0.0;
    est.exact = true;
  }
  return est;
}

struct Projection {
  std::vector<double> coefficients;
  double truncation_error = 0.0;  // weighted L^2 norm of psi - sum psi_k phi_k
  double psi_norm = 0.0;
};

/// Coefficients psi_k = <psi, phi_k> of a function given at the interior nodes.
inline Projection project_samples(const SpectralDecomposition& d, std::span<const double> psi) {
  require(psi.size() == d.mesh.size(), "size-mismatch", "psi must be sampled at the mesh nodes");
  Projection p;
  std::vector<double> rest(psi.begin(), psi.end());
  for (std::size_t k = 0; k < d.count(); ++k) {
    const double c = d.mesh.inner(psi, d.phi[k]);
    p.coefficients.push_back(c);
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= c * d.phi[k][i];
  }
  p.truncation_error = std::sqrt(std::max(d.mesh.inner(rest, rest), 0.0));
  p.psi_norm = std::sqrt(d.mesh.inner(psi, psi));
  return p;
}

/// As project_samples, but psi is a function of theta and must vanish on
/// every Dirichlet boundary of the domain.
inline Projection project(const SpectralDecomposition& d, const std::function<double(double)>& psi) {
  std::vector<double> samples(d.mesh.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = psi(d.mesh.theta[i]);
    peak = std::max(peak, std::abs(samples[i]));
  }
  const double tol = 1e-12 * std::max(peak, 1.0);
  if (d.mesh.lower_dirichlet && std::abs(psi(d.mesh.lower_boundary())) > tol)
    throw usage_error("support-violation", "psi does not vanish at the lower Dirichlet boundary");
  if (d.mesh.upper_dirichlet && std::abs(psi(d.mesh.upper_boundary())) > tol)
    throw usage_error("support-violation", "psi does not vanish at the upper Dirichlet boundary");
  return project_samples(d, samples);
}

/// Smooth nonnegative bump cos^2(pi s / 2), s = |theta - center| / half_width,
/// supported on shrink(Omega, width_fraction * extent).
struct Bump {
  double center = 0.0;
  double half_width = 1.0;
  double width_fraction = 0.2;
  double amplitude = 1.0;

  double operator()(double theta) const {
    const double s = std::abs(theta - center) / half_width;
    if (s >= 1.0) return 0.0;
    const double c = std::cos(0.5 * pi * s);
    return amplitude * c * c;
  }

  static Bump for_domain(const AngularDomain& d, double width_fraction = 0.2) {
    Bump b;
    b.width_fraction = width_fraction;
    if (d.kind() == DomainKind::full_sphere) {
      b.center = 0.0;
      b.half_width = (1.0 - width_fraction) * pi;
      return b;
    }
    const auto s = shrink_fraction(d, width_fraction);
    if (s.theta0() == 0.0) {
      b.center = 0.0;
      b.half_width = s.theta1();
    } else if (s.theta1() == pi) {
      b.center = pi;
      b.half_width = pi - s.theta0();
    } else {
      b.center = 0.5 * (s.theta0() + s.theta1());
      b.half_width = 0.5 * (s.theta1() - s.theta0());
    }
    return b;
  }
};

inline void to_json(nlohmann::json& j, const Bump& b) {
  j = nlohmann::json{{"shape", "cos^2"},
                     {"center", b.center},
                     {"half_width", b.half_width},
                     {"width_fraction", b.width_fraction},
                     {"amplitude", b.amplitude}};
}

inline void to_json(nlohmann::json& j, const SpectralDecomposition& d) {
  j = nlohmann::json{{"lambda", d.lambda}, {"phi", d.phi}, {"theta", d.mesh.theta}, {"K", d.count()},
                     {"domain", d.mesh.domain}, {"potential", d.potential_tag}, {"nodes", d.mesh.size()}};
}

inline void write_csv(std::ostream& os, const SpectralDecomposition& d) {
  os << "theta";
  for (std::size_t k = 0; k < d.count(); ++k) os << ",phi" << k + 1;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < d.mesh.size(); ++i) {
    os << d.mesh.theta[i];
    for (std::size_t k = 0; k < d.count(); ++k) os << ',' << d.phi[k][i];
    os << '\n';
  }
}

}  // namespace conelab
