#pragma once

// Truncated cones C_Omega^{(rho,R)} in separated (t = log r, theta) form:
// principal Dirichlet eigenvalues of annular sections, the 2-D five-point
// operator with its discrete maximum principle, and Harnack-chain estimates.
//
// Matrix gallery: the identity, and the L_d family
//   L_d = -d^2/dr^2 - ((N-1)/r) d/dr - (d(r)/lambda1) r^{-2} Delta_omega,
// whose matrix has eigenvalues 1 (radial) and d(r)/lambda1 (tangential).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "conelab/angular_spectral.hpp"
#include "conelab/errors.hpp"
#include "conelab/radial_ode.hpp"
#include "conelab/random.hpp"
#include "conelab/sparse.hpp"
#include "conelab/sphere_geometry.hpp"

namespace conelab {

/// Identity, or the L_d operator built from `coefficient` and lambda1(Omega).
struct MatrixModel {
  std::optional<RadialCoefficient> coefficient;
  double lambda1 = 1.0;

  static MatrixModel identity() { return {}; }
  static MatrixModel radial_angular(RadialCoefficient c, double lambda1) {
    require(lambda1 > 0.0, "invalid-lambda", "the L_d construction needs lambda1(Omega) > 0");
    return {std::move(c), lambda1};
  }

  bool is_identity() const noexcept { return !coefficient.has_value(); }

  /// Tangential stiffness multiplier at t = log r.
  double angular_factor(double t) const { return coefficient ? coefficient->d_of_t(t) / lambda1 : 1.0; }

  double min_radius() const { return coefficient ? coefficient->validity_radius() : 0.0; }
};

inline void to_json(nlohmann::json& j, const MatrixModel& m) {
  if (m.is_identity()) {
    j = nlohmann::json{{"matrix", "id"}};
  } else {
    j = nlohmann::json{{"matrix", m.coefficient->name()}, {"coefficient", *m.coefficient}, {"lambda1", m.lambda1}};
  }
}

struct ConeGridOptions {
  std::size_t angular_nodes = 400;
  std::size_t radial_nodes = 400;  // interior nodes per radial eigenproblem
  std::size_t max_modes = 32;
};

/// Smallest Lambda of
///   -r^{1-N} (r^{N-1} R')' + q(log r) r^{-2} R = Lambda R  on (e^ta, e^tb),
/// Dirichlet at both ends, discretized in t with weights e^{(N-2) t}.
template <typename Q>
double radial_dirichlet_eigenvalue(int dim, double ta, double tb, Q&& q, std::size_t nodes) {
  require(nodes >= 16, "mesh-too-coarse", "radial eigenproblem needs at least 16 nodes");
  const double h = (tb - ta) / static_cast<double>(nodes + 1);
  const double m = dim - 2.0;
  SymmetricTridiagonal b;
  b.diag.resize(nodes);
  b.off.resize(nodes - 1);
  std::vector<double> inv_sqrt_mass(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double s = h * static_cast<double>(i + 1);  // t - ta
    const double w = std::exp(m * s);
    inv_sqrt_mass[i] = 1.0 / std::sqrt(w * std::exp(2.0 * s));
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    const double s = h * static_cast<double>(i + 1);
    const double wl = std::exp(m * (s - 0.5 * h)), wr = std::exp(m * (s + 0.5 * h));
    const double k = (wl + wr) / (h * h) + q(ta + s) * std::exp(m * s);
    b.diag[i] = k * inv_sqrt_mass[i] * inv_sqrt_mass[i];
    if (i + 1 < nodes) b.off[i] = -wr / (h * h) * inv_sqrt_mass[i] * inv_sqrt_mass[i + 1];
  }
  const auto pairs = lowest_eigenpairs(b, 1);
  return pairs.values[0] * std::exp(-2.0 * ta);
}

struct AnnularEigenvalue {
  double lambda = 0.0;
  std::size_t argmin_mode = 0;            // 1-based angular mode attaining the minimum
  std::vector<double> mode_values;        // radial eigenvalue per examined mode
  std::vector<double> angular_eigenvalues;
};

/// lambda_1 of -div(a grad) on C_Omega^{(rho, factor rho)} by separation:
/// the minimum over angular modes k of the radial eigenvalue with tangential
/// term lambda_k c(r)/r^2. Modes are examined until the pure tangential lower
/// bound lambda_k min(c/r^2) exceeds the running minimum.
inline AnnularEigenvalue annular_eigenvalue(const SpectralDecomposition& angular, double rho, double factor,
                                            const MatrixModel& matrix, const ConeGridOptions& opts = {}) {
  require(rho > 0.0 && factor > 1.0, "invalid-annulus", "need rho > 0 and factor > 1");
  require(rho >= matrix.min_radius(), "invalid-annulus", "annulus starts below the coefficient's validity radius");
  const int dim = angular.mesh.domain.dim();
  const double ta = std::log(rho), tb = std::log(rho * factor);
  double cmin = std::numeric_limits<double>::infinity();
  if (matrix.is_identity()) {
    cmin = 1.0;
  } else {
    constexpr int scan = 256;
    for (int i = 0; i <= scan; ++i) cmin = std::min(cmin, matrix.angular_factor(ta + (tb - ta) * i / scan));
    require(cmin > 0.0, "never-elliptic", "matrix not elliptic on the annulus");
  }
  AnnularEigenvalue out;
  out.lambda = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < angular.count(); ++k) {
    const double lk = angular.lambda[k];
    const double tangential_floor = lk * cmin * std::exp(-2.0 * tb);
    if (k > 0 && tangential_floor >= out.lambda) break;
    const double value = radial_dirichlet_eigenvalue(
        dim, ta, tb, [&](double t) { return lk * matrix.angular_factor(t); }, opts.radial_nodes);
    out.mode_values.push_back(value);
    out.angular_eigenvalues.push_back(lk);
    if (value < out.lambda) {
      out.lambda = value;
      out.argmin_mode = k + 1;
    }
  }
  return out;
}

inline SpectralDecomposition default_angular_basis(const AngularDomain& domain, const ConeGridOptions& opts) {
  const auto op = assemble(domain, opts.angular_nodes);
  return eigen_basis(op, std::min(opts.max_modes, opts.angular_nodes / 4));
}

inline AnnularEigenvalue annular_eigenvalue(const AngularDomain& domain, double rho, double factor,
                                            const MatrixModel& matrix, const ConeGridOptions& opts = {}) {
  return annular_eigenvalue(default_angular_basis(domain, opts), rho, factor, matrix, opts);
}

struct ScalingRow {
  double rho;
  double lambda;
  double scaled;  // lambda * rho^2
};

struct ScalingCurve {
  std::vector<ScalingRow> rows;
  double spread = 1.0;  // max(scaled) / min(scaled)
};

inline ScalingCurve scaling_curve(const AngularDomain& domain, const MatrixModel& matrix,
                                  std::span<const double> rhos, double factor = 2.0,
                                  const ConeGridOptions& opts = {}) {
  ScalingCurve c;
  if (rhos.empty()) return c;
  for (std::size_t i = 1; i < rhos.size(); ++i)
    require(rhos[i] > rhos[i - 1], "invalid-radii", "radii must be increasing");
  const auto basis = default_angular_basis(domain, opts);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double rho : rhos) {
    const auto ev = annular_eigenvalue(basis, rho, factor, matrix, opts);
    const double scaled = ev.lambda * rho * rho;
    c.rows.push_back({rho, ev.lambda, scaled});
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  c.spread = hi / lo;
  return c;
}

// ---------------------------------------------------------------------------
// Two-dimensional cone mesh.

/// Node (i, j): i indexes radial nodes 0..nt+1 (0 and nt+1 are Dirichlet),
/// j indexes angular slots 0..ntheta+1 (interior nodes are 1..ntheta; slot 0
/// and ntheta+1 hold Dirichlet nodes when that angular end is not a pole).
struct ConeMesh {
  AngularMesh angular;
  std::vector<double> t;  // all radial nodes, uniform in log r
  double ht = 0.0;
  int dim = 3;
  MatrixModel matrix;

  std::size_t radial_count() const noexcept { return t.size(); }
  std::size_t slots() const noexcept { return angular.size() + 2; }
  std::size_t size() const noexcept { return radial_count() * slots(); }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * slots() + j; }

  double theta(std::size_t j) const {
    if (j == 0) return angular.lower_boundary();
    if (j == angular.size() + 1) return angular.upper_boundary();
    return angular.theta[j - 1];
  }

  bool is_interior(std::size_t i, std::size_t j) const noexcept {
    return i > 0 && i + 1 < radial_count() && j > 0 && j <= angular.size();
  }

  /// Dirichlet boundary node (radial ends, or the cap edge).
  bool is_boundary(std::size_t i, std::size_t j) const noexcept {
    const std::size_t n = angular.size();
    if (j >= 1 && j <= n) return i == 0 || i + 1 == radial_count();
    if (i == 0 || i + 1 == radial_count()) return false;  // corners are never referenced
    return (j == 0 && angular.lower_dirichlet) || (j == n + 1 && angular.upper_dirichlet);
  }
};

/// Cone mesh over C_Omega^{(rho, R)} with a given radial step in t; R is
/// snapped to the grid (the snapped value is t.back()).
inline ConeMesh make_cone_mesh_with_step(const AngularDomain& domain, double rho, double R, double ht,
                                         std::size_t angular_nodes, const MatrixModel& matrix) {
  require(rho > 0.0 && R > rho, "invalid-cone", "cone section needs 0 < rho < R");
  require(rho >= matrix.min_radius(), "invalid-cone", "cone starts below the coefficient's validity radius");
  ConeMesh m{make_angular_mesh(domain, angular_nodes), {}, 0.0, domain.dim(), matrix};
  const double span = std::log(R / rho);
  const auto steps = static_cast<std::size_t>(std::max(3.0, std::round(span / ht)));
  m.ht = ht;
  m.t.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) m.t[i] = std::log(rho) + ht * static_cast<double>(i);
  return m;
}

/// Cone mesh with `per_decade` radial intervals per decade (at least 32).
inline ConeMesh make_cone_mesh(const AngularDomain& domain, double rho, double R, std::size_t angular_nodes,
                               double per_decade, const MatrixModel& matrix) {
  require(per_decade >= 32.0, "mesh-too-coarse", "cone meshes need at least 32 radial nodes per decade");
  const double span = std::log(R / rho);
  const auto steps = static_cast<std::size_t>(std::ceil(std::log10(R / rho) * per_decade));
  return make_cone_mesh_with_step(domain, rho, R, span / static_cast<double>(std::max<std::size_t>(steps, 3)),
                                  angular_nodes, matrix);
}

/// Symmetric stiffness S of the bilinear form int grad(u).a.grad(v) dx and
/// lumped mass M of int u v dx, both divided by the common positive factor
/// |S^{N-2}| e^{(N-2) t_0}; rows exist only for interior nodes.
struct ConeOperator {
  ConeMesh mesh;
  SparseMatrix stiffness;
  std::vector<double> mass;       // per node (zero off the interior)
  std::vector<char> interior;     // node flags
  std::vector<char> boundary;     // node flags
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;  // (a, b, weight)
};

inline ConeOperator assemble_cone(const ConeMesh& mesh) {
  const std::size_t nr = mesh.radial_count(), nth = mesh.angular.size(), total = mesh.size();
  const double ht = mesh.ht, hth = mesh.angular.h, m = mesh.dim - 2.0, t0 = mesh.t.front();
  ConeOperator op{mesh, {}, std::vector<double>(total, 0.0), std::vector<char>(total, 0), std::vector<char>(total, 0), {}};
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < mesh.slots(); ++j) {
      op.interior[mesh.index(i, j)] = mesh.is_interior(i, j);
      op.boundary[mesh.index(i, j)] = mesh.is_boundary(i, j);
    }
  // t-edges on interior angular columns.
  for (std::size_t i = 0; i + 1 < nr; ++i) {
    const double w_r = std::exp(m * (0.5 * (mesh.t[i] + mesh.t[i + 1]) - t0));
    for (std::size_t j = 1; j <= nth; ++j)
      op.edges.emplace_back(mesh.index(i, j), mesh.index(i + 1, j), w_r * mesh.angular.weight[j - 1] * hth / ht);
  }
  // theta-edges on interior radial rows; pole edges carry zero weight.
  for (std::size_t i = 1; i + 1 < nr; ++i) {
    const double c = mesh.matrix.angular_factor(mesh.t[i]);
    require(c > 0.0, "never-elliptic", "matrix degenerates on the mesh");
    const double w_r = std::exp(m * (mesh.t[i] - t0));
    for (std::size_t e = 0; e <= nth; ++e) {
      const double w = mesh.angular.edge_weight[e];
      if (w == 0.0) continue;
      op.edges.emplace_back(mesh.index(i, e), mesh.index(i, e + 1), c * w_r * w * ht / hth);
    }
    for (std::size_t j = 1; j <= nth; ++j)
      op.mass[mesh.index(i, j)] = w_r * std::exp(2.0 * mesh.t[i]) * mesh.angular.weight[j - 1] * ht * hth;
  }
  Triplets trip;
  for (const auto& [a, b, w] : op.edges) {
    if (op.interior[a]) {
      trip.emplace_back(a, a, w);
      trip.emplace_back(a, b, -w);
    }
    if (op.interior[b]) {
      trip.emplace_back(b, b, w);
      trip.emplace_back(b, a, -w);
    }
  }
  op.stiffness = sparse_from_triplets(total, trip);
  return op;
}

/// A field over every node of a cone mesh (boundary entries included).
struct DiscreteField {
  std::vector<double> values;

  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
};

/// Solve (S + diag(shift)) u = rhs on interior nodes with Dirichlet data
/// taken from the boundary entries of `u`.
inline CgResult solve_dirichlet(const ConeOperator& op, std::span<const double> shift, std::span<const double> rhs,
                                DiscreteField& u, double rel_tol = 1e-12) {
  const std::size_t n = op.mesh.size();
  std::vector<double> bc(n, 0.0), sbc(n, 0.0), b(n, 0.0), x(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    if (op.boundary[k]) bc[k] = u[k];
  apply(op.stiffness, bc, sbc);
  for (std::size_t k = 0; k < n; ++k)
    if (op.interior[k]) {
      b[k] = (rhs.empty() ? 0.0 : rhs[k]) - sbc[k];
      x[k] = u[k];
    }
  const auto res = conjugate_gradient(op.stiffness, shift, op.interior, b, x, rel_tol);
  for (std::size_t k = 0; k < n; ++k)
    if (op.interior[k]) u[k] = x[k];
  return res;
}

/// Discrete harmonic extension of the boundary entries of `u`.
inline CgResult harmonic_extension(const ConeOperator& op, DiscreteField& u, double rel_tol = 1e-12) {
  return solve_dirichlet(op, {}, {}, u, rel_tol);
}

struct MaximumPrincipleReport {
  bool m_matrix = false;
  bool sampling = false;
  double worst_offdiag = 0.0;       // largest off-diagonal entry (must be <= 0)
  double worst_row_excess = 0.0;    // most negative row sum / diagonal
  double worst_sample_min = 0.0;    // min interior value / max boundary datum
  int trials = 0;

  bool passed() const noexcept { return m_matrix && sampling; }
};

/// M-matrix structure (nonpositive off-diagonals, weak diagonal dominance)
/// plus `trials` solves with random nonnegative boundary data.
inline MaximumPrincipleReport maximum_principle_check(const ConeOperator& op, int trials = 10,
                                                      std::uint64_t seed = 1) {
  MaximumPrincipleReport rep;
  const auto& s = op.stiffness;
  rep.m_matrix = true;
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    if (!op.interior[static_cast<std::size_t>(r)]) continue;
    double diag = 0.0, sum = 0.0;
    for (SparseMatrix::InnerIterator it(s, r); it; ++it) {
      sum += it.value();
      if (it.col() == r) {
        diag = it.value();
      } else {
        rep.worst_offdiag = std::max(rep.worst_offdiag, it.value());
        if (it.value() > 0.0) rep.m_matrix = false;
      }
    }
    if (!(diag > 0.0)) rep.m_matrix = false;
    const double excess = diag > 0.0 ? sum / diag : -1.0;
    rep.worst_row_excess = std::min(rep.worst_row_excess, excess);
    if (excess < -1e-12) rep.m_matrix = false;
  }
  rep.sampling = true;
  rep.trials = trials;
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 gen(sub_seed(seed, static_cast<std::uint64_t>(trial)));
    DiscreteField u{std::vector<double>(op.mesh.size(), 0.0)};
    double gmax = 0.0;
    for (std::size_t k = 0; k < u.values.size(); ++k)
      if (op.boundary[k]) {
        u[k] = uniform01(gen);
        gmax = std::max(gmax, u[k]);
      }
    try {
      harmonic_extension(op, u);
    } catch (const Error&) {
      rep.sampling = false;
      break;
    }
    double umin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.values.size(); ++k)
      if (op.interior[k]) umin = std::min(umin, u[k]);
    worst = std::min(worst, umin / gmax);
    if (umin < -1e-12 * gmax) rep.sampling = false;
  }
  rep.worst_sample_min = trials > 0 ? worst : 0.0;
  return rep;
}

inline MaximumPrincipleReport maximum_principle_check(const ConeMesh& mesh, int trials = 10, std::uint64_t seed = 1) {
  return maximum_principle_check(assemble_cone(mesh), trials, seed);
}

// ---------------------------------------------------------------------------
// Harnack chain.

struct HarnackOptions {
  std::size_t angular_nodes = 64;
  double per_decade = 64.0;
  int trials = 0;  // sampled boundary nodes per level; 0 runs all of them
};

/// inf/sup over the interior nodes of C_{Omega'}^{(3r/4, 7r/2)} for the
/// discrete harmonic functions on C_Omega^{(3r/8, 7r)} with nonnegative
/// Dirichlet data. Every such function is a nonnegative combination of the
/// discrete Poisson kernels P_xi (data = indicator of one boundary node xi),
/// so the infimum over all data equals min_xi inf P_xi / sup P_xi. The kernels
/// examined are all boundary nodes, or `trials` of them drawn from `seed`.
inline double harnack_ratio(const AngularDomain& domain, const AngularDomain& inner, const MatrixModel& matrix,
                            double r, std::uint64_t seed, const HarnackOptions& opts = {}) {
  constexpr double a = 0.75, b = 1.75;
  const double lo = 0.5 * a * r, hi = 4.0 * b * r;
  const double span = std::log(hi / lo);
  const auto steps = static_cast<std::size_t>(std::ceil(std::log10(hi / lo) * opts.per_decade));
  const auto mesh = make_cone_mesh_with_step(domain, lo, hi, span / static_cast<double>(steps), opts.angular_nodes, matrix);
  const auto op = assemble_cone(mesh);
  const double t_lo = std::log(a * r) - 1e-12, t_hi = std::log(2.0 * b * r) + 1e-12;
  std::vector<std::size_t> probe;
  for (std::size_t i = 1; i + 1 < mesh.radial_count(); ++i) {
    if (mesh.t[i] < t_lo || mesh.t[i] > t_hi) continue;
    for (std::size_t j = 1; j <= mesh.angular.size(); ++j)
      if (inner.contains(mesh.theta(j))) probe.push_back(mesh.index(i, j));
  }
  if (probe.empty()) throw usage_error("empty-subdomain", "no mesh nodes inside the Harnack measurement set");
  std::vector<std::size_t> sources;
  for (std::size_t k = 0; k < mesh.size(); ++k)
    if (op.boundary[k]) sources.push_back(k);
  if (opts.trials > 0) {
    std::mt19937_64 gen(seed);
    std::vector<std::size_t> picked;
    for (int trial = 0; trial < opts.trials; ++trial)
      picked.push_back(sources[static_cast<std::size_t>(uniform01(gen) * static_cast<double>(sources.size()))]);
    sources = std::move(picked);
  }
  const ActiveFactor factor(op.stiffness, {}, op.interior);
  const SparseMatrix columns = op.stiffness.transpose();
  double worst = 1.0;
  std::vector<double> rhs(mesh.size(), 0.0), u(mesh.size(), 0.0);
  for (std::size_t src : sources) {
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (SparseMatrix::InnerIterator it(columns, static_cast<Eigen::Index>(src)); it; ++it)
      rhs[static_cast<std::size_t>(it.col())] = -it.value();
    factor.solve(rhs, u);
    double inf = std::numeric_limits<double>::infinity(), sup = 0.0;
    for (std::size_t k : probe) {
      inf = std::min(inf, u[k]);
      sup = std::max(sup, u[k]);
    }
    if (!(sup > 0.0)) throw numerical_error("degenerate-data", "Poisson kernel vanishes on the measurement set");
    worst = std::min(worst, inf / sup);
  }
  return worst;
}

struct HarnackReport {
  double c_s = 1.0;
  double alpha = 0.0;  // log2(c_s)
  std::vector<double> level_ratio;  // ratio per dyadic level
  std::size_t kernels = 0;          // Poisson kernels examined per level (0: all)
  std::uint64_t seed = 0;
};

/// Empirical strong-Harnack constant over dyadic radii r_n = 2^n rho and
/// the resulting lower-bound exponent alpha = log2(C_S). This is an
/// estimate from the discrete problem, not a certificate.
inline HarnackReport harnack_exponent(const AngularDomain& domain, const AngularDomain& inner,
                                      const MatrixModel& matrix, double rho, int levels, std::uint64_t seed,
                                      const HarnackOptions& opts = {}) {
  require(levels >= 3, "invalid-levels", "the Harnack chain needs at least 3 dyadic levels");
  require(domain.compactly_contains(inner), "not-compactly-contained", "Omega' must be compactly inside Omega");
  require(rho > 0.0, "invalid-radius", "rho must be positive");
  HarnackReport rep;
  rep.seed = seed;
  rep.kernels = static_cast<std::size_t>(std::max(opts.trials, 0));
  for (int n = 0; n < levels; ++n) {
    const double r = std::ldexp(rho, n);
    const double ratio = harnack_ratio(domain, inner, matrix, r, sub_seed(seed, static_cast<std::uint64_t>(n)), opts);
    rep.level_ratio.push_back(ratio);
    rep.c_s = std::min(rep.c_s, ratio);
  }
  if (!(rep.c_s > 0.0 && rep.c_s < 1.0))
    throw numerical_error("degenerate-data", "Harnack ratio estimate left (0, 1)");
  rep.alpha = std::log2(rep.c_s);
  return rep;
}

}  // namespace conelab
