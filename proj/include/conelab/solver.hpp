#pragma once

// Positive solutions of -Delta w = w^p on truncated cones C_Omega^{(1, R)}
// by monotone iteration between an ordered subsolution v and supersolution U.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "conelab/angular_spectral.hpp"
#include "conelab/certificates.hpp"
#include "conelab/cone_grid.hpp"
#include "conelab/errors.hpp"
#include "conelab/exponents.hpp"
#include "conelab/minimal_solutions.hpp"
#include "conelab/sparse.hpp"

namespace conelab {

struct BvpProblem {
  ConeOperator op;
  double p = 2.0;
  DiscreteField v;  // subsolution; its boundary entries are the Dirichlet data
  DiscreteField U;  // supersolution
};

struct SolveOptions {
  double tolerance = 1e-8;       // sup-norm of the pointwise residual
  double linear_tolerance = 1e-12;
  int max_iterations = 5000;
  double shift_factor = 1.1;
  double monotone_slack = 1e-12;
  double order_slack = 1e-10;
};

struct SolveReport {
  DiscreteField w;
  int iterations = 0;
  int linear_iterations = 0;
  double residual = 0.0;
  double min_increment = 0.0;     // most negative w_{k+1} - w_k seen
  double sub_margin = 0.0;        // min (w - v)
  double super_margin = 0.0;      // min (U - w)
  std::vector<double> residual_history;
};

/// Pointwise residual (S w)_i / M_i - w_i^p on interior nodes.
inline double nonlinear_residual(const ConeOperator& op, const DiscreteField& w, double p) {
  std::vector<double> sw(w.values.size(), 0.0);
  apply(op.stiffness, w.values, sw);
  double worst = 0.0;
  for (std::size_t k = 0; k < sw.size(); ++k)
    if (op.interior[k]) worst = std::max(worst, std::abs(sw[k] / op.mass[k] - std::pow(std::max(w[k], 0.0), p)));
  return worst;
}

/// w_{k+1} solves (S + Lambda M) w_{k+1} = M (w_k^p + Lambda w_k) with the
/// Dirichlet data of v, starting at w_0 = v. Lambda_i = shift_factor p U_i^{p-1}
/// keeps s -> s^p + Lambda_i s increasing on [0, U_i], so the iterates
/// increase and stay below U.
inline SolveReport monotone_solve(const BvpProblem& pb, const SolveOptions& opts = {}) {
  const auto& op = pb.op;
  const std::size_t n = op.mesh.size();
  require(pb.p > 1.0, "invalid-exponent", "p must exceed 1");
  require(pb.v.values.size() == n && pb.U.values.size() == n, "size-mismatch", "fields do not match the mesh");
  const int dim = op.mesh.dim;
  if (dim > 2 && pb.p > dim / (dim - 2.0) + 1e-12)
    throw usage_error("outside-constructive-range", "monotone construction needs p <= N/(N-2)");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(op.interior[k] || op.boundary[k])) continue;
    if (pb.v[k] > pb.U[k] + opts.order_slack)
      throw numerical_error("ordering-violation", "subsolution exceeds supersolution");
  }
  if (!maximum_principle_check(op, 0).m_matrix)
    throw usage_error("no-maximum-principle", "mesh operator is not an M-matrix");

  std::vector<double> shift(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    if (op.interior[k]) shift[k] = opts.shift_factor * pb.p * std::pow(std::max(pb.U[k], 0.0), pb.p - 1.0) * op.mass[k];

  SolveReport rep;
  rep.w = pb.v;
  auto& w = rep.w;
  std::vector<double> sw(n), rhs(n), delta(n, 0.0);
  for (int it = 0; it < opts.max_iterations; ++it) {
    apply(op.stiffness, w.values, sw);
    double res = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      rhs[k] = 0.0;
      if (!op.interior[k]) continue;
      const double f = op.mass[k] * std::pow(w[k], pb.p);
      rhs[k] = f - sw[k];
      res = std::max(res, std::abs(rhs[k]) / op.mass[k]);
    }
    rep.residual = res;
    rep.residual_history.push_back(res);
    if (res <= opts.tolerance) break;
    std::fill(delta.begin(), delta.end(), 0.0);
    const auto cg = conjugate_gradient(op.stiffness, shift, op.interior, rhs, delta, opts.linear_tolerance);
    rep.linear_iterations += cg.iterations;
    ++rep.iterations;
    for (std::size_t k = 0; k < n; ++k) {
      if (!op.interior[k]) continue;
      rep.min_increment = std::min(rep.min_increment, delta[k]);
      w[k] += delta[k];
      if (w[k] > pb.U[k] + opts.order_slack * std::max(1.0, pb.U[k]))
        throw numerical_error("ordering-violation", "iterate exceeds the supersolution");
    }
    if (rep.min_increment < -opts.monotone_slack)
      throw numerical_error("monotonicity-violation", "iterates stopped increasing");
    if (it + 1 == opts.max_iterations)
      throw numerical_error("non-convergence", "monotone iteration hit the iteration limit");
  }
  rep.residual = nonlinear_residual(op, w, pb.p);
  if (!(rep.residual <= opts.tolerance))
    throw numerical_error("non-convergence", "final residual above tolerance");
  rep.sub_margin = rep.super_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    if (!op.interior[k]) continue;
    rep.sub_margin = std::min(rep.sub_margin, w[k] - pb.v[k]);
    rep.super_margin = std::min(rep.super_margin, pb.U[k] - w[k]);
  }
  return rep;
}

struct ExhaustionOptions {
  std::size_t angular_nodes = 48;
  double steps_per_log3 = 40.0;   // radial step h = log(3) / steps_per_log3
  std::size_t K = 8;
  double super_fraction = 0.9;    // U = super_fraction * c_max r^beta phi1
  double data_fraction = 0.5;     // inner data s psi, s = data_fraction * min(U/psi)
  double inner_region = 3.0;      // stabilization measured on 1 <= r <= inner_region
  SolveOptions solve;
};

/// Ordered pair and data for level R: U = f c_max r^beta phi1; boundary data
/// s psi at r = 1 and s v_psi(R) at r = R; v the discrete harmonic extension.
inline BvpProblem build_problem(const AngularDomain& domain, double p, double R, const MinimalSolutionSeries& series,
                                double cmax, const ExhaustionOptions& opts) {
  const double h = std::log(3.0) / opts.steps_per_log3;
  auto mesh = make_cone_mesh_with_step(domain, 1.0, R, h, opts.angular_nodes, MatrixModel::identity());
  BvpProblem pb{assemble_cone(mesh), p, {}, {}};
  const auto& m = pb.op.mesh;
  pb.U = power_candidate(m, opts.super_fraction * cmax, homogeneity_exponent(p));
  const std::size_t last = m.radial_count() - 1;
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= m.angular.size(); ++j)
    if (series.psi[j - 1] > 0.0) s = std::min(s, pb.U[m.index(0, j)] / series.psi[j - 1]);
  s *= opts.data_fraction;
  pb.v.values.assign(m.size(), 0.0);
  const auto outer = evaluate_nodes(series, std::exp(m.t[last]));
  for (std::size_t j = 1; j <= m.angular.size(); ++j) {
    pb.v[m.index(0, j)] = s * series.psi[j - 1];
    pb.v[m.index(last, j)] = s * outer[j - 1];
  }
  harmonic_extension(pb.op, pb.v);
  return pb;
}

struct ExhaustionReport {
  std::vector<double> radii;  // snapped truncation radii
  std::vector<SolveReport> levels;
  std::vector<double> differences;  // max inner-region |w_n - w_{n+1}|
  std::vector<double> ratios;       // differences[n+1] / differences[n]
  double cmax = 0.0;

  bool stabilizing() const {
    return std::all_of(ratios.begin(), ratios.end(), [](double r) { return r < 1.0; });
  }
};

inline ExhaustionReport exhaustion_solve(const AngularDomain& domain, double p, std::span<const double> radii,
                                         const ExhaustionOptions& opts = {}) {
  require(radii.size() >= 3, "too-few-levels", "exhaustion needs at least 3 truncation levels");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] > radii[i - 1] && radii[0] > 1.0, "invalid-radii", "radii must exceed 1 and increase");
  const auto op = assemble(domain, opts.angular_nodes);
  const auto basis = eigen_basis(op, std::min(opts.K + 1, opts.angular_nodes / 4));
  const auto series = build_series(basis, Bump::for_domain(domain), std::min(opts.K, basis.count()));
  const double lambda1 = principal_eigenpair(op).lambda;
  ExhaustionReport rep;
  rep.cmax = supersolution_amplitude(p, lambda1, domain.dim(), 1.0);
  std::vector<ConeMesh> meshes;
  for (double R : radii) {
    auto pb = build_problem(domain, p, R, series, rep.cmax, opts);
    rep.radii.push_back(std::exp(pb.op.mesh.t.back()));
    rep.levels.push_back(monotone_solve(pb, opts.solve));
    meshes.push_back(pb.op.mesh);
  }
  const double t_in = std::log(opts.inner_region) + 1e-9;
  for (std::size_t l = 0; l + 1 < meshes.size(); ++l) {
    const auto& a = meshes[l];
    double diff = 0.0;
    for (std::size_t i = 1; i + 1 < a.radial_count() && a.t[i] <= t_in; ++i)
      for (std::size_t j = 1; j <= a.angular.size(); ++j) {
        const std::size_t ka = a.index(i, j), kb = meshes[l + 1].index(i, j);
        diff = std::max(diff, std::abs(rep.levels[l].w[ka] - rep.levels[l + 1].w[kb]));
      }
    rep.differences.push_back(diff);
  }
  for (std::size_t l = 0; l + 1 < rep.differences.size(); ++l)
    rep.ratios.push_back(rep.differences[l + 1] / rep.differences[l]);
  return rep;
}

inline void write_csv(std::ostream& os, const ConeMesh& mesh, const DiscreteField& w) {
  os << "r,theta,w\n";
  os.precision(17);
  for (std::size_t i = 0; i < mesh.radial_count(); ++i)
    for (std::size_t j = 1; j <= mesh.angular.size(); ++j)
      os << std::exp(mesh.t[i]) << ',' << mesh.theta(j) << ',' << w[mesh.index(i, j)] << '\n';
}

inline nlohmann::json to_summary(const SolveReport& r) {
  return {{"residual", r.residual},        {"iterations", r.iterations}, {"linear_iterations", r.linear_iterations},
          {"min_increment", r.min_increment}, {"sub_margin", r.sub_margin}, {"super_margin", r.super_margin}};
}

inline void to_json(nlohmann::json& j, const ExhaustionReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) levels.push_back(to_summary(l));
  j = nlohmann::json{{"radii", r.radii},   {"levels", levels}, {"differences", r.differences},
                     {"ratios", r.ratios}, {"cmax", r.cmax},   {"stabilizing", r.stabilizing()}};
}

}  // namespace conelab
