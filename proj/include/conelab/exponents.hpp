#pragma once

// Algebra of the characteristic equation alpha (alpha + N - 2) = lambda and
// the critical exponent p* = 1 - 2 / alpha_minus.

#include <cmath>

#include <nlohmann/json.hpp>

#include "conelab/errors.hpp"

namespace conelab {

/// Lower edge of the admissible spectrum, -(N-2)^2/4.
inline double spectral_floor(int dim) {
  const double m = 0.5 * (dim - 2);
  return -m * m;
}

struct CharacteristicRoots {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double lambda = 0.0;
  int dim = 3;
};

inline CharacteristicRoots characteristic_roots(double lambda, int dim) {
  require(dim >= 3, "invalid-dimension", "N must be at least 3");
  if (!(lambda > spectral_floor(dim)))
    throw usage_error("below-spectral-floor", "lambda must exceed -(N-2)^2/4 for real distinct roots");
  // alpha^2 + b alpha - lambda = 0 with b = N - 2 >= 1. The larger-magnitude
  // root is -(b/2) - sqrt(...); the other follows from alpha_- alpha_+ = -lambda.
  const double half_b = 0.5 * (dim - 2);
  const double disc = std::sqrt(half_b * half_b + lambda);
  const double big = -half_b - disc;
  const double small = -lambda / big;
  return {big, small, lambda, dim};
}

struct ExponentReport {
  double lambda1 = 0.0;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double p_star = 0.0;
  nlohmann::json domain;
};

inline double critical_exponent_from_alpha(double alpha_minus) {
  require(alpha_minus < 0.0, "invalid-root", "alpha_minus must be negative");
  return 1.0 - 2.0 / alpha_minus;
}

inline ExponentReport critical_exponent(const CharacteristicRoots& roots, nlohmann::json domain = nullptr) {
  return {roots.lambda, roots.alpha_minus, roots.alpha_plus, critical_exponent_from_alpha(roots.alpha_minus),
          std::move(domain)};
}

/// beta = 2/(1-p), the homogeneity exponent of c r^beta under u -> u^p.
inline double homogeneity_exponent(double p) {
  require(p > 1.0, "invalid-exponent", "p must exceed 1");
  return 2.0 / (1.0 - p);
}

/// Gap lambda1 - beta (beta + N - 2) of the radial-angular reduction
///   -Delta(c r^beta phi1) = c r^{beta-2} (lambda1 - beta(beta+N-2)) phi1.
inline double supersolution_gap(double p, double lambda1, int dim) {
  const double beta = homogeneity_exponent(p);
  return lambda1 - beta * (beta + dim - 2);
}

/// Largest c making c r^beta phi1 a supersolution of -Delta u = u^p, for a
/// phi1 with maximum phi1_sup.
inline double supersolution_amplitude(double p, double lambda1, int dim, double phi1_sup) {
  require(phi1_sup > 0.0, "invalid-amplitude", "phi1_sup must be positive");
  const double gap = supersolution_gap(p, lambda1, dim);
  if (!(gap > 0.0)) throw usage_error("subcritical", "p <= p*: no supersolution of power form exists");
  return std::pow(gap, 1.0 / (p - 1.0)) / phi1_sup;
}

inline void to_json(nlohmann::json& j, const CharacteristicRoots& r) {
  j = nlohmann::json{{"lambda", r.lambda}, {"N", r.dim}, {"alpha_minus", r.alpha_minus}, {"alpha_plus", r.alpha_plus}};
}

inline void to_json(nlohmann::json& j, const ExponentReport& r) {
  j = nlohmann::json{{"lambda1", r.lambda1},
                     {"alpha_minus", r.alpha_minus},
                     {"alpha_plus", r.alpha_plus},
                     {"p_star", r.p_star},
                     {"domain", r.domain}};
}

}  // namespace conelab
