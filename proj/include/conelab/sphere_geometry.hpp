#pragma once

// Axisymmetric subdomains of S^{N-1} and truncated cones over them.
//
// Only domains invariant under rotations about the x_N axis are supported,
// so every domain is an interval of polar angles theta in [0, pi]. General
// (non-axisymmetric) angular domains are out of reach of this library.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "conelab/errors.hpp"

namespace conelab {

inline constexpr double pi = std::numbers::pi;

enum class DomainKind { full_sphere, cap, band };

/// Open axisymmetric domain: full sphere, polar cap {theta < theta1} or
/// band {theta0 < theta < theta1}. Angles in radians.
class AngularDomain {
 public:
  static AngularDomain full_sphere(int dim) { return AngularDomain(dim, DomainKind::full_sphere, 0.0, pi); }

  static AngularDomain cap(int dim, double theta1) {
    require(theta1 > 0.0 && theta1 <= pi, "invalid-domain", "cap angle must lie in (0, pi]");
    return AngularDomain(dim, DomainKind::cap, 0.0, theta1);
  }

  static AngularDomain band(int dim, double theta0, double theta1) {
    require(theta0 >= 0.0 && theta0 < theta1 && theta1 <= pi, "invalid-domain",
            "band angles must satisfy 0 <= theta0 < theta1 <= pi");
    return AngularDomain(dim, DomainKind::band, theta0, theta1);
  }

  int dim() const noexcept { return dim_; }
  DomainKind kind() const noexcept { return kind_; }
  double theta0() const noexcept { return theta0_; }
  double theta1() const noexcept { return theta1_; }
  double extent() const noexcept { return theta1_ - theta0_; }

  /// A polar endpoint (theta = 0 or pi) carries a regularity condition
  /// instead of a Dirichlet condition.
  bool lower_is_pole() const noexcept { return theta0_ == 0.0; }
  bool upper_is_pole() const noexcept { return theta1_ == pi; }

  bool contains(double theta) const {
    require(theta >= 0.0 && theta <= pi, "invalid-angle", "polar angle must lie in [0, pi]");
    switch (kind_) {
      case DomainKind::full_sphere:
        return true;
      case DomainKind::cap:
        return theta < theta1_;
      case DomainKind::band:
        return theta0_ < theta && theta < theta1_;
    }
    return false;
  }

  /// Closure of `inner` lies inside this (open) domain.
  bool compactly_contains(const AngularDomain& inner) const {
    if (inner.dim_ != dim_) return false;
    if (kind_ == DomainKind::full_sphere) return true;
    const bool lower_ok = lower_is_pole() || inner.theta0_ > theta0_;
    const bool upper_ok = inner.theta1_ < theta1_;
    return lower_ok && upper_ok;
  }

  std::string describe() const {
    switch (kind_) {
      case DomainKind::full_sphere:
        return "full";
      case DomainKind::cap:
        return "cap";
      case DomainKind::band:
        return "band";
    }
    return "?";
  }

  friend bool operator==(const AngularDomain&, const AngularDomain&) = default;

 private:
  AngularDomain(int dim, DomainKind kind, double theta0, double theta1)
      : dim_(dim), kind_(kind), theta0_(theta0), theta1_(theta1) {
    require(dim >= 3, "invalid-domain", "dimension N must be at least 3");
  }

  int dim_;
  DomainKind kind_;
  double theta0_;
  double theta1_;
};

/// Pull every Dirichlet boundary inward by `margin`. The full sphere has no
/// Dirichlet boundary and is returned unchanged; a band touching a pole keeps
/// that endpoint.
inline AngularDomain shrink(const AngularDomain& d, double margin) {
  require(margin > 0.0, "invalid-margin", "shrink margin must be positive");
  switch (d.kind()) {
    case DomainKind::full_sphere:
      return d;
    case DomainKind::cap: {
      const double t1 = d.theta1() - margin;
      if (!(t1 > 0.0)) throw usage_error("empty-result", "shrink margin consumes the cap");
      return AngularDomain::cap(d.dim(), t1);
    }
    case DomainKind::band: {
      const double t0 = d.theta0() == 0.0 ? 0.0 : d.theta0() + margin;
      const double t1 = d.theta1() == pi ? pi : d.theta1() - margin;
      if (!(t0 < t1)) throw usage_error("empty-result", "shrink margin consumes the band");
      return AngularDomain::band(d.dim(), t0, t1);
    }
  }
  return d;
}

/// Shrink by a fraction of the angular extent.
inline AngularDomain shrink_fraction(const AngularDomain& d, double fraction) {
  return shrink(d, fraction * d.extent());
}

/// Truncated cone C_Omega^{(rho,R)} = {rho < |x| < R, x/|x| in Omega}.
struct ConeSection {
  AngularDomain domain;
  double rho;
  double R;

  ConeSection(AngularDomain d, double rho_, double R_ = std::numeric_limits<double>::infinity())
      : domain(d), rho(rho_), R(R_) {
    require(rho > 0.0 && R > rho, "invalid-cone", "cone section needs 0 < rho < R");
  }

  bool is_exterior() const noexcept { return std::isinf(R); }
};

inline void to_json(nlohmann::json& j, const AngularDomain& d) {
  j = nlohmann::json{{"N", d.dim()}, {"kind", d.describe()}};
  if (d.kind() == DomainKind::band) j["theta0"] = d.theta0();
  if (d.kind() != DomainKind::full_sphere) j["theta1"] = d.theta1();
}

inline AngularDomain domain_from_json(const nlohmann::json& j) {
  const int dim = j.at("N").get<int>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "full") return AngularDomain::full_sphere(dim);
  if (kind == "cap") return AngularDomain::cap(dim, j.at("theta1").get<double>());
  if (kind == "band") return AngularDomain::band(dim, j.at("theta0").get<double>(), j.at("theta1").get<double>());
  throw usage_error("invalid-domain", "unknown domain kind '" + kind + "'");
}

}  // namespace conelab
