#pragma once

// Radial part of L_d v = 0 for v = R(r) phi1(omega):
//   R'' + ((N-1)/r) R' - (d(r)/r^2) R = 0,
// integrated in t = log r, where it reads  R_tt + (N-2) R_t - d(e^t) R = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <nlohmann/json.hpp>

#include "conelab/errors.hpp"

namespace conelab {

namespace radial {

/// d(r) = alpha (alpha + N - 2), alpha < 2 - N.
struct Constant {
  double alpha;
};

/// d(r) = alpha(alpha+N-2) + (2-N-2 alpha)/log r + 2/log^2 r; solved by r^alpha / log r.
struct LogCorrected {
  double alpha;
};

/// d(r) = A(A+N-2) + Rosc with
///   A = gamma + delta [sin(k loglog r) + k cos(k loglog r)],
///   Rosc = k delta [cos(k loglog r) - k sin(k loglog r)] / log r;
/// solved by r^{gamma + delta sin(k loglog r)}.
struct Oscillating {
  double gamma;
  double delta;
  double k;
};

/// Samples (r_j, d_j), interpolated linearly in log r, held constant outside.
struct Tabulated {
  std::vector<double> r;
  std::vector<double> d;
};

}  // namespace radial

class RadialCoefficient {
 public:
  using Variant = std::variant<radial::Constant, radial::LogCorrected, radial::Oscillating, radial::Tabulated>;

  static RadialCoefficient constant(double alpha, int dim) {
    require(alpha < 2.0 - dim, "invalid-coefficient", "constant gallery needs alpha < 2 - N");
    return RadialCoefficient(radial::Constant{alpha}, dim);
  }

  static RadialCoefficient log_corrected(double alpha, int dim) {
    require(alpha < 2.0 - dim, "invalid-coefficient", "log-corrected gallery needs alpha < 2 - N");
    return RadialCoefficient(radial::LogCorrected{alpha}, dim);
  }

  static RadialCoefficient oscillating(double gamma, double delta, double k, int dim) {
    require(gamma < 2.0 - dim && delta > 0.0 && k > 0.0, "invalid-coefficient",
            "oscillating gallery needs gamma < 2 - N, delta > 0, k > 0");
    require(gamma + delta * std::sqrt(k * k + 1.0) < 2.0 - dim - 1e-12, "invalid-coefficient",
            "oscillating gallery needs gamma + delta sqrt(k^2+1) < 2 - N");
    return RadialCoefficient(radial::Oscillating{gamma, delta, k}, dim);
  }

  static RadialCoefficient tabulated(std::vector<double> r, std::vector<double> d, int dim) {
    require(r.size() >= 2 && r.size() == d.size(), "invalid-coefficient", "tabulated gallery needs matching samples");
    for (std::size_t i = 1; i < r.size(); ++i)
      require(r[i] > r[i - 1] && r[0] > 0.0, "invalid-coefficient", "sample radii must be positive and increasing");
    return RadialCoefficient(radial::Tabulated{std::move(r), std::move(d)}, dim);
  }

  int dim() const noexcept { return dim_; }
  const Variant& variant() const noexcept { return v_; }

  std::string name() const {
    return std::visit(
        [](const auto& c) -> std::string {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, radial::Constant>) return "const-d";
          if constexpr (std::is_same_v<T, radial::LogCorrected>) return "log-d";
          if constexpr (std::is_same_v<T, radial::Oscillating>) return "osc-d";
          return "tabulated";
        },
        v_);
  }

  bool has_closed_form() const { return !std::holds_alternative<radial::Tabulated>(v_); }

  /// Smallest radius at which the coefficient formula is meaningful.
  double validity_radius() const {
    if (std::holds_alternative<radial::Constant>(v_)) return 0.0;
    if (const auto* tab = std::get_if<radial::Tabulated>(&v_)) return tab->r.front();
    return 3.0;
  }

  /// d as a function of t = log r.
  double d_of_t(double t) const {
    const double m = dim_ - 2.0;
    return std::visit(
        [&](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, radial::Constant>) {
            return c.alpha * (c.alpha + m);
          } else if constexpr (std::is_same_v<T, radial::LogCorrected>) {
            return c.alpha * (c.alpha + m) + (-m - 2.0 * c.alpha) / t + 2.0 / (t * t);
          } else if constexpr (std::is_same_v<T, radial::Oscillating>) {
            const double L = std::log(t);
            const double s = std::sin(c.k * L), co = std::cos(c.k * L);
            const double A = c.gamma + c.delta * (s + c.k * co);
            const double rosc = c.k * c.delta * (co - c.k * s) / t;
            return A * (A + m) + rosc;
          } else {
            const double lr = t;
            if (lr <= std::log(c.r.front())) return c.d.front();
            if (lr >= std::log(c.r.back())) return c.d.back();
            const auto it = std::upper_bound(c.r.begin(), c.r.end(), std::exp(lr));
            const std::size_t j = static_cast<std::size_t>(it - c.r.begin());
            const double a = std::log(c.r[j - 1]), b = std::log(c.r[j]);
            const double w = (lr - a) / (b - a);
            return (1.0 - w) * c.d[j - 1] + w * c.d[j];
          }
        },
        v_);
  }

  double d(double r) const { return d_of_t(std::log(r)); }

  /// log of the closed-form solution at t = log r (unnormalized).
  double closed_form_log(double t) const {
    return std::visit(
        [&](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, radial::Constant>) {
            return c.alpha * t;
          } else if constexpr (std::is_same_v<T, radial::LogCorrected>) {
            return c.alpha * t - std::log(t);
          } else if constexpr (std::is_same_v<T, radial::Oscillating>) {
            return t * (c.gamma + c.delta * std::sin(c.k * std::log(t)));
          } else {
            throw usage_error("no-closed-form", "tabulated coefficients have no closed-form solution");
            return 0.0;
          }
        },
        v_);
  }

  /// r R'/R of the closed form.
  double closed_form_exponent(double t) const {
    return std::visit(
        [&](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, radial::Constant>) {
            return c.alpha;
          } else if constexpr (std::is_same_v<T, radial::LogCorrected>) {
            return c.alpha - 1.0 / t;
          } else if constexpr (std::is_same_v<T, radial::Oscillating>) {
            const double L = std::log(t);
            return c.gamma + c.delta * (std::sin(c.k * L) + c.k * std::cos(c.k * L));
          } else {
            throw usage_error("no-closed-form", "tabulated coefficients have no closed-form solution");
            return 0.0;
          }
        },
        v_);
  }

  /// Smaller root of e^2 + (N-2) e - d(t) = 0: the frozen-coefficient
  /// exponent of the decaying branch.
  double dominant_balance_exponent(double t) const {
    const double half = 0.5 * (dim_ - 2);
    const double disc = half * half + d_of_t(t);
    require(disc > 0.0, "never-elliptic", "d(r) below the spectral floor");
    return -half - std::sqrt(disc);
  }

 private:
  RadialCoefficient(Variant v, int dim) : v_(std::move(v)), dim_(dim) {
    require(dim >= 3, "invalid-dimension", "N must be at least 3");
  }

  Variant v_;
  int dim_;
};

inline void to_json(nlohmann::json& j, const RadialCoefficient& c) {
  j = nlohmann::json{{"gallery", c.name()}, {"N", c.dim()}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, radial::Constant> || std::is_same_v<T, radial::LogCorrected>) {
          j["alpha"] = v.alpha;
        } else if constexpr (std::is_same_v<T, radial::Oscillating>) {
          j["gamma"] = v.gamma;
          j["delta"] = v.delta;
          j["k"] = v.k;
        } else {
          j["samples"] = v.r.size();
        }
      },
      c.variant());
}

struct EllipticityWindow {
  double R0 = 3.0;
  double nu = 1.0;
};

/// Range of the decaying-branch exponent of R'' + (N-1)/r R' - d/r^2 R = 0
/// as r -> infinity, and the critical exponents 1 - 2/alpha at its ends.
/// Constant and log-corrected coefficients give a single value.
struct GalleryExponent {
  double alpha_low = 0.0;
  double alpha_high = 0.0;
  double p_low = 0.0;
  double p_high = 0.0;

  bool exact() const noexcept { return alpha_low == alpha_high; }
};

inline GalleryExponent gallery_exponent(const RadialCoefficient& c) {
  const int n = c.dim();
  const auto decaying = [n](double d) {
    const double half = 0.5 * (n - 2);
    const double disc = half * half + d;
    require(disc > 0.0, "never-elliptic", "d below the spectral floor");
    return -half - std::sqrt(disc);
  };
  GalleryExponent g;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, radial::Constant> || std::is_same_v<T, radial::LogCorrected>) {
          g.alpha_low = g.alpha_high = decaying(v.alpha * (v.alpha + n - 2.0));
        } else if constexpr (std::is_same_v<T, radial::Oscillating>) {
          const double amp = v.delta * std::sqrt(1.0 + v.k * v.k);
          g.alpha_low = v.gamma - amp;
          g.alpha_high = v.gamma + amp;
        } else {
          g.alpha_low = g.alpha_high = decaying(v.d.back());
        }
      },
      c.variant());
  g.p_low = 1.0 - 2.0 / g.alpha_low;
  g.p_high = 1.0 - 2.0 / g.alpha_high;
  return g;
}

inline void to_json(nlohmann::json& j, const GalleryExponent& g) {
  j = nlohmann::json{{"alpha_low", g.alpha_low}, {"alpha_high", g.alpha_high}, {"p_low", g.p_low},
                     {"p_high", g.p_high},       {"exact", g.exact()}};
}

/// Smallest scanned radius R0 >= 3 beyond which d(r)/lambda1 stays inside
/// [1/nu, nu], together with that nu. The induced matrix
/// a_d = nu x nu + (d/lambda1)(I - nu x nu) has eigenvalues 1 and d/lambda1.
inline EllipticityWindow ellipticity_window(const RadialCoefficient& c, double lambda1) {
  require(lambda1 > 0.0, "invalid-lambda", "the L_d construction needs lambda1(Omega) > 0");
  std::vector<double> ts;
  if (const auto* tab = std::get_if<radial::Tabulated>(&c.variant())) {
    for (double r : tab->r)
      if (r >= 3.0) ts.push_back(std::log(r));
    if (ts.empty()) ts.push_back(std::log(3.0));
  } else if (std::holds_alternative<radial::Constant>(c.variant())) {
    ts.push_back(std::log(3.0));
  } else {
    // Log-spaced in t.
    const double u0 = std::log(std::log(3.0)), u1 = std::log(690.0);
    constexpr int samples = 20000;
    for (int i = 0; i <= samples; ++i) ts.push_back(std::exp(u0 + (u1 - u0) * i / samples));
  }
  std::size_t first_good = ts.size();
  for (std::size_t i = ts.size(); i-- > 0;) {
    if (c.d_of_t(ts[i]) > 0.0)
      first_good = i;
    else
      break;
  }
  if (first_good == ts.size())
    throw usage_error("never-elliptic", "d(r)/lambda1 does not settle in a positive window");
  EllipticityWindow w{std::max(3.0, std::exp(ts[first_good])), 1.0};
  for (std::size_t i = first_good; i < ts.size(); ++i) {
    const double q = c.d_of_t(ts[i]) / lambda1;
    w.nu = std::max({w.nu, q, 1.0 / q});
  }
  return w;
}

/// Radial solution sampled on a log grid, stored as a normalized state
/// times exp(log_scale).
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> t;          // log r
  std::vector<double> log_scale;  // R = value * exp(log_scale)
  std::vector<double> value;
  std::vector<double> t_derivative;  // dR/dt = r R', same scaling as value

  std::size_t size() const noexcept { return r.size(); }
  double log_R(std::size_t j) const { return std::log(std::abs(value[j])) + log_scale[j]; }
  double R(std::size_t j) const { return value[j] * std::exp(log_scale[j]); }
  double dR(std::size_t j) const { return t_derivative[j] * std::exp(log_scale[j]) / r[j]; }
};

struct IntegrationOptions {
  double tolerance = 1e-10;
  double samples_per_decade = 100.0;
  int max_steps = 10'000'000;
};

namespace detail {

using State = std::array<double, 2>;

/// Dormand-Prince 5(4) from t0 to t1 (either direction) on the linear system
/// y' = [y1, d y0 - (N-2) y1]; the state is rescaled after every interval
/// and the logarithm of the scale accumulated.
class DormandPrince {
 public:
  DormandPrince(const RadialCoefficient& c, const IntegrationOptions& o) : c_(c), o_(o) {}

  void advance(State& y, double& log_scale, double t0, double t1, double& h) const {
    namespace odeint = boost::numeric::odeint;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    if (h == 0.0) h = 1e-3;
    h = dir * std::abs(h);
    auto stepper = odeint::make_controlled(o_.tolerance, o_.tolerance, odeint::runge_kutta_dopri5<State>());
    auto rhs = [this](const State& x, State& dxdt, double t) {
      dxdt = {x[1], c_.d_of_t(t) * x[0] - (c_.dim() - 2.0) * x[1]};
    };
    double t = t0;
    int steps = 0;
    while (dir * (t1 - t) > 0.0) {
      if (++steps > o_.max_steps) throw numerical_error("step-underflow", "too many steps in radial integration");
      if (dir * (t + h - t1) > 0.0) h = t1 - t;
      const double before = t;
      stepper.try_step(rhs, y, t, h);
      if (t != before) {
        if (renormalize(y, log_scale)) stepper.reset();
      } else if (std::abs(h) < 1e-14 * (1.0 + std::abs(t))) {
        throw numerical_error("step-underflow", "radial integration step underflow (stiffness)");
      }
    }
    h = std::abs(h);
    if (!std::isfinite(log_scale) || !std::isfinite(y[0]) || !std::isfinite(y[1]))
      throw numerical_error("overflow", "radial solution left the representable range");
  }

 private:
  static bool renormalize(State& y, double& log_scale) {
    const double m = std::max(std::abs(y[0]), std::abs(y[1]));
    if (!(m > 0.0 && (m > 1e8 || m < 1e-8))) return false;
    y[0] /= m;
    y[1] /= m;
    log_scale += std::log(m);
    return true;
  }

  const RadialCoefficient& c_;
  IntegrationOptions o_;
};

inline std::vector<double> log_grid(double r0, double r1, double per_decade) {
  const double decades = std::log10(r1 / r0);
  const auto n = static_cast<std::size_t>(std::max(2.0, std::ceil(decades * per_decade) + 1.0));
  std::vector<double> t(n);
  const double a = std::log(r0), b = std::log(r1);
  for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  t.back() = b;
  return t;
}

}  // namespace detail

struct RadialInit {
  double R;
  double dR;  // physical derivative R'(r0)
};

/// Outward integration from r0 with the given initial data.
inline RadialProfile integrate_radial(const RadialCoefficient& c, double r0, double r1, RadialInit init,
                                      const IntegrationOptions& opts = {}) {
  require(r1 > r0 && r0 > 0.0, "invalid-range", "need 0 < r0 < r1");
  require(r0 >= c.validity_radius(), "invalid-range", "r0 below the coefficient's validity radius");
  require(init.R != 0.0 || init.dR != 0.0, "invalid-init", "initial data must not vanish identically");
  const auto ts = detail::log_grid(r0, r1, opts.samples_per_decade);
  detail::DormandPrince dp(c, opts);
  detail::State y{init.R, init.dR * r0};
  double log_scale = 0.0, h = 0.0;
  RadialProfile p;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    if (j > 0) dp.advance(y, log_scale, ts[j - 1], ts[j], h);
    p.t.push_back(ts[j]);
    p.r.push_back(std::exp(ts[j]));
    p.log_scale.push_back(log_scale);
    p.value.push_back(y[0]);
    p.t_derivative.push_back(y[1]);
  }
  return p;
}

struct DecayingProfile {
  RadialProfile profile;
  double outer_start = 0.0;             // radius where the inward sweep began
  double contamination_estimate = 0.0;  // relative growing-branch remnant at r1
};

/// Decaying (minimal) branch on [r0, r1], normalized to R(r0) = 1.
///
/// Inward sweep from the frozen-coefficient asymptote beyond r1; the
/// growing component decays like exp(-(e_+ - e_-) * distance in t).
inline DecayingProfile decaying_profile(const RadialCoefficient& c, double r0, double r1,
                                        const IntegrationOptions& opts = {}) {
  require(r1 > r0 && r0 > 0.0, "invalid-range", "need 0 < r0 < r1");
  require(r0 >= c.validity_radius(), "invalid-range", "r0 below the coefficient's validity radius");
  auto ts = detail::log_grid(r0, r1, opts.samples_per_decade);
  const double t1 = ts.back();
  const double half = 0.5 * (c.dim() - 2);
  const double gap = 2.0 * std::sqrt(half * half + c.d_of_t(t1));
  const double buffer = std::max(std::log(10.0), 30.0 / gap);
  const double t_start = t1 + buffer;
  detail::DormandPrince dp(c, opts);
  detail::State y{1.0, c.dominant_balance_exponent(t_start)};
  double log_scale = 0.0, h = 0.0;
  dp.advance(y, log_scale, t_start, t1, h);

  const std::size_t n = ts.size();
  RadialProfile p;
  p.t = ts;
  p.r.resize(n);
  p.log_scale.resize(n);
  p.value.resize(n);
  p.t_derivative.resize(n);
  for (std::size_t j = n; j-- > 0;) {
    if (j + 1 < n) dp.advance(y, log_scale, ts[j + 1], ts[j], h);
    p.r[j] = std::exp(ts[j]);
    p.log_scale[j] = log_scale;
    p.value[j] = y[0];
    p.t_derivative[j] = y[1];
  }
  const double shift = p.log_R(0);
  const double sign = p.value[0] < 0.0 ? -1.0 : 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    p.log_scale[j] -= shift;
    p.value[j] *= sign;
    p.t_derivative[j] *= sign;
  }
  return {std::move(p), std::exp(t_start), std::exp(-gap * buffer)};
}

/// e(r) = r R'(r) / R(r) on the profile grid.
inline std::vector<double> local_exponent(const RadialProfile& p) {
  std::vector<double> e(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p.value[j] > 0.0)) throw usage_error("nonpositive-profile", "local exponent needs a positive profile");
    e[j] = p.t_derivative[j] / p.value[j];
  }
  return e;
}

/// Max over the grid of |L R| r^2 / (|d| R) for the closed-form solution,
/// derivatives by sixth-order central differences in t with the grid step.
inline double closed_form_residual(const RadialCoefficient& c, std::span<const double> radii) {
  require(c.has_closed_form(), "no-closed-form", "coefficient has no closed-form solution");
  require(radii.size() >= 2, "invalid-grid", "residual grid needs at least two radii");
  const double h = std::log(radii[1] / radii[0]);
  static constexpr std::array<double, 7> d1{-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0};
  static constexpr std::array<double, 7> d2{2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0};
  const double m = c.dim() - 2.0;
  double worst = 0.0;
  for (double r : radii) {
    const double t = std::log(r);
    const double f0 = c.closed_form_log(t);
    double first = 0.0, second = 0.0;
    for (int j = -3; j <= 3; ++j) {
      const double g = j == 0 ? 1.0 : std::exp(c.closed_form_log(t + j * h) - f0);
      first += d1[static_cast<std::size_t>(j + 3)] * g;
      second += d2[static_cast<std::size_t>(j + 3)] * g;
    }
    first /= 60.0 * h;
    second /= 180.0 * h * h;
    const double d = c.d_of_t(t);
    worst = std::max(worst, std::abs(second + m * first - d) / std::abs(d));
  }
  return worst;
}

inline std::vector<double> log_spaced(double r0, double r1, double per_decade) {
  auto ts = detail::log_grid(r0, r1, per_decade);
  for (double& t : ts) t = std::exp(t);
  return ts;
}

inline void write_csv(std::ostream& os, const RadialProfile& p) {
  const auto e = local_exponent(p);
  os << "r,logR,R,e\n";
  os.precision(17);
  for (std::size_t j = 0; j < p.size(); ++j)
    os << p.r[j] << ',' << p.log_R(j) << ',' << p.R(j) << ',' << e[j] << '\n';
}

}  // namespace conelab
