#pragma once

// Symmetric tridiagonal eigensolver: Sturm-sequence bisection locates each
// eigenvalue, shifted inverse iteration with deflation against the already
// converged vectors produces the eigenvector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "conelab/errors.hpp"

namespace conelab {

struct SymmetricTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1

  std::size_t size() const noexcept { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  /// Number of eigenvalues strictly below x.
  std::size_t count_below(double x) const {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double coupling = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
      q = diag[i] - x - (i > 0 ? coupling / q : 0.0);
      if (q == 0.0) q = -std::numeric_limits<double>::min();
      if (q < 0.0) ++count;
    }
    return count;
  }

  std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < size(); ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(off[i - 1]);
      if (i + 1 < size()) r += std::abs(off[i]);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }

  /// Solve (T - sigma I) x = b by LDL^T elimination without pivoting.
  std::vector<double> solve_shifted(double sigma, std::span<const double> b) const {
    const std::size_t n = size();
    std::vector<double> d(n), l(n > 0 ? n - 1 : 0), x(b.begin(), b.end());
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = diag[i] - sigma;
      if (i > 0) {
        d[i] -= l[i - 1] * off[i - 1];
      }
      if (std::abs(d[i]) < tiny) d[i] = tiny;
      if (i + 1 < n) l[i] = off[i] / d[i];
    }
    for (std::size_t i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
    for (std::size_t i = n; i-- > 0;) {
      x[i] /= d[i];
      if (i + 1 < n) x[i] -= l[i] * x[i + 1];
    }
    return x;
  }
};

struct EigenOptions {
  double rayleigh_tol = 1e-12;  // relative change of successive Rayleigh quotients
  int max_iterations = 200;
};

struct TridiagonalEigenpairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // Euclidean-orthonormal
  std::vector<int> iterations;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline void normalize(std::vector<double>& x) {
  const double nrm = std::sqrt(dot(x, x));
  for (double& v : x) v /= nrm;
}

inline void deflate(std::vector<double>& x, const std::vector<std::vector<double>>& basis) {
  for (const auto& v : basis) {
    const double c = dot(x, v);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * v[i];
  }
}

/// Bracket the k-th smallest eigenvalue (0-based) by bisection.
inline std::pair<double, double> bisect_eigenvalue(const SymmetricTridiagonal& t, std::size_t k) {
  auto [lo, hi] = t.gershgorin();
  for (int it = 0; it < 256; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(lo) + std::abs(hi))) break;
    if (t.count_below(mid) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {lo, hi};
}

}  // namespace detail

/// The `count` smallest eigenpairs of t, ascending.
inline TridiagonalEigenpairs lowest_eigenpairs(const SymmetricTridiagonal& t, std::size_t count,
                                               const EigenOptions& opts = {}) {
  const std::size_t n = t.size();
  require(count >= 1 && count <= n, "K-too-large", "requested more eigenpairs than unknowns");
  const auto [glo, ghi] = t.gershgorin();
  const double scale = std::max(std::abs(glo), std::abs(ghi));

  TridiagonalEigenpairs out;
  for (std::size_t k = 0; k < count; ++k) {
    const auto [lo, hi] = detail::bisect_eigenvalue(t, k);
    const double offset = 1e-7 * std::max(std::abs(lo), 1e-9 * scale);
    const double sigma = lo - offset;

    std::vector<double> x(n, 1.0);
    detail::deflate(x, out.vectors);
    if (detail::dot(x, x) < 1e-20 * static_cast<double>(n)) {
      for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(0.37 * static_cast<double>(i * (k + 1)));
      detail::deflate(x, out.vectors);
    }
    detail::normalize(x);

    double rq = std::numeric_limits<double>::quiet_NaN();
    int it = 0;
    bool converged = false;
    for (; it < opts.max_iterations; ++it) {
      auto y = t.solve_shifted(sigma, x);
      detail::deflate(y, out.vectors);
      detail::normalize(y);
      x = std::move(y);
      const auto tx = t.apply(x);
      const double next = detail::dot(x, tx);
      // Rayleigh quotients cannot resolve changes below rounding of ||T||.
      const double floor = 16.0 * std::numeric_limits<double>::epsilon() * scale;
      if (!std::isnan(rq) && std::abs(next - rq) <= std::max(opts.rayleigh_tol * std::abs(next), floor)) {
        rq = next;
        converged = true;
        ++it;
        break;
      }
      rq = next;
    }
    if (!converged)
      throw numerical_error("non-convergence", "inverse iteration did not converge; refine the mesh");

    // Deterministic sign: first significant entry positive.
    const double amax = std::abs(*std::max_element(x.begin(), x.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    }));
    for (double v : x) {
      if (std::abs(v) > 1e-8 * amax) {
        if (v < 0.0)
          for (double& w : x) w = -w;
        break;
      }
    }
    out.values.push_back(rq);
    out.vectors.push_back(std::move(x));
    out.iterations.push_back(it);
  }
  return out;
}

}  // namespace conelab
