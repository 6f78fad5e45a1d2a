#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "conelab/errors.hpp"

namespace conelab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<std::tuple<std::size_t, std::size_t, double>>;

/// Duplicate entries are summed.
inline SparseMatrix sparse_from_triplets(std::size_t rows, const Triplets& t) {
  std::vector<Eigen::Triplet<double>> e;
  e.reserve(t.size());
  for (const auto& [r, c, v] : t) e.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  m.setFromTriplets(e.begin(), e.end());
  return m;
}

inline void apply(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) =
      a * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// The block of A + diag(shift) on the rows and columns flagged in `active`.
class ActiveBlock {
 public:
  ActiveBlock(const SparseMatrix& a, std::span<const double> shift, std::span<const char> active)
      : slot_(active.size(), -1) {
    for (std::size_t i = 0; i < active.size(); ++i)
      if (active[i]) {
        slot_[i] = static_cast<Eigen::Index>(nodes_.size());
        nodes_.push_back(i);
      }
    std::vector<Eigen::Triplet<double>> e;
    for (std::size_t i : nodes_) {
      const auto r = slot_[i];
      if (!shift.empty() && shift[i] != 0.0) e.emplace_back(r, r, shift[i]);
      for (SparseMatrix::InnerIterator it(a, static_cast<Eigen::Index>(i)); it; ++it) {
        const auto c = slot_[static_cast<std::size_t>(it.col())];
        if (c >= 0) e.emplace_back(r, c, it.value());
      }
    }
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    block_.resize(n, n);
    block_.setFromTriplets(e.begin(), e.end());
  }

  const Eigen::SparseMatrix<double>& matrix() const { return block_; }

  Eigen::VectorXd gather(std::span<const double> full) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(nodes_.size()));
    for (std::size_t k = 0; k < nodes_.size(); ++k) v[static_cast<Eigen::Index>(k)] = full[nodes_[k]];
    return v;
  }

  void scatter(const Eigen::VectorXd& v, std::span<double> full) const {
    for (std::size_t i = 0; i < full.size(); ++i)
      full[i] = slot_[i] >= 0 ? v[slot_[i]] : 0.0;
  }

 private:
  std::vector<Eigen::Index> slot_;
  std::vector<std::size_t> nodes_;
  Eigen::SparseMatrix<double> block_;
};

/// Jacobi-preconditioned conjugate gradients for (A + diag(shift)) x = b on
/// the rows flagged in `active`; inactive entries of x are held at zero.
inline CgResult conjugate_gradient(const SparseMatrix& a, std::span<const double> shift, std::span<const char> active,
                                   std::span<const double> b, std::span<double> x, double rel_tol = 1e-12,
                                   int max_iter = 0) {
  const ActiveBlock block(a, shift, active);
  const Eigen::VectorXd rhs = block.gather(b);
  if (rhs.norm() == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {};
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(rel_tol);
  if (max_iter > 0) cg.setMaxIterations(max_iter);
  cg.compute(block.matrix());
  const Eigen::VectorXd sol = cg.solveWithGuess(rhs, block.gather(x));
  if (cg.info() != Eigen::Success)
    throw numerical_error("non-convergence", "conjugate gradients did not reach the requested tolerance");
  block.scatter(sol, x);
  return {static_cast<int>(cg.iterations()), cg.error()};
}

/// Sparse LDL^T of the active block, for many right-hand sides.
class ActiveFactor {
 public:
  ActiveFactor(const SparseMatrix& a, std::span<const double> shift, std::span<const char> active)
      : block_(a, shift, active) {
    ldlt_.compute(block_.matrix());
    if (ldlt_.info() != Eigen::Success) throw numerical_error("factorization-failed", "sparse LDL^T failed");
  }

  void solve(std::span<const double> b, std::span<double> x) const { block_.scatter(ldlt_.solve(block_.gather(b)), x); }

 private:
  ActiveBlock block_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace conelab
