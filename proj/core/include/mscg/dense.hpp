#pragma once

/// @file dense.hpp
/// @brief Dense views of stencil operators and the coarsest-level direct
/// solver.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>

#include "mscg/discretization.hpp"

namespace mscg {

Eigen::SparseMatrix<double> to_sparse(const StencilOperator& a);
Eigen::MatrixXd to_dense(const StencilOperator& a);

/// Symmetric (Cholesky) factorisation of a small SPD matrix. With
/// `singular = true` the matrix may be semidefinite with the constant
/// vector as its null space; solves then return the zero-mean solution.
class DirectSolver {
 public:
  DirectSolver() = default;
  /// Throws std::runtime_error if the matrix is not SPD.
  explicit DirectSolver(const Eigen::MatrixXd& a, bool singular = false);

  void solve(std::span<const double> b, std::span<double> x) const;
  [[nodiscard]] Vector solve(std::span<const double> b) const;
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(n_); }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::Index n_ = 0;
  bool singular_ = false;
};

/// One-shot dense solve.
Vector direct_solve(const Eigen::MatrixXd& a, std::span<const double> b);

}  // namespace mscg
