#include "mscg/dense.hpp"

#include <limits>
#include <vector>

namespace mscg {

Eigen::SparseMatrix<double> to_sparse(const StencilOperator& a) {
  const Grid2D& g = a.grid();
  const auto n = static_cast<Eigen::Index>(a.size());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(a.size() * 5);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const auto c = static_cast<Eigen::Index>(g.index(i, j));
      const std::size_t cs = g.index(i, j);
      entries.emplace_back(c, c, a.diag()[cs]);
      if (i + 1 < g.nx && a.east()[cs] != 0.0) {
        entries.emplace_back(c, c + 1, a.east()[cs]);
        entries.emplace_back(c + 1, c, a.east()[cs]);
      }
      if (j + 1 < g.ny && a.north()[cs] != 0.0) {
        entries.emplace_back(c, c + g.nx, a.north()[cs]);
        entries.emplace_back(c + g.nx, c, a.north()[cs]);
      }
    }
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

Eigen::MatrixXd to_dense(const StencilOperator& a) { return Eigen::MatrixXd(to_sparse(a)); }

DirectSolver::DirectSolver(const Eigen::MatrixXd& a, bool singular)
    : n_(a.rows()), singular_(singular) {
  if (a.rows() != a.cols()) throw DimensionMismatch("DirectSolver: matrix is not square");
  if (singular_) {
    // A + alpha 1 1^T is SPD when the null space of A is the constants.
    const double alpha = a.diagonal().cwiseAbs().maxCoeff() / static_cast<double>(n_);
    llt_.compute(a + Eigen::MatrixXd::Constant(n_, n_, alpha));
  } else {
    llt_.compute(a);
  }
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("DirectSolver: matrix is not symmetric positive definite");
  }
  if (n_ > 0) {
    // A semidefinite matrix can factor with a pivot at rounding level.
    const double scale = a.diagonal().cwiseAbs().maxCoeff();
    const double pivot = llt_.matrixLLT().diagonal().cwiseAbs().minCoeff();
    const double floor = 10.0 * static_cast<double>(n_) * std::numeric_limits<double>::epsilon();
    if (pivot * pivot <= floor * scale) {
      throw std::runtime_error(
          "DirectSolver: matrix is singular to working precision (pure Neumann operator "
          "without null-space handling?)");
    }
  }
}

void DirectSolver::solve(std::span<const double> b, std::span<double> x) const {
  require_same_size(b.size(), size(), "DirectSolver::solve");
  require_same_size(x.size(), size(), "DirectSolver::solve");
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n_);
  Eigen::Map<Eigen::VectorXd> xv(x.data(), n_);
  if (singular_) {
    const Eigen::VectorXd projected = bv.array() - bv.mean();
    xv = llt_.solve(projected);
    xv.array() -= xv.mean();
  } else {
    xv = llt_.solve(bv);
  }
}

Vector DirectSolver::solve(std::span<const double> b) const {
  Vector x(b.size());
  solve(b, x);
  return x;
}

Vector direct_solve(const Eigen::MatrixXd& a, std::span<const double> b) {
  return DirectSolver(a).solve(b);
}

}  // namespace mscg
