#include "mscg/splitting.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

#include "mscg/dense.hpp"

namespace mscg {

Splitting::Splitting(std::shared_ptr<const StencilOperator> op, SplittingKind kind)
    : op_(std::move(op)), kind_(kind) {
  if (!op_) throw std::invalid_argument("Splitting: null operator");
  inv_diag_.resize(op_->size());
  for (std::size_t c = 0; c < inv_diag_.size(); ++c) {
    const double d = op_->diag()[c];
    if (d == 0.0 || !std::isfinite(d)) {
      throw std::invalid_argument("Splitting: zero diagonal entry at cell " + std::to_string(c));
    }
    inv_diag_[c] = 1.0 / d;
  }
}

void Splitting::apply_p_inverse_inplace(std::span<double> v) const {
  require_same_size(v.size(), inv_diag_.size(), "apply_p_inverse");
  const double* inv = inv_diag_.data();
  if (kind_ == SplittingKind::kModifiedJacobi) {
    for (std::size_t c = 0; c < v.size(); ++c) v[c] *= 0.5 * inv[c];
    return;
  }
  const std::size_t n = v.size();
  const std::size_t nx = static_cast<std::size_t>(op_->grid().nx);
  const double* e = op_->east().data();
  const double* no = op_->north().data();
  // (D + L) z = v
  for (std::size_t c = 0; c < n; ++c) {
    double s = v[c];
    if (c > 0) s -= e[c - 1] * v[c - 1];
    if (c >= nx) s -= no[c - nx] * v[c - nx];
    v[c] = s * inv[c];
  }
  // (D + U) w = D z
  for (std::size_t c = n; c-- > 0;) {
    double s = 0.0;
    if (c + 1 < n) s += e[c] * v[c + 1];
    if (c + nx < n) s += no[c] * v[c + nx];
    v[c] -= s * inv[c];
  }
}

Vector Splitting::apply_p_inverse(std::span<const double> v) const {
  Vector out(v.begin(), v.end());
  apply_p_inverse_inplace(out);
  return out;
}

void Splitting::apply_smoother(std::span<const double> v, std::span<double> out) const {
  op_->apply(v, out);
  apply_p_inverse_inplace(out);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = v[c] - out[c];
}

Vector Splitting::apply_smoother(std::span<const double> v) const {
  Vector out(v.size());
  apply_smoother(v, out);
  return out;
}

void Splitting::apply_smoother_transpose(std::span<const double> v,
                                         std::span<double> out) const {
  Vector tmp(v.begin(), v.end());
  apply_p_inverse_inplace(tmp);
  op_->apply(tmp, out);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = v[c] - out[c];
}

double verify_splitting(const Splitting& s) {
  const StencilOperator& a = s.op();
  if (a.size() > 4096) {
    throw std::invalid_argument("verify_splitting: N = " + std::to_string(a.size()) +
                                " exceeds the dense limit of 4096");
  }
  using Sparse = Eigen::SparseMatrix<double>;
  const Sparse full = to_sparse(a);
  const Sparse lower = full.triangularView<Eigen::StrictlyLower>();
  const Sparse upper = full.triangularView<Eigen::StrictlyUpper>();
  Sparse d(full.rows(), full.cols());
  Sparse d_inv(full.rows(), full.cols());
  d.reserve(Eigen::VectorXi::Constant(full.cols(), 1));
  d_inv.reserve(Eigen::VectorXi::Constant(full.cols(), 1));
  for (Eigen::Index c = 0; c < full.rows(); ++c) {
    d.insert(c, c) = a.diag()[static_cast<std::size_t>(c)];
    d_inv.insert(c, c) = 1.0 / a.diag()[static_cast<std::size_t>(c)];
  }

  Sparse p;
  Sparse q;
  if (s.kind() == SplittingKind::kSymmetricGaussSeidel) {
    const Sparse dl = d + lower;
    const Sparse du = d + upper;
    p = Sparse(dl * d_inv) * du;
    q = Sparse(lower * d_inv) * upper;
  } else {
    p = 2.0 * d;
    q = d - lower - upper;
  }
  const Eigen::MatrixXd diff = Eigen::MatrixXd(p) - Eigen::MatrixXd(q) - Eigen::MatrixXd(full);
  return diff.cwiseAbs().maxCoeff();
}

const char* to_string(SplittingKind kind) {
  return kind == SplittingKind::kSymmetricGaussSeidel ? "sgs" : "modified-jacobi";
}

}  // namespace mscg
