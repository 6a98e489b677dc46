#pragma once

/// @file splitting.hpp
/// @brief Operator splittings A = P - Q with cheap P^-1 and the smoother
/// H = P^-1 Q.
///
/// With A = D + L + U (row-major ordering):
///   symmetric Gauss-Seidel:  P = (D + L) D^-1 (D + U),  Q = L D^-1 U
///   modified Jacobi:         P = 2 D,                   Q = D - L - U
///
/// Q is never formed. The smoother uses H v = v - P^-1 A v and its
/// transpose H^T v = v - A P^-1 v.

#include <memory>
#include <span>

#include "mscg/discretization.hpp"

namespace mscg {

enum class SplittingKind { kSymmetricGaussSeidel, kModifiedJacobi };

class Splitting {
 public:
  /// Throws std::invalid_argument on a zero diagonal entry.
  Splitting(std::shared_ptr<const StencilOperator> op, SplittingKind kind);

  [[nodiscard]] SplittingKind kind() const { return kind_; }
  [[nodiscard]] const StencilOperator& op() const { return *op_; }
  [[nodiscard]] const std::shared_ptr<const StencilOperator>& op_ptr() const { return op_; }

  /// v <- P^-1 v
  void apply_p_inverse_inplace(std::span<double> v) const;
  [[nodiscard]] Vector apply_p_inverse(std::span<const double> v) const;

  /// out = P^-1 Q v = v - P^-1 A v
  void apply_smoother(std::span<const double> v, std::span<double> out) const;
  [[nodiscard]] Vector apply_smoother(std::span<const double> v) const;

  /// out = Q P^-1 v = v - A P^-1 v
  void apply_smoother_transpose(std::span<const double> v, std::span<double> out) const;

 private:
  std::shared_ptr<const StencilOperator> op_;
  SplittingKind kind_;
  Vector inv_diag_;
};

/// Max |(P - Q - A)_ij| with P and Q built densely from D, L and U.
/// Only for N <= 4096.
double verify_splitting(const Splitting& s);

const char* to_string(SplittingKind kind);

}  // namespace mscg
