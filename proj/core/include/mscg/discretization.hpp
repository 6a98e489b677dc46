#pragma once

/// @file discretization.hpp
/// @brief Symmetric 5-point discretisation of div(K grad P) = S on a regular
/// grid with face transmissivities, and the boundary lift that turns a
/// problem with boundary data into one with homogeneous boundary values.
///
/// Equations are written as net face fluxes. For a cell c with neighbours n
/// the row reads  sum_f T_f (P_c - P_n) = -S_c dx dy + boundary terms, so the
/// assembled matrix is symmetric positive (semi)definite.

#include <memory>
#include <span>

#include "mscg/grid.hpp"

namespace mscg {

/// 2 a b / (a + b); zero when either side is zero.
double harmonic_face_mean(double ka, double kb);

/// Face transmissivities T_xx = (dy/dx) K_xx, T_yy = (dx/dy) K_yy with
/// harmonic-mean face permeabilities. Neumann boundary faces get 0,
/// Dirichlet boundary faces the half-cell value 2 (dy/dx) K_cell.
FaceField build_transmissivities(const CellField& cell_k, const BoundarySpec& bc);

/// Symmetric 5-point operator held as three arrays: the diagonal and the
/// couplings to the east (i+1) and north (j+1) neighbours. West/south
/// couplings are the transposed entries.
class StencilOperator {
 public:
  StencilOperator() = default;
  StencilOperator(const Grid2D& grid, Vector diag, Vector east, Vector north);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }
  [[nodiscard]] std::size_t size() const { return diag_.size(); }
  [[nodiscard]] const Vector& diag() const { return diag_; }
  [[nodiscard]] const Vector& east() const { return east_; }
  [[nodiscard]] const Vector& north() const { return north_; }

  /// y = A x
  void apply(std::span<const double> x, std::span<double> y) const;
  /// r = b - A x
  void residual(std::span<const double> x, std::span<const double> b,
                std::span<double> r) const;
  /// Largest absolute matrix entry.
  [[nodiscard]] double max_abs_entry() const;

 private:
  Grid2D grid_;
  Vector diag_;
  Vector east_;
  Vector north_;
};

/// Throws std::runtime_error naming the first cell whose row is all zero.
StencilOperator assemble_operator(const FaceField& transmissivity);

Vector apply_operator(const StencilOperator& a, std::span<const double> x);
Vector residual(const StencilOperator& a, std::span<const double> x,
                std::span<const double> b);

/// Right-hand side of the unlifted system: -S dx dy plus the Dirichlet and
/// Neumann boundary contributions.
Vector discrete_rhs(const FaceField& transmissivity, const BoundarySpec& bc,
                    const CellField& source);

struct DiscretizationOptions {
  /// Accept all-Neumann problems; the source is projected onto the range of
  /// the operator and the hierarchy must be built with `singular = true`.
  bool allow_pure_neumann = false;
  /// Relative tolerance for the pure-Neumann compatibility condition.
  double compatibility_tolerance = 1e-9;
};

/// Zero-boundary problem for dP = P - P_bf.
struct LiftedProblem {
  FaceField transmissivity;
  std::shared_ptr<const StencilOperator> op;
  Vector source;
  Vector lift;
  bool singular = false;

  /// P = dP + P_bf
  [[nodiscard]] CellField reconstruct(std::span<const double> delta) const;
};

/// Smooth field matching the Dirichlet data: along every row (column) with
/// Dirichlet ends it interpolates linearly between them; cells reached by
/// both a row and a column take the average.
Vector boundary_lift_field(const Grid2D& grid, const BoundarySpec& bc);

LiftedProblem boundary_lift(const CellField& cell_k, const BoundarySpec& bc,
                            const CellField& source,
                            const DiscretizationOptions& options = {});

}  // namespace mscg
