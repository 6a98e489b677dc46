#pragma once

/// @file grid.hpp
/// @brief Regular 2-D grid geometry, cell/face field containers and the
/// vector primitives shared by every solver component.
///
/// Cells are indexed row-major, `index = j * nx + i`, with i running along x
/// and j along y. x-faces carry `nx + 1` columns (the first and last are the
/// left/right boundary faces); y-faces carry `ny + 1` rows.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mscg {

using Vector = std::vector<double>;

/// Thrown when two vectors or fields that must share a grid do not.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Grid2D {
  int nx = 1;
  int ny = 1;
  double dx = 1.0;
  double dy = 1.0;

  Grid2D() = default;
  Grid2D(int nx, int ny, double dx = 1.0, double dy = 1.0);

  /// Grid covering a `width` x `height` rectangle with nx x ny cells.
  static Grid2D over_domain(int nx, int ny, double width, double height);

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  [[nodiscard]] double width() const { return nx * dx; }
  [[nodiscard]] double height() const { return ny * dy; }
  [[nodiscard]] std::size_t x_face_count() const {
    return static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny);
  }
  [[nodiscard]] std::size_t y_face_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny + 1);
  }
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// True when both grids cover the same rectangle (to a relative 1e-10).
bool same_extent(const Grid2D& a, const Grid2D& b);

/// One real value per cell.
class CellField {
 public:
  CellField() = default;
  explicit CellField(const Grid2D& grid, double fill = 0.0);
  CellField(const Grid2D& grid, Vector values);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }
  [[nodiscard]] const Vector& values() const { return values_; }
  [[nodiscard]] Vector& values() { return values_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

  [[nodiscard]] bool all_finite() const;

 private:
  Grid2D grid_;
  Vector values_;
};

/// Face-centred values: x-faces at (i - 1/2, j) for i in [0, nx], y-faces at
/// (i, j - 1/2) for j in [0, ny]. Boundary faces are stored alongside
/// interior ones.
class FaceField {
 public:
  FaceField() = default;
  explicit FaceField(const Grid2D& grid, double fill = 0.0);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }

  double& x(int i, int j) { return x_faces_[xi(i, j)]; }
  double x(int i, int j) const { return x_faces_[xi(i, j)]; }
  double& y(int i, int j) { return y_faces_[yi(i, j)]; }
  double y(int i, int j) const { return y_faces_[yi(i, j)]; }

  [[nodiscard]] const Vector& x_faces() const { return x_faces_; }
  [[nodiscard]] const Vector& y_faces() const { return y_faces_; }
  [[nodiscard]] Vector& x_faces() { return x_faces_; }
  [[nodiscard]] Vector& y_faces() { return y_faces_; }

 private:
  [[nodiscard]] std::size_t xi(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_.nx + 1) +
           static_cast<std::size_t>(i);
  }
  [[nodiscard]] std::size_t yi(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_.nx) +
           static_cast<std::size_t>(i);
  }

  Grid2D grid_;
  Vector x_faces_;
  Vector y_faces_;
};

enum class BoundaryKind { kDirichlet, kNeumann };

/// Dirichlet: `value` is the boundary pressure. Neumann: `value` is the
/// inward flux per unit face length (the outward normal component of K grad P).
struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::kNeumann;
  double value = 0.0;

  static BoundaryCondition dirichlet(double p) { return {BoundaryKind::kDirichlet, p}; }
  static BoundaryCondition neumann(double q) { return {BoundaryKind::kNeumann, q}; }
  friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;
};

enum class Side { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

/// One boundary condition per boundary face. Left/right sides hold ny
/// entries indexed by row j; bottom/top hold nx entries indexed by column i.
class BoundarySpec {
 public:
  BoundarySpec() = default;
  /// All faces no-flow.
  explicit BoundarySpec(const Grid2D& grid);

  static BoundarySpec uniform(const Grid2D& grid, BoundaryCondition left,
                              BoundaryCondition right, BoundaryCondition bottom,
                              BoundaryCondition top);

  /// P = 1 on the left, P = 0 on the right, no flow on top and bottom.
  static BoundarySpec left_right_pressure_drop(const Grid2D& grid,
                                               double p_left = 1.0,
                                               double p_right = 0.0);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }

  BoundaryCondition& at(Side side, int k);
  [[nodiscard]] const BoundaryCondition& at(Side side, int k) const;
  [[nodiscard]] std::span<const BoundaryCondition> side(Side side) const;
  void set_side(Side side, BoundaryCondition bc);

  [[nodiscard]] bool has_dirichlet() const;
  [[nodiscard]] bool all_homogeneous() const;

 private:
  Grid2D grid_;
  std::array<std::vector<BoundaryCondition>, 4> sides_;
};

/// Sum of a_i b_i.
double dot(std::span<const double> a, std::span<const double> b);

/// sqrt(||r||^2 / N), the root mean square of a residual.
double rms_residual(std::span<const double> r);

/// Maximum absolute entry.
double max_abs(std::span<const double> a);

/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

void require_same_size(std::size_t a, std::size_t b, const char* what);

}  // namespace mscg
