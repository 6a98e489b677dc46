#include "mscg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mscg {

Grid2D::Grid2D(int nx_, int ny_, double dx_, double dy_)
    : nx(nx_), ny(ny_), dx(dx_), dy(dy_) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("Grid2D: cell counts must be positive, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
    throw std::invalid_argument("Grid2D: cell widths must be positive and finite");
  }
}

Grid2D Grid2D::over_domain(int nx, int ny, double width, double height) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("Grid2D::over_domain: cell counts must be positive");
  }
  return Grid2D(nx, ny, width / nx, height / ny);
}

std::string Grid2D::describe() const {
  std::ostringstream os;
  os << nx << "x" << ny;
  return os.str();
}

bool same_extent(const Grid2D& a, const Grid2D& b) {
  auto close = [](double u, double v) {
    return std::abs(u - v) <= 1e-10 * std::max(std::abs(u), std::abs(v));
  };
  return close(a.width(), b.width()) && close(a.height(), b.height());
}

CellField::CellField(const Grid2D& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

CellField::CellField(const Grid2D& grid, Vector values)
    : grid_(grid), values_(std::move(values)) {
  require_same_size(values_.size(), grid_.size(), "CellField values");
}

bool CellField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

FaceField::FaceField(const Grid2D& grid, double fill)
    : grid_(grid),
      x_faces_(grid.x_face_count(), fill),
      y_faces_(grid.y_face_count(), fill) {}

BoundarySpec::BoundarySpec(const Grid2D& grid) : grid_(grid) {
  sides_[static_cast<int>(Side::kLeft)].resize(grid.ny);
  sides_[static_cast<int>(Side::kRight)].resize(grid.ny);
  sides_[static_cast<int>(Side::kBottom)].resize(grid.nx);
  sides_[static_cast<int>(Side::kTop)].resize(grid.nx);
}

BoundarySpec BoundarySpec::uniform(const Grid2D& grid, BoundaryCondition left,
                                   BoundaryCondition right, BoundaryCondition bottom,
                                   BoundaryCondition top) {
  BoundarySpec bc(grid);
  bc.set_side(Side::kLeft, left);
  bc.set_side(Side::kRight, right);
  bc.set_side(Side::kBottom, bottom);
  bc.set_side(Side::kTop, top);
  return bc;
}

BoundarySpec BoundarySpec::left_right_pressure_drop(const Grid2D& grid, double p_left,
                                                    double p_right) {
  return uniform(grid, BoundaryCondition::dirichlet(p_left),
                 BoundaryCondition::dirichlet(p_right), BoundaryCondition::neumann(0.0),
                 BoundaryCondition::neumann(0.0));
}

BoundaryCondition& BoundarySpec::at(Side side, int k) {
  return sides_[static_cast<int>(side)].at(static_cast<std::size_t>(k));
}

const BoundaryCondition& BoundarySpec::at(Side side, int k) const {
  return sides_[static_cast<int>(side)].at(static_cast<std::size_t>(k));
}

std::span<const BoundaryCondition> BoundarySpec::side(Side side) const {
  return sides_[static_cast<int>(side)];
}

void BoundarySpec::set_side(Side side, BoundaryCondition bc) {
  auto& s = sides_[static_cast<int>(side)];
  std::fill(s.begin(), s.end(), bc);
}

bool BoundarySpec::has_dirichlet() const {
  return std::any_of(sides_.begin(), sides_.end(), [](const auto& s) {
    return std::any_of(s.begin(), s.end(), [](const BoundaryCondition& bc) {
      return bc.kind == BoundaryKind::kDirichlet;
    });
  });
}

bool BoundarySpec::all_homogeneous() const {
  return std::all_of(sides_.begin(), sides_.end(), [](const auto& s) {
    return std::all_of(s.begin(), s.end(),
                       [](const BoundaryCondition& bc) { return bc.value == 0.0; });
  });
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": size mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double rms_residual(std::span<const double> r) {
  if (r.empty()) throw std::invalid_argument("rms_residual: empty vector");
  return std::sqrt(dot(r, r) / static_cast<double>(r.size()));
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace mscg
