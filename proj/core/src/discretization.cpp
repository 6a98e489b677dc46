#include "mscg/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mscg {

double harmonic_face_mean(double ka, double kb) {
  if (ka < 0.0 || kb < 0.0 || !std::isfinite(ka) || !std::isfinite(kb)) {
    throw std::invalid_argument("harmonic_face_mean: permeabilities must be finite and >= 0");
  }
  if (ka == 0.0 || kb == 0.0) return 0.0;
  return 2.0 * ka * kb / (ka + kb);
}

FaceField build_transmissivities(const CellField& cell_k, const BoundarySpec& bc) {
  const Grid2D& g = cell_k.grid();
  if (!(bc.grid() == g)) {
    throw DimensionMismatch("build_transmissivities: boundary spec is for another grid");
  }
  for (double k : cell_k.values()) {
    if (!(k >= 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("build_transmissivities: permeability must be finite and >= 0");
    }
  }
  const double ax = g.dy / g.dx;
  const double ay = g.dx / g.dy;
  FaceField t(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      t.x(i, j) = ax * harmonic_face_mean(cell_k(i - 1, j), cell_k(i, j));
    }
    const auto& left = bc.at(Side::kLeft, j);
    const auto& right = bc.at(Side::kRight, j);
    t.x(0, j) = left.kind == BoundaryKind::kDirichlet ? 2.0 * ax * cell_k(0, j) : 0.0;
    t.x(g.nx, j) =
        right.kind == BoundaryKind::kDirichlet ? 2.0 * ax * cell_k(g.nx - 1, j) : 0.0;
  }
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 1; j < g.ny; ++j) {
      t.y(i, j) = ay * harmonic_face_mean(cell_k(i, j - 1), cell_k(i, j));
    }
    const auto& bottom = bc.at(Side::kBottom, i);
    const auto& top = bc.at(Side::kTop, i);
    t.y(i, 0) = bottom.kind == BoundaryKind::kDirichlet ? 2.0 * ay * cell_k(i, 0) : 0.0;
    t.y(i, g.ny) =
        top.kind == BoundaryKind::kDirichlet ? 2.0 * ay * cell_k(i, g.ny - 1) : 0.0;
  }
  return t;
}

StencilOperator::StencilOperator(const Grid2D& grid, Vector diag, Vector east, Vector north)
    : grid_(grid), diag_(std::move(diag)), east_(std::move(east)), north_(std::move(north)) {
  require_same_size(diag_.size(), grid_.size(), "StencilOperator diag");
  require_same_size(east_.size(), grid_.size(), "StencilOperator east");
  require_same_size(north_.size(), grid_.size(), "StencilOperator north");
}

void StencilOperator::apply(std::span<const double> x, std::span<double> y) const {
  require_same_size(x.size(), size(), "apply_operator");
  require_same_size(y.size(), size(), "apply_operator");
  const std::size_t n = size();
  const std::size_t nx = static_cast<std::size_t>(grid_.nx);
  const std::size_t ny = static_cast<std::size_t>(grid_.ny);
  const double* d = diag_.data();
  const double* e = east_.data();
  const double* no = north_.data();
  for (std::size_t j = 0; j < ny; ++j) {
    const bool has_south = j > 0;
    const bool has_north = j + 1 < ny;
    const std::size_t base = j * nx;
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = base + i;
      double s = d[c] * x[c];
      // East couplings vanish on the last column, so row wrap-around reads
      // are multiplied by zero.
      if (c + 1 < n) s += e[c] * x[c + 1];
      if (c > 0) s += e[c - 1] * x[c - 1];
      if (has_north) s += no[c] * x[c + nx];
      if (has_south) s += no[c - nx] * x[c - nx];
      y[c] = s;
    }
  }
}

void StencilOperator::residual(std::span<const double> x, std::span<const double> b,
                               std::span<double> r) const {
  require_same_size(b.size(), size(), "residual");
  apply(x, r);
  for (std::size_t c = 0; c < r.size(); ++c) r[c] = b[c] - r[c];
}

double StencilOperator::max_abs_entry() const {
  return std::max({max_abs(diag_), max_abs(east_), max_abs(north_)});
}

StencilOperator assemble_operator(const FaceField& t) {
  const Grid2D& g = t.grid();
  for (const Vector* faces : {&t.x_faces(), &t.y_faces()}) {
    for (double v : *faces) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("assemble_operator: transmissivities must be finite and >= 0");
      }
    }
  }
  Vector diag(g.size());
  Vector east(g.size(), 0.0);
  Vector north(g.size(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t c = g.index(i, j);
      diag[c] = t.x(i, j) + t.x(i + 1, j) + t.y(i, j) + t.y(i, j + 1);
      if (diag[c] == 0.0) {
        throw std::runtime_error("assemble_operator: cell (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") is isolated (all-zero row)");
      }
      if (i + 1 < g.nx) east[c] = -t.x(i + 1, j);
      if (j + 1 < g.ny) north[c] = -t.y(i, j + 1);
    }
  }
  return StencilOperator(g, std::move(diag), std::move(east), std::move(north));
}

Vector apply_operator(const StencilOperator& a, std::span<const double> x) {
  Vector y(a.size());
  a.apply(x, y);
  return y;
}

Vector residual(const StencilOperator& a, std::span<const double> x,
                std::span<const double> b) {
  Vector r(a.size());
  a.residual(x, b, r);
  return r;
}

Vector discrete_rhs(const FaceField& t, const BoundarySpec& bc, const CellField& source) {
  const Grid2D& g = t.grid();
  if (!(source.grid() == g) || !(bc.grid() == g)) {
    throw DimensionMismatch("discrete_rhs: source, boundary spec and transmissivities disagree");
  }
  Vector b(g.size());
  const double area = g.dx * g.dy;
  for (std::size_t c = 0; c < b.size(); ++c) b[c] = -source.values()[c] * area;

  auto add_face = [&](std::size_t c, const BoundaryCondition& f, double t_face, double len) {
    if (f.kind == BoundaryKind::kDirichlet) {
      b[c] += t_face * f.value;
    } else {
      b[c] += f.value * len;
    }
  };
  for (int j = 0; j < g.ny; ++j) {
    add_face(g.index(0, j), bc.at(Side::kLeft, j), t.x(0, j), g.dy);
    add_face(g.index(g.nx - 1, j), bc.at(Side::kRight, j), t.x(g.nx, j), g.dy);
  }
  for (int i = 0; i < g.nx; ++i) {
    add_face(g.index(i, 0), bc.at(Side::kBottom, i), t.y(i, 0), g.dx);
    add_face(g.index(i, g.ny - 1), bc.at(Side::kTop, i), t.y(i, g.ny), g.dx);
  }
  return b;
}

CellField LiftedProblem::reconstruct(std::span<const double> delta) const {
  require_same_size(delta.size(), lift.size(), "LiftedProblem::reconstruct");
  Vector p(lift.size());
  for (std::size_t c = 0; c < p.size(); ++c) p[c] = delta[c] + lift[c];
  return CellField(op->grid(), std::move(p));
}

Vector boundary_lift_field(const Grid2D& g, const BoundarySpec& bc) {
  Vector sum(g.size(), 0.0);
  std::vector<int> hits(g.size(), 0);

  auto interpolate = [](const BoundaryCondition& lo, const BoundaryCondition& hi,
                        double t) -> std::pair<bool, double> {
    const bool dl = lo.kind == BoundaryKind::kDirichlet;
    const bool dh = hi.kind == BoundaryKind::kDirichlet;
    if (dl && dh) return {true, lo.value + (hi.value - lo.value) * t};
    if (dl) return {true, lo.value};
    if (dh) return {true, hi.value};
    return {false, 0.0};
  };

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t c = g.index(i, j);
      const auto [row_ok, row_value] = interpolate(
          bc.at(Side::kLeft, j), bc.at(Side::kRight, j), (i + 0.5) / g.nx);
      const auto [col_ok, col_value] = interpolate(
          bc.at(Side::kBottom, i), bc.at(Side::kTop, i), (j + 0.5) / g.ny);
      if (row_ok) {
        sum[c] += row_value;
        ++hits[c];
      }
      if (col_ok) {
        sum[c] += col_value;
        ++hits[c];
      }
    }
  }

  double dirichlet_mean = 0.0;
  int dirichlet_count = 0;
  for (Side s : {Side::kLeft, Side::kRight, Side::kBottom, Side::kTop}) {
    for (const auto& f : bc.side(s)) {
      if (f.kind == BoundaryKind::kDirichlet) {
        dirichlet_mean += f.value;
        ++dirichlet_count;
      }
    }
  }
  if (dirichlet_count > 0) dirichlet_mean /= dirichlet_count;

  Vector lift(g.size());
  for (std::size_t c = 0; c < lift.size(); ++c) {
    lift[c] = hits[c] > 0 ? sum[c] / hits[c] : dirichlet_mean;
  }
  return lift;
}

LiftedProblem boundary_lift(const CellField& cell_k, const BoundarySpec& bc,
                            const CellField& source, const DiscretizationOptions& options) {
  const Grid2D& g = cell_k.grid();
  LiftedProblem out;
  out.transmissivity = build_transmissivities(cell_k, bc);
  out.op = std::make_shared<const StencilOperator>(assemble_operator(out.transmissivity));
  Vector b = discrete_rhs(out.transmissivity, bc, source);

  if (!bc.has_dirichlet()) {
    if (!options.allow_pure_neumann) {
      throw std::invalid_argument(
          "boundary_lift: no Dirichlet face; the all-Neumann operator is singular "
          "(set allow_pure_neumann to solve it up to a constant)");
    }
    const double total = std::accumulate(b.begin(), b.end(), 0.0);
    double scale = 0.0;
    for (double v : b) scale += std::abs(v);
    if (std::abs(total) > options.compatibility_tolerance * std::max(scale, 1e-300)) {
      throw std::invalid_argument(
          "boundary_lift: inconsistent all-Neumann problem (sources and boundary "
          "fluxes do not balance)");
    }
    const double mean = total / static_cast<double>(b.size());
    for (double& v : b) v -= mean;
    out.source = std::move(b);
    out.lift.assign(g.size(), 0.0);
    out.singular = true;
    return out;
  }

  out.lift = boundary_lift_field(g, bc);
  Vector alift(g.size());
  out.op->apply(out.lift, alift);
  for (std::size_t c = 0; c < b.size(); ++c) b[c] -= alift[c];
  out.source = std::move(b);
  return out;
}

}  // namespace mscg
