#include "mscg/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mscg {

int coarsen_count(int n, double scale) {
  if (!(scale > 1.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("coarsen_count: scale factor must be > 1");
  }
  if (n < 1) throw std::invalid_argument("coarsen_count: cell count must be >= 1");
  if (n == 1) return 1;
  int steps = 0;
  double reach = 1.0;
  while (reach * scale <= n * (1.0 + 1e-12)) {
    reach *= scale;
    ++steps;
  }
  long coarse = 0;
  if (steps == 0) {
    coarse = std::lround(n / scale);
  } else {
    const double terminal = std::max(1.0, std::round(n / reach));
    const double s_eff = std::pow(n / terminal, 1.0 / steps);
    coarse = std::lround(n / s_eff);
  }
  return static_cast<int>(std::clamp<long>(coarse, 1, n - 1));
}

Grid2D choose_coarse_grid(const Grid2D& fine, const CoarseningOptions& options) {
  if (!(options.scale > 1.0)) {
    throw std::invalid_argument("choose_coarse_grid: scale factor must be > 1");
  }
  if (!(options.anisotropy > 0.0)) {
    throw std::invalid_argument("choose_coarse_grid: anisotropy must be > 0");
  }
  int cx = coarsen_count(fine.nx, options.scale);
  int cy = coarsen_count(fine.ny, options.scale);
  if (options.semi_coarsen) {
    const double hx = fine.dx;
    const double hy = fine.dy / std::sqrt(options.anisotropy);
    bool x_drives = hx <= hy * (1.0 + 1e-9);
    if (x_drives && fine.nx == 1) x_drives = false;
    if (!x_drives && fine.ny == 1) x_drives = true;
    if (x_drives) {
      const double h_coarse = hx * fine.nx / cx;
      const long follow = std::lround(hy * fine.ny / h_coarse);
      cy = static_cast<int>(std::clamp<long>(follow, 1, fine.ny));
    } else {
      const double h_coarse = hy * fine.ny / cy;
      const long follow = std::lround(hx * fine.nx / h_coarse);
      cx = static_cast<int>(std::clamp<long>(follow, 1, fine.nx));
    }
  }
  return Grid2D::over_domain(cx, cy, fine.width(), fine.height());
}

Grid2D choose_coarse_grid(const Grid2D& fine, double scale, bool semi_coarsen) {
  return choose_coarse_grid(fine, CoarseningOptions{scale, semi_coarsen, 1.0});
}

namespace {

struct Piece {
  int index;
  double weight;
};

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// For every coarse face along one axis, the fine faces between the two
// coarse centres it connects, weighted by the covered fraction of each fine
// face's influence interval.
std::vector<std::vector<Piece>> face_spans(int n, double h, int nc) {
  const double length = n * h;
  const double hc = length / nc;
  const double eps = 1e-10 * h;
  std::vector<std::vector<Piece>> spans(static_cast<std::size_t>(nc) + 1);
  for (int face = 0; face <= nc; ++face) {
    const double lo = face == 0 ? 0.0 : (face - 0.5) * hc;
    const double hi = face == nc ? length : (face + 0.5) * hc;
    const int first = std::max(0, static_cast<int>(std::floor(lo / h)) - 1);
    const int last = std::min(n, static_cast<int>(std::ceil(hi / h)) + 1);
    for (int i = first; i <= last; ++i) {
      const double f0 = std::max(0.0, (i - 0.5) * h);
      const double f1 = std::min(length, (i + 0.5) * h);
      const double ov = overlap(lo, hi, f0, f1);
      if (ov > eps) spans[static_cast<std::size_t>(face)].push_back({i, ov / (f1 - f0)});
    }
  }
  return spans;
}

// For every coarse cell along one axis, the fine cells it covers and the
// fraction of each fine cell inside it.
std::vector<std::vector<Piece>> cell_covers(int n, double h, int nc) {
  const double hc = n * h / nc;
  const double eps = 1e-10 * h;
  std::vector<std::vector<Piece>> covers(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) {
    const double lo = c * hc;
    const double hi = (c + 1) * hc;
    const int first = std::max(0, static_cast<int>(std::floor(lo / h)) - 1);
    const int last = std::min(n - 1, static_cast<int>(std::ceil(hi / h)) + 1);
    for (int i = first; i <= last; ++i) {
      const double ov = overlap(lo, hi, i * h, (i + 1) * h);
      if (ov > eps) covers[static_cast<std::size_t>(c)].push_back({i, ov / h});
    }
  }
  return covers;
}

template <typename FineValue>
double series_of_parallel(const std::vector<Piece>& series, const std::vector<Piece>& parallel,
                          FineValue fine_value) {
  double resistance = 0.0;
  for (const Piece& s : series) {
    double conductance = 0.0;
    for (const Piece& p : parallel) conductance += p.weight * fine_value(s.index, p.index);
    if (conductance <= 0.0) return 0.0;
    resistance += s.weight / conductance;
  }
  return resistance > 0.0 ? 1.0 / resistance : 0.0;
}

}  // namespace

FaceField coarsen_transmissivity(const FaceField& fine_t, const Grid2D& coarse) {
  const Grid2D& fine = fine_t.grid();
  if (!same_extent(fine, coarse)) {
    throw DimensionMismatch("coarsen_transmissivity: grids cover different rectangles");
  }
  if (coarse.nx > fine.nx || coarse.ny > fine.ny) {
    throw std::invalid_argument("coarsen_transmissivity: target grid is finer than the source");
  }
  const auto x_spans = face_spans(fine.nx, fine.dx, coarse.nx);
  const auto y_spans = face_spans(fine.ny, fine.dy, coarse.ny);
  const auto x_cover = cell_covers(fine.nx, fine.dx, coarse.nx);
  const auto y_cover = cell_covers(fine.ny, fine.dy, coarse.ny);

  FaceField out(coarse);
  for (int jc = 0; jc < coarse.ny; ++jc) {
    for (int ic = 0; ic <= coarse.nx; ++ic) {
      out.x(ic, jc) = series_of_parallel(
          x_spans[static_cast<std::size_t>(ic)], y_cover[static_cast<std::size_t>(jc)],
          [&](int i, int j) { return fine_t.x(i, j); });
    }
  }
  for (int jc = 0; jc <= coarse.ny; ++jc) {
    for (int ic = 0; ic < coarse.nx; ++ic) {
      out.y(ic, jc) = series_of_parallel(
          y_spans[static_cast<std::size_t>(jc)], x_cover[static_cast<std::size_t>(ic)],
          [&](int j, int i) { return fine_t.y(i, j); });
    }
  }
  return out;
}

namespace {

std::vector<TransferOperator::AxisWeight> axis_weights(int n, double h, int nc,
                                                       InterpolationKind kind) {
  const double hc = n * h / nc;
  std::vector<TransferOperator::AxisWeight> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    auto& a = w[static_cast<std::size_t>(i)];
    if (kind == InterpolationKind::kPiecewiseConstant) {
      const int c = std::clamp(static_cast<int>(std::floor(x / hc)), 0, nc - 1);
      a = {c, c, 1.0, 0.0};
      continue;
    }
    const double s = x / hc - 0.5;
    if (s <= 0.0) {
      a = {0, 0, 1.0, 0.0};
    } else if (s >= nc - 1) {
      a = {nc - 1, nc - 1, 1.0, 0.0};
    } else {
      const int lo = std::min(static_cast<int>(std::floor(s)), nc - 2);
      const double t = s - lo;
      a = {lo, lo + 1, 1.0 - t, t};
    }
  }
  return w;
}

}  // namespace

TransferOperator::TransferOperator(const Grid2D& fine, const Grid2D& coarse,
                                   InterpolationKind kind)
    : fine_(fine), coarse_(coarse), kind_(kind) {
  if (!same_extent(fine, coarse)) {
    throw DimensionMismatch("TransferOperator: grids cover different rectangles");
  }
  wx_ = axis_weights(fine.nx, fine.dx, coarse.nx, kind);
  wy_ = axis_weights(fine.ny, fine.dy, coarse.ny, kind);
}

void TransferOperator::prolongate(std::span<const double> coarse,
                                  std::span<double> fine) const {
  require_same_size(fine.size(), fine_.size(), "prolongate");
  std::fill(fine.begin(), fine.end(), 0.0);
  prolongate_add(coarse, fine);
}

void TransferOperator::prolongate_add(std::span<const double> coarse,
                                      std::span<double> fine) const {
  require_same_size(coarse.size(), coarse_.size(), "prolongate");
  require_same_size(fine.size(), fine_.size(), "prolongate");
  const std::size_t cnx = static_cast<std::size_t>(coarse_.nx);
  for (int j = 0; j < fine_.ny; ++j) {
    const AxisWeight& ay = wy_[static_cast<std::size_t>(j)];
    const double* row_lo = coarse.data() + static_cast<std::size_t>(ay.lo) * cnx;
    const double* row_hi = coarse.data() + static_cast<std::size_t>(ay.hi) * cnx;
    double* out = fine.data() + fine_.index(0, j);
    for (int i = 0; i < fine_.nx; ++i) {
      const AxisWeight& ax = wx_[static_cast<std::size_t>(i)];
      const double lo = ax.w_lo * row_lo[ax.lo] + ax.w_hi * row_lo[ax.hi];
      const double hi = ax.w_lo * row_hi[ax.lo] + ax.w_hi * row_hi[ax.hi];
      out[i] += ay.w_lo * lo + ay.w_hi * hi;
    }
  }
}

void TransferOperator::restrict(std::span<const double> fine, std::span<double> coarse) const {
  require_same_size(coarse.size(), coarse_.size(), "restrict");
  require_same_size(fine.size(), fine_.size(), "restrict");
  std::fill(coarse.begin(), coarse.end(), 0.0);
  const std::size_t cnx = static_cast<std::size_t>(coarse_.nx);
  for (int j = 0; j < fine_.ny; ++j) {
    const AxisWeight& ay = wy_[static_cast<std::size_t>(j)];
    double* row_lo = coarse.data() + static_cast<std::size_t>(ay.lo) * cnx;
    double* row_hi = coarse.data() + static_cast<std::size_t>(ay.hi) * cnx;
    const double* in = fine.data() + fine_.index(0, j);
    for (int i = 0; i < fine_.nx; ++i) {
      const AxisWeight& ax = wx_[static_cast<std::size_t>(i)];
      const double lo = ay.w_lo * in[i];
      const double hi = ay.w_hi * in[i];
      row_lo[ax.lo] += ax.w_lo * lo;
      row_lo[ax.hi] += ax.w_hi * lo;
      row_hi[ax.lo] += ax.w_lo * hi;
      row_hi[ax.hi] += ax.w_hi * hi;
    }
  }
}

Vector TransferOperator::prolongate(std::span<const double> coarse) const {
  Vector fine(fine_.size());
  prolongate(coarse, fine);
  return fine;
}

Vector TransferOperator::restrict(std::span<const double> fine) const {
  Vector coarse(coarse_.size());
  restrict(fine, coarse);
  return coarse;
}

LevelHierarchy::LevelHierarchy(std::vector<Level> levels, bool singular)
    : levels_(std::move(levels)), singular_(singular) {
  if (levels_.empty()) throw std::invalid_argument("LevelHierarchy: no levels");
  direct_ = DirectSolver(to_dense(*levels_.back().op), singular_);
}

LevelHierarchy build_hierarchy(const FaceField& fine_t, const HierarchyParams& params) {
  if (!(params.scale > 1.0)) throw std::invalid_argument("build_hierarchy: scale must be > 1");
  if (params.smoothing_degree && *params.smoothing_degree < 1) {
    throw std::invalid_argument("build_hierarchy: smoothing degree must be >= 1");
  }
  const CoarseningOptions coarsening{params.scale, params.semi_coarsen, params.anisotropy};
  std::vector<Level> levels;
  FaceField t = fine_t;
  for (;;) {
    const Grid2D grid = t.grid();
    auto op = std::make_shared<const StencilOperator>(assemble_operator(t));
    Level level{.grid = grid,
                .transmissivity = t,
                .op = op,
                .splitting = Splitting(op, params.splitting),
                .smoothing_degree = params.smoothing_degree.value_or(1),
                .transfer = std::nullopt};
    const bool stop = static_cast<int>(levels.size()) + 1 >= params.max_levels ||
                      grid.size() < params.coarsest_threshold;
    Grid2D coarse = grid;
    if (!stop) coarse = choose_coarse_grid(grid, coarsening);
    if (stop || coarse.size() >= grid.size()) {
      levels.push_back(std::move(level));
      break;
    }
    level.scale_x = static_cast<double>(grid.nx) / coarse.nx;
    level.scale_y = static_cast<double>(grid.ny) / coarse.ny;
    if (!params.smoothing_degree) {
      level.smoothing_degree =
          std::max(1, static_cast<int>(std::lround(std::max(level.scale_x, level.scale_y))));
    }
    level.transfer.emplace(grid, coarse, params.interpolation);
    t = coarsen_transmissivity(t, coarse);
    levels.push_back(std::move(level));
  }
  return LevelHierarchy(std::move(levels), params.singular);
}

nlohmann::json hierarchy_summary(const LevelHierarchy& h) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t k = 0; k < h.size(); ++k) {
    const Level& l = h.level(k);
    levels.push_back({{"level", k},
                      {"nx", l.grid.nx},
                      {"ny", l.grid.ny},
                      {"dimension", l.grid.size()},
                      {"dx", l.grid.dx},
                      {"dy", l.grid.dy},
                      {"smoothing_degree", l.smoothing_degree},
                      {"scale_x", l.scale_x},
                      {"scale_y", l.scale_y}});
  }
  return {{"levels", levels}, {"singular", h.singular()}};
}

}  // namespace mscg
