#pragma once

/// @file multiscale.hpp
/// @brief Coarse-grid selection, transmissivity coarse graining, grid
/// transfer operators and the level hierarchy.

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "mscg/dense.hpp"
#include "mscg/discretization.hpp"
#include "mscg/splitting.hpp"

namespace mscg {

/// Number of coarse cells along one axis of n cells for a target scale
/// factor. The factor is equalised over the remaining chain so that repeated
/// coarsening ends on a whole number of cells (1001 -> 252 -> 63 -> 16 -> 4).
int coarsen_count(int n, double scale);

struct CoarseningOptions {
  double scale = 4.0;
  bool semi_coarsen = false;
  /// K_yy / K_xx. Only the effective cell shape matters for semi-coarsening:
  /// the effective height is dy / sqrt(anisotropy).
  double anisotropy = 1.0;
};

/// Next coarser grid over the same rectangle. With semi-coarsening the axis
/// with the smaller effective cell is coarsened and the other axis follows
/// only as far as keeps the coarse cells no flatter than isotropic.
Grid2D choose_coarse_grid(const Grid2D& fine, const CoarseningOptions& options);
Grid2D choose_coarse_grid(const Grid2D& fine, double scale, bool semi_coarsen = false);

/// Coarse-grained face transmissivities. A coarse x-face connecting two
/// coarse centres combines the fine x-faces between those centres in series,
/// each fine face being the parallel sum of the fine rows it spans. Fine
/// values that only partly overlap are weighted by the fraction of height in
/// the overlap and inversely by the fraction of width. y-faces likewise with
/// the axes interchanged. A zero parallel sum blocks the coarse face.
FaceField coarsen_transmissivity(const FaceField& fine_t, const Grid2D& coarse);

enum class InterpolationKind { kLinear, kPiecewiseConstant };

/// Prolongation E from a coarse to a fine grid and restriction R = E^T.
/// Linear interpolation is the tensor product of 1-D interpolation between
/// coarse cell centres with zero slope beyond the outermost centres.
class TransferOperator {
 public:
  TransferOperator(const Grid2D& fine, const Grid2D& coarse,
                   InterpolationKind kind = InterpolationKind::kLinear);

  [[nodiscard]] const Grid2D& fine() const { return fine_; }
  [[nodiscard]] const Grid2D& coarse() const { return coarse_; }
  [[nodiscard]] InterpolationKind kind() const { return kind_; }

  /// fine = E coarse
  void prolongate(std::span<const double> coarse, std::span<double> fine) const;
  /// fine += E coarse
  void prolongate_add(std::span<const double> coarse, std::span<double> fine) const;
  /// coarse = E^T fine
  void restrict(std::span<const double> fine, std::span<double> coarse) const;

  [[nodiscard]] Vector prolongate(std::span<const double> coarse) const;
  [[nodiscard]] Vector restrict(std::span<const double> fine) const;

  /// Two coarse indices and weights per fine index along one axis.
  struct AxisWeight {
    int lo = 0;
    int hi = 0;
    double w_lo = 1.0;
    double w_hi = 0.0;
  };
  [[nodiscard]] const std::vector<AxisWeight>& x_weights() const { return wx_; }
  [[nodiscard]] const std::vector<AxisWeight>& y_weights() const { return wy_; }

 private:
  Grid2D fine_;
  Grid2D coarse_;
  InterpolationKind kind_;
  std::vector<AxisWeight> wx_;
  std::vector<AxisWeight> wy_;
};

struct HierarchyParams {
  double scale = 4.0;
  /// Overrides the per-level smoothing degree when set.
  std::optional<int> smoothing_degree;
  /// Keep coarsening while the level dimension is at least this.
  std::size_t coarsest_threshold = 256;
  SplittingKind splitting = SplittingKind::kSymmetricGaussSeidel;
  InterpolationKind interpolation = InterpolationKind::kLinear;
  bool semi_coarsen = false;
  double anisotropy = 1.0;
  /// Operator is singular with the constants as null space (all-Neumann).
  bool singular = false;
  int max_levels = 32;
};

struct Level {
  Grid2D grid;
  FaceField transmissivity;
  std::shared_ptr<const StencilOperator> op;
  Splitting splitting;
  /// Smoothing steps m on this level (pre and post each).
  int smoothing_degree = 1;
  /// Transfer to the next coarser level; empty on the coarsest.
  std::optional<TransferOperator> transfer;
  /// fine / coarse cell counts per axis towards the next level.
  double scale_x = 1.0;
  double scale_y = 1.0;
};

/// Level 0 is the finest. The coarsest operator is held factorised.
class LevelHierarchy {
 public:
  LevelHierarchy(std::vector<Level> levels, bool singular);

  [[nodiscard]] std::size_t size() const { return levels_.size(); }
  [[nodiscard]] const Level& level(std::size_t k) const { return levels_.at(k); }
  [[nodiscard]] const Level& finest() const { return levels_.front(); }
  [[nodiscard]] std::size_t coarsest_index() const { return levels_.size() - 1; }
  [[nodiscard]] const DirectSolver& coarsest_solver() const { return direct_; }
  [[nodiscard]] bool singular() const { return singular_; }

 private:
  std::vector<Level> levels_;
  DirectSolver direct_;
  bool singular_;
};

/// Build the level chain from the finest transmissivities. Throws
/// std::runtime_error if the coarsest operator cannot be factorised.
LevelHierarchy build_hierarchy(const FaceField& fine_t, const HierarchyParams& params = {});

/// Per-level grid, dimension, smoothing degree and scale factors.
nlohmann::json hierarchy_summary(const LevelHierarchy& h);

}  // namespace mscg
