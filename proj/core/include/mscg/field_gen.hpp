#pragma once

/// @file field_gen.hpp
/// @brief Random log-normal permeability fields and the manipulations the
/// experiments apply to them.
///
/// A field is exp(g) where g is a stationary Gaussian field with covariance
/// `log_variance * kernel(s)`. Two kernels are provided:
///
///   PowerLaw:  (1 + s^T L s)^(-1/4)
///   Gaussian:  exp(-s^T L s)
///
/// with L a symmetric positive definite matrix of inverse squared cutoff
/// lengths. Samples are drawn by spectral synthesis on a periodic embedding
/// of the grid and cropped back to the requested size.

#include <array>
#include <cstdint>

#include "mscg/grid.hpp"

namespace mscg {

enum class CorrelationModel { kGaussian, kPowerLaw };

struct CorrelationSpec {
  CorrelationModel model = CorrelationModel::kPowerLaw;
  /// Symmetric 2x2 matrix stored as {L_xx, L_xy, L_yy}.
  std::array<double, 3> lambda{1.0, 0.0, 1.0};
  double log_mean = 0.0;
  double log_variance = 1.0;

  /// Cutoff lengths along a principal frame rotated `angle` radians from x:
  /// L = R^T diag(1/major^2, 1/minor^2) R.
  static CorrelationSpec oriented(CorrelationModel model, double major, double minor,
                                  double angle, double log_mean, double log_variance);

  /// s^T L s
  [[nodiscard]] double quadratic_form(double sx, double sy) const;
  /// Longest cutoff length, 1/sqrt(smallest eigenvalue of L).
  [[nodiscard]] double longest_cutoff() const;
  /// Throws std::invalid_argument unless L is SPD and log_variance >= 0.
  void validate() const;
};

/// Correlation at separation (sx, sy); 1 at zero separation.
double correlation_kernel(const CorrelationSpec& spec, double sx, double sy);

struct GeneratorOptions {
  /// Shift and scale the sampled log-field so its empirical mean and
  /// variance equal the spec exactly.
  bool normalize_moments = true;
  /// Minimum periodic embedding size as a multiple of the grid size.
  double embedding_factor = 2.0;
};

CellField generate_lognormal_field(const Grid2D& grid, const CorrelationSpec& spec,
                                   std::uint64_t seed, const GeneratorOptions& options = {});

/// Empirical mean and (population) variance of log(field).
struct LogMoments {
  double mean = 0.0;
  double variance = 0.0;
};
LogMoments log_moments(const CellField& field);

/// Rescales log(field) about its mean so the empirical log-variance becomes
/// `target_variance`.
CellField rescale_log_variance(const CellField& field, double target_variance);

/// Lower-left block [0, upper_i) x [0, upper_j), copied without resampling.
CellField extract_subgrid(const CellField& field, int upper_i, int upper_j);

/// Area-weighted average of log(field) over the cells of `target`, which
/// must cover the same physical rectangle.
CellField interpolate_to_grid(const CellField& field, const Grid2D& target);

/// max / min of a strictly positive field.
double max_min_ratio(const CellField& field);

}  // namespace mscg
