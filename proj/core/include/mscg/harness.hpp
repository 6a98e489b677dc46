#pragma once

/// @file harness.hpp
/// @brief Experiment drivers: base case, scaling, accuracy, variance,
/// anisotropic channel and method comparison, with CSV/JSON reporting.

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "mscg/field_gen.hpp"
#include "mscg/solvers.hpp"

namespace mscg {

enum class BoundarySetup {
  /// P = 1 left, P = 0 right, no flow top and bottom.
  kMixed,
  /// As kMixed but the top and bottom carry the linear profile as Dirichlet data.
  kDirichlet,
};

BoundarySetup parse_boundary_setup(const std::string& name);
const char* to_string(BoundarySetup setup);

struct ExperimentConfig {
  std::string experiment = "base";
  int nx = 256;
  int ny = 256;
  /// Cell width; the cell height is cell_size / cell_aspect.
  double cell_size = 0.0005;
  double cell_aspect = 1.0;

  CorrelationModel model = CorrelationModel::kPowerLaw;
  double major_cutoff = 0.016;
  double minor_cutoff = 0.002;
  double angle_degrees = 15.0;
  double log_mean = 0.0;
  double log_variance = 2.0;
  std::uint64_t seed = 1;
  GeneratorOptions generator;

  BoundarySetup boundary = BoundarySetup::kMixed;
  /// Target reduction of ||r||^2 / N relative to the initial residual.
  double reduction = 1e-10;
  SolveParams solver;
  HierarchyParams hierarchy;
  PreconditionerKind preconditioner = PreconditionerKind::kRecursiveMultiscale;

  /// Scaling study: square subgrids cut from one fine field.
  std::vector<int> sizes = {64, 128, 256, 512, 1024};
  int fine_size = 1024;
  /// Best-of-n wall time per solve.
  int timing_repeats = 1;

  /// Variance study.
  std::vector<double> variances = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};

  /// Accuracy study: reductions of ||r||^2 / N, and the crude solve's.
  std::vector<double> accuracy_reductions = {1e-2,  1e-4,  1e-6,  1e-8,  1e-10, 1e-12,
                                             1e-14, 1e-16, 1e-18, 1e-20, 1e-22, 1e-24};
  double crude_reduction = 1e-4;

  /// Channel: the strip keeps the top of a square field of this width.
  int channel_nx = 512;
  int channel_ny = 128;
  double channel_aspect = 10.0;

  /// Empty: write nothing.
  std::filesystem::path output_dir;
  bool export_fields = true;

  [[nodiscard]] CorrelationSpec correlation() const;
  [[nodiscard]] Grid2D grid() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct StudyRow {
  std::string label;
  int nx = 0;
  int ny = 0;
  std::size_t dimension = 0;
  double log_variance = 0.0;
  double k_ratio = 0.0;
  std::string preconditioner;
  long fine_iterations = 0;
  bool converged = false;
  double microseconds_per_point = 0.0;
  double flop_proxy = 0.0;
  double level0_share = 0.0;
  double final_rms = 0.0;
  double epsilon = 0.0;
  /// NaN when no exact solution is known.
  double rms_error = 0.0;
  double max_error = 0.0;
  std::size_t levels = 0;
};

struct StudyReport {
  std::string study;
  std::vector<StudyRow> rows;

  [[nodiscard]] std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// A lifted problem together with its field and boundary data.
struct FlowProblem {
  CellField permeability;
  BoundarySpec boundary;
  LiftedProblem lifted;
};

FlowProblem make_flow_problem(const CellField& permeability, BoundarySetup setup);

/// Absolute epsilon for a target reduction of ||r||^2 / N from x = 0.
double epsilon_for_reduction(std::span<const double> b, double reduction);

/// Hierarchy and a single solve of a lifted problem.
struct SolveRun {
  SolveOutcome outcome;
  nlohmann::json hierarchy;
  double epsilon = 0.0;
};

SolveRun run_solver(const FlowProblem& problem, const ExperimentConfig& cfg,
                    PreconditionerKind kind, bool standard_multigrid = false);

struct BaseCaseResult {
  StudyReport study;
  SolveReport solve;
  nlohmann::json hierarchy;
  CellField pressure;
};

BaseCaseResult run_base_case(const ExperimentConfig& cfg);
StudyReport run_scaling_study(const ExperimentConfig& cfg);

/// b' = A x~, so x~ solves the new problem exactly.
struct ExactProblem {
  Vector b;
  Vector x;
};
ExactProblem make_exact_test_problem(const StencilOperator& a, std::span<const double> b,
                                     std::span<const double> x_approx);

struct AccuracyFit {
  std::size_t points = 0;
  /// Fine iterations per decade of RMS error.
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// Error reduction per fine iteration.
  double contraction = 0.0;
  double max_over_rms = 0.0;
};

/// Linear fit of iterations against -log10(RMS error) over the rows above
/// the rounding floor.
AccuracyFit fit_accuracy(const StudyReport& report);

StudyReport run_accuracy_study(const ExperimentConfig& cfg);
StudyReport run_variance_study(const ExperimentConfig& cfg);

struct ChannelResult {
  StudyReport study;
  SolveReport semi;
  SolveReport uniform;
  nlohmann::json semi_hierarchy;
  nlohmann::json uniform_hierarchy;
};

ChannelResult run_channel_case(const ExperimentConfig& cfg);

/// Recursive multi-scale, Tatebe, polynomial and standard multigrid on the
/// same field.
StudyReport compare_methods(const ExperimentConfig& cfg);

}  // namespace mscg
