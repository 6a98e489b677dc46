// Command line driver for the solver experiments.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <iomanip>
#include <iostream>

#include "mscg/harness.hpp"

namespace {

void print_levels(const mscg::SolveReport& r) {
  std::cout << std::setw(6) << "level" << std::setw(14) << "grid" << std::setw(12) << "dimension"
            << std::setw(12) << "iterations" << std::setw(16) << "iter*dim" << std::setw(10)
            << "percent" << '\n';
  const double total = r.flop_proxy();
  for (auto it = r.levels.rbegin(); it != r.levels.rend(); ++it) {
    const double work = static_cast<double>(it->iterations) * it->grid.size();
    std::cout << std::setw(6) << it->level << std::setw(14)
              << (std::to_string(it->grid.nx) + "x" + std::to_string(it->grid.ny))
              << std::setw(12) << it->grid.size() << std::setw(12) << it->iterations
              << std::setw(16) << std::fixed << std::setprecision(0) << work << std::setw(10)
              << std::setprecision(2) << (total > 0 ? 100.0 * work / total : 0.0) << '\n';
    std::cout.unsetf(std::ios::fixed);
  }
  std::cout << "total " << std::setprecision(10) << total << "  converged " << r.converged
            << "  final rms " << std::setprecision(4) << r.final_rms << "  wall "
            << r.wall_seconds << " s\n";
}

void print_study(const mscg::StudyReport& s) { std::cout << s.to_csv(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive multi-scale conjugate gradient experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI key = value file");

  mscg::ExperimentConfig cfg;
  std::string preconditioner = "ms";
  std::string splitting = "sgs";
  std::string boundary = "mixed";
  std::string model = "power-law";
  std::string log_level = "info";
  int m = 0;
  std::string output;

  app.add_option("--nx", cfg.nx, "Cells along x")->capture_default_str();
  app.add_option("--ny", cfg.ny, "Cells along y")->capture_default_str();
  app.add_option("--cell-size", cfg.cell_size, "Cell width")->capture_default_str();
  app.add_option("--cell-aspect", cfg.cell_aspect, "Cell width / height")->capture_default_str();
  app.add_option("--model", model, "power-law or gaussian")->capture_default_str();
  app.add_option("--major-cutoff", cfg.major_cutoff)->capture_default_str();
  app.add_option("--minor-cutoff", cfg.minor_cutoff)->capture_default_str();
  app.add_option("--angle", cfg.angle_degrees, "Orientation in degrees")->capture_default_str();
  app.add_option("--mean", cfg.log_mean, "Mean of log K")->capture_default_str();
  app.add_option("--variance", cfg.log_variance, "Variance of log K")->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--boundary", boundary, "mixed or dirichlet")->capture_default_str();
  app.add_option("--reduction", cfg.reduction, "Reduction of ||r||^2/N")->capture_default_str();
  app.add_option("--f", cfg.solver.f, "Per-level tolerance factor")->capture_default_str();
  app.add_option("--max-iterations", cfg.solver.max_iterations)->capture_default_str();
  app.add_option("--m", m, "Smoothing degree (0: scale factor)")->capture_default_str();
  app.add_option("--scale", cfg.hierarchy.scale, "Scale factor between levels")
      ->capture_default_str();
  app.add_option("--threshold", cfg.hierarchy.coarsest_threshold, "Coarsest level dimension")
      ->capture_default_str();
  app.add_option("--splitting", splitting, "sgs or jacobi")->capture_default_str();
  app.add_option("--preconditioner", preconditioner, "ms, tatebe, polynomial or none")
      ->capture_default_str();
  app.add_flag("--semi,!--no-semi", cfg.hierarchy.semi_coarsen, "Semi-coarsening");
  app.add_option("--sizes", cfg.sizes, "Scaling study sizes")->capture_default_str();
  app.add_option("--fine-size", cfg.fine_size, "Scaling study fine field")->capture_default_str();
  app.add_option("--variances", cfg.variances, "Variance study values")->capture_default_str();
  app.add_option("--repeats", cfg.timing_repeats, "Best-of-n timing")->capture_default_str();
  app.add_option("--channel-nx", cfg.channel_nx)->capture_default_str();
  app.add_option("--channel-ny", cfg.channel_ny)->capture_default_str();
  app.add_option("--channel-aspect", cfg.channel_aspect)->capture_default_str();
  app.add_option("-o,--output", output, "Output directory");
  app.add_flag("--export-fields,!--no-export-fields", cfg.export_fields);
  app.add_option("--log-level", log_level)->capture_default_str();

  auto* base = app.add_subcommand("base", "Base case with per-level table");
  auto* scaling = app.add_subcommand("scaling", "Truncated-field scaling study");
  auto* accuracy = app.add_subcommand("accuracy", "Accuracy against an exact solution");
  auto* variance = app.add_subcommand("variance", "Variance robustness study");
  auto* channel = app.add_subcommand("channel", "Anisotropic channel with semi-coarsening");
  auto* compare = app.add_subcommand("compare", "All methods on one field");

  CLI11_PARSE(app, argc, argv);

  try {
    spdlog::set_default_logger(spdlog::stderr_color_mt("mscg"));
    spdlog::set_level(spdlog::level::from_str(log_level));
    cfg.preconditioner = mscg::parse_preconditioner(preconditioner);
    cfg.boundary = mscg::parse_boundary_setup(boundary);
    if (model == "power-law") {
      cfg.model = mscg::CorrelationModel::kPowerLaw;
    } else if (model == "gaussian") {
      cfg.model = mscg::CorrelationModel::kGaussian;
    } else {
      throw std::invalid_argument("unknown model '" + model + "'");
    }
    if (splitting == "sgs") {
      cfg.hierarchy.splitting = mscg::SplittingKind::kSymmetricGaussSeidel;
    } else if (splitting == "jacobi") {
      cfg.hierarchy.splitting = mscg::SplittingKind::kModifiedJacobi;
    } else {
      throw std::invalid_argument("unknown splitting '" + splitting + "'");
    }
    if (m > 0) cfg.hierarchy.smoothing_degree = m;
    cfg.output_dir = output;

    if (base->parsed()) {
      cfg.experiment = "base";
      const auto r = mscg::run_base_case(cfg);
      print_levels(r.solve);
    } else if (scaling->parsed()) {
      cfg.experiment = "scaling";
      print_study(mscg::run_scaling_study(cfg));
    } else if (accuracy->parsed()) {
      cfg.experiment = "accuracy";
      const auto s = mscg::run_accuracy_study(cfg);
      print_study(s);
      const auto fit = mscg::fit_accuracy(s);
      std::cout << "fit points " << fit.points << " slope " << fit.slope << " r2 "
                << fit.r_squared << " contraction " << fit.contraction << " max/rms "
                << fit.max_over_rms << '\n';
    } else if (variance->parsed()) {
      cfg.experiment = "variance";
      print_study(mscg::run_variance_study(cfg));
    } else if (channel->parsed()) {
      cfg.experiment = "channel";
      const auto r = mscg::run_channel_case(cfg);
      std::cout << "semi-coarsening\n";
      print_levels(r.semi);
      std::cout << "uniform coarsening\n";
      print_levels(r.uniform);
    } else if (compare->parsed()) {
      cfg.experiment = "compare";
      print_study(mscg::compare_methods(cfg));
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
