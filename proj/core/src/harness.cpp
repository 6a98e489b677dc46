#include "mscg/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mscg/field_io.hpp"

namespace mscg {

BoundarySetup parse_boundary_setup(const std::string& name) {
  if (name == "mixed") return BoundarySetup::kMixed;
  if (name == "dirichlet") return BoundarySetup::kDirichlet;
  throw std::invalid_argument("unknown boundary setup '" + name + "' (expected mixed or dirichlet)");
}

const char* to_string(BoundarySetup setup) {
  return setup == BoundarySetup::kMixed ? "mixed" : "dirichlet";
}

CorrelationSpec ExperimentConfig::correlation() const {
  return CorrelationSpec::oriented(model, major_cutoff, minor_cutoff,
                                   angle_degrees * std::numbers::pi / 180.0, log_mean,
                                   log_variance);
}

Grid2D ExperimentConfig::grid() const { return Grid2D(nx, ny, cell_size, cell_size / cell_aspect); }

nlohmann::json ExperimentConfig::to_json() const {
  return {{"experiment", experiment},
          {"nx", nx},
          {"ny", ny},
          {"cell_size", cell_size},
          {"cell_aspect", cell_aspect},
          {"model", model == CorrelationModel::kPowerLaw ? "power-law" : "gaussian"},
          {"major_cutoff", major_cutoff},
          {"minor_cutoff", minor_cutoff},
          {"angle_degrees", angle_degrees},
          {"log_mean", log_mean},
          {"log_variance", log_variance},
          {"seed", seed},
          {"boundary", to_string(boundary)},
          {"reduction", reduction},
          {"f", solver.f},
          {"max_iterations", solver.max_iterations},
          {"smoothing_degree", hierarchy.smoothing_degree ? *hierarchy.smoothing_degree : 0},
          {"scale", hierarchy.scale},
          {"coarsest_threshold", hierarchy.coarsest_threshold},
          {"splitting", to_string(hierarchy.splitting)},
          {"semi_coarsen", hierarchy.semi_coarsen},
          {"preconditioner", mscg::to_string(preconditioner)},
          {"sizes", sizes},
          {"fine_size", fine_size},
          {"variances", variances}};
}

std::string StudyReport::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "study,label,nx,ny,dimension,log_variance,k_ratio,preconditioner,fine_iterations,"
         "converged,us_per_point,flop_proxy,level0_share,final_rms,epsilon,rms_error,"
         "max_error,levels\n";
  for (const auto& r : rows) {
    out << study << ',' << r.label << ',' << r.nx << ',' << r.ny << ',' << r.dimension << ','
        << r.log_variance << ',' << r.k_ratio << ',' << r.preconditioner << ','
        << r.fine_iterations << ',' << (r.converged ? 1 : 0) << ','
        << r.microseconds_per_point << ',' << r.flop_proxy << ',' << r.level0_share << ','
        << r.final_rms << ',' << r.epsilon << ',' << r.rms_error << ',' << r.max_error << ','
        << r.levels << '\n';
  }
  return out.str();
}

void StudyReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_csv();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

BoundarySpec make_boundary(const Grid2D& g, BoundarySetup setup) {
  BoundarySpec bc = BoundarySpec::left_right_pressure_drop(g, 1.0, 0.0);
  if (setup == BoundarySetup::kDirichlet) {
    for (int i = 0; i < g.nx; ++i) {
      const double p = 1.0 - (i + 0.5) / g.nx;
      bc.at(Side::kBottom, i) = BoundaryCondition::dirichlet(p);
      bc.at(Side::kTop, i) = BoundaryCondition::dirichlet(p);
    }
  }
  return bc;
}

HierarchyParams hierarchy_params(const ExperimentConfig& cfg) {
  HierarchyParams p = cfg.hierarchy;
  if (cfg.solver.smoothing_degree && !p.smoothing_degree) {
    p.smoothing_degree = cfg.solver.smoothing_degree;
  }
  return p;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void prepare_output(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);
}

StudyRow row_from(const std::string& label, const FlowProblem& p, const SolveRun& run) {
  const Grid2D& g = p.permeability.grid();
  const SolveReport& r = run.outcome.report;
  StudyRow row;
  row.label = label;
  row.nx = g.nx;
  row.ny = g.ny;
  row.dimension = g.size();
  row.log_variance = log_moments(p.permeability).variance;
  row.k_ratio = max_min_ratio(p.permeability);
  row.preconditioner = r.method;
  row.fine_iterations = r.fine_iterations();
  row.converged = r.converged;
  row.microseconds_per_point = 1e6 * r.wall_seconds / static_cast<double>(g.size());
  row.flop_proxy = r.flop_proxy();
  row.level0_share = r.level_share(0);
  row.final_rms = r.final_rms;
  row.epsilon = run.epsilon;
  row.rms_error = std::numeric_limits<double>::quiet_NaN();
  row.max_error = std::numeric_limits<double>::quiet_NaN();
  row.levels = r.levels.size();
  return row;
}

}  // namespace

FlowProblem make_flow_problem(const CellField& permeability, BoundarySetup setup) {
  FlowProblem p{permeability, make_boundary(permeability.grid(), setup), {}};
  p.lifted = boundary_lift(p.permeability, p.boundary, CellField(permeability.grid(), 0.0));
  return p;
}

double epsilon_for_reduction(std::span<const double> b, double reduction) {
  if (!(reduction > 0.0)) throw std::invalid_argument("reduction must be > 0");
  const double rms = rms_residual(b);
  return rms > 0.0 ? rms * std::sqrt(reduction) : std::sqrt(reduction);
}

SolveRun run_solver(const FlowProblem& problem, const ExperimentConfig& cfg,
                    PreconditionerKind kind, bool standard_multigrid) {
  SolveRun run;
  const LevelHierarchy h =
      build_hierarchy(problem.lifted.transmissivity, hierarchy_params(cfg));
  run.hierarchy = hierarchy_summary(h);
  SolveParams params = cfg.solver;
  params.epsilon = epsilon_for_reduction(problem.lifted.source, cfg.reduction);
  run.epsilon = params.epsilon;
  const int repeats = std::max(1, cfg.timing_repeats);
  for (int rep = 0; rep < repeats; ++rep) {
    SolveOutcome out = standard_multigrid ? standard_multigrid_solve(h, problem.lifted.source, params)
                                          : solve(h, problem.lifted.source, kind, params);
    if (rep == 0 || out.report.wall_seconds < run.outcome.report.wall_seconds) {
      run.outcome = std::move(out);
    }
  }
  return run;
}

BaseCaseResult run_base_case(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  const CellField k = generate_lognormal_field(cfg.grid(), cfg.correlation(), cfg.seed, cfg.generator);
  const FlowProblem problem = make_flow_problem(k, cfg.boundary);
  spdlog::info("base case {} variance {} ratio {:.3g}", cfg.grid().describe(),
               log_moments(k).variance, max_min_ratio(k));
  SolveRun run = run_solver(problem, cfg, cfg.preconditioner);

  BaseCaseResult result;
  result.study.study = "base";
  result.study.rows.push_back(row_from("base", problem, run));
  result.solve = run.outcome.report;
  result.hierarchy = run.hierarchy;
  result.pressure = problem.lifted.reconstruct(run.outcome.x);

  if (!cfg.output_dir.empty()) {
    result.study.write_csv(cfg.output_dir / "base_study.csv");
    write_json(cfg.output_dir / "base_solve.json",
               {{"config", cfg.to_json()}, {"hierarchy", run.hierarchy}, {"solve", result.solve.to_json()}});
    if (cfg.export_fields) {
      Vector logk(k.size());
      std::transform(k.values().begin(), k.values().end(), logk.begin(),
                     [](double v) { return std::log(v); });
      export_field(CellField(k.grid(), std::move(logk)), cfg.output_dir / "log_permeability.bin");
      export_field(result.pressure, cfg.output_dir / "pressure.bin");
    }
  }
  return result;
}

StudyReport run_scaling_study(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  const int largest = *std::max_element(cfg.sizes.begin(), cfg.sizes.end());
  if (largest > cfg.fine_size) {
    throw std::invalid_argument("run_scaling_study: sizes exceed the fine field");
  }
  const Grid2D fine(cfg.fine_size, cfg.fine_size, cfg.cell_size, cfg.cell_size / cfg.cell_aspect);
  const CellField field = generate_lognormal_field(fine, cfg.correlation(), cfg.seed, cfg.generator);

  StudyReport report;
  report.study = "scaling";
  for (int n : cfg.sizes) {
    const FlowProblem problem = make_flow_problem(extract_subgrid(field, n, n), cfg.boundary);
    for (PreconditionerKind kind :
         {PreconditionerKind::kRecursiveMultiscale, PreconditionerKind::kTatebe}) {
      SolveRun run = run_solver(problem, cfg, kind);
      report.rows.push_back(row_from("n=" + std::to_string(n), problem, run));
      spdlog::info("scaling {}x{} {}: {} iterations, {:.3g} us/point", n, n, to_string(kind),
                   report.rows.back().fine_iterations, report.rows.back().microseconds_per_point);
    }
  }
  if (!cfg.output_dir.empty()) report.write_csv(cfg.output_dir / "scaling_study.csv");
  return report;
}

ExactProblem make_exact_test_problem(const StencilOperator& a, std::span<const double> b,
                                     std::span<const double> x_approx) {
  require_same_size(b.size(), a.size(), "make_exact_test_problem");
  require_same_size(x_approx.size(), a.size(), "make_exact_test_problem");
  ExactProblem p;
  p.x.assign(x_approx.begin(), x_approx.end());
  p.b = apply_operator(a, x_approx);
  return p;
}

AccuracyFit fit_accuracy(const StudyReport& report) {
  std::vector<double> xs;
  std::vector<double> ys;
  AccuracyFit fit;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : report.rows) {
    if (!r.converged || !std::isfinite(r.rms_error) || r.rms_error <= 0.0) continue;
    // A row that does not improve on the best so far hit the same iterate
    // or the rounding floor.
    if (r.rms_error > 0.5 * best) continue;
    best = r.rms_error;
    xs.push_back(-std::log10(r.rms_error));
    ys.push_back(static_cast<double>(r.fine_iterations));
    fit.max_over_rms = std::max(fit.max_over_rms, r.max_error / r.rms_error);
  }
  fit.points = xs.size();
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.contraction = fit.slope > 0.0 ? std::pow(10.0, 1.0 / fit.slope) : 0.0;
  return fit;
}

StudyReport run_accuracy_study(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  const CellField k = generate_lognormal_field(cfg.grid(), cfg.correlation(), cfg.seed, cfg.generator);
  FlowProblem problem = make_flow_problem(k, cfg.boundary);

  ExperimentConfig crude_cfg = cfg;
  crude_cfg.reduction = cfg.crude_reduction;
  const SolveRun crude = run_solver(problem, crude_cfg, PreconditionerKind::kRecursiveMultiscale);
  const ExactProblem exact =
      make_exact_test_problem(*problem.lifted.op, problem.lifted.source, crude.outcome.x);
  problem.lifted.source = exact.b;

  StudyReport report;
  report.study = "accuracy";
  for (double reduction : cfg.accuracy_reductions) {
    ExperimentConfig c = cfg;
    c.reduction = reduction;
    SolveRun run = run_solver(problem, c, cfg.preconditioner);
    StudyRow row = row_from("reduction=" + std::to_string(reduction), problem, run);
    double sq = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < exact.x.size(); ++i) {
      const double e = run.outcome.x[i] - exact.x[i];
      sq += e * e;
      mx = std::max(mx, std::abs(e));
    }
    row.rms_error = std::sqrt(sq / static_cast<double>(exact.x.size()));
    row.max_error = mx;
    spdlog::info("accuracy reduction {:.0e}: {} iterations, rms error {:.3g}", reduction,
                 row.fine_iterations, row.rms_error);
    report.rows.push_back(row);
  }
  if (!cfg.output_dir.empty()) report.write_csv(cfg.output_dir / "accuracy_study.csv");
  return report;
}

StudyReport run_variance_study(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  CorrelationSpec spec = cfg.correlation();
  spec.log_variance = 1.0;
  const CellField base = generate_lognormal_field(cfg.grid(), spec, cfg.seed, cfg.generator);

  StudyReport report;
  report.study = "variance";
  for (double v : cfg.variances) {
    const FlowProblem problem = make_flow_problem(rescale_log_variance(base, v), cfg.boundary);
    SolveRun run = run_solver(problem, cfg, cfg.preconditioner);
    report.rows.push_back(row_from("variance=" + std::to_string(v), problem, run));
    spdlog::info("variance {}: ratio {:.3g}, {} iterations", v, report.rows.back().k_ratio,
                 report.rows.back().fine_iterations);
  }
  if (!cfg.output_dir.empty()) report.write_csv(cfg.output_dir / "variance_study.csv");
  return report;
}

ChannelResult run_channel_case(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  const Grid2D square(cfg.channel_nx, cfg.channel_nx, cfg.cell_size, cfg.cell_size);
  const CellField field = generate_lognormal_field(square, cfg.correlation(), cfg.seed, cfg.generator);
  const CellField strip = extract_subgrid(field, cfg.channel_nx, cfg.channel_ny);
  const Grid2D channel(cfg.channel_nx, cfg.channel_ny, cfg.cell_size * cfg.channel_aspect,
                       cfg.cell_size);
  const FlowProblem problem = make_flow_problem(CellField(channel, strip.values()), cfg.boundary);

  ChannelResult result;
  result.study.study = "channel";
  for (bool semi : {true, false}) {
    ExperimentConfig c = cfg;
    c.hierarchy.semi_coarsen = semi;
    SolveRun run = run_solver(problem, c, cfg.preconditioner);
    result.study.rows.push_back(row_from(semi ? "semi-coarsening" : "uniform", problem, run));
    spdlog::info("channel {}: {} iterations, converged {}", semi ? "semi" : "uniform",
                 run.outcome.report.fine_iterations(), run.outcome.report.converged);
    (semi ? result.semi : result.uniform) = run.outcome.report;
    (semi ? result.semi_hierarchy : result.uniform_hierarchy) = run.hierarchy;
  }
  if (!cfg.output_dir.empty()) {
    result.study.write_csv(cfg.output_dir / "channel_study.csv");
    write_json(cfg.output_dir / "channel_solve.json",
               {{"config", cfg.to_json()},
                {"semi_coarsening", {{"hierarchy", result.semi_hierarchy}, {"solve", result.semi.to_json()}}},
                {"uniform", {{"hierarchy", result.uniform_hierarchy}, {"solve", result.uniform.to_json()}}}});
  }
  return result;
}

StudyReport compare_methods(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  const CellField k = generate_lognormal_field(cfg.grid(), cfg.correlation(), cfg.seed, cfg.generator);
  const FlowProblem problem = make_flow_problem(k, cfg.boundary);
  StudyReport report;
  report.study = "compare";
  for (PreconditionerKind kind :
       {PreconditionerKind::kRecursiveMultiscale, PreconditionerKind::kTatebe,
        PreconditionerKind::kPolynomial}) {
    SolveRun run = run_solver(problem, cfg, kind);
    report.rows.push_back(row_from(to_string(kind), problem, run));
  }
  SolveRun mg = run_solver(problem, cfg, PreconditionerKind::kTatebe, true);
  report.rows.push_back(row_from("standard-multigrid", problem, mg));
  for (const auto& r : report.rows) {
    spdlog::info("compare {}: {} iterations, converged {}, flop proxy {:.4g}", r.label,
                 r.fine_iterations, r.converged, r.flop_proxy);
  }
  if (!cfg.output_dir.empty()) report.write_csv(cfg.output_dir / "compare_study.csv");
  return report;
}

}  // namespace mscg
