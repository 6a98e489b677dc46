#include "mscg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mscg {

using Clock = std::chrono::steady_clock;

double level_tolerance(int k, const SolveParams& params, std::size_t nk) {
  if (k < 0) throw std::invalid_argument("level_tolerance: level must be >= 0");
  return static_cast<double>(nk) * std::pow(params.f, k) * params.epsilon * params.epsilon;
}

IndefiniteOperatorError::IndefiniteOperatorError(int iteration, double curvature)
    : std::runtime_error("pcg: p^T A p = " + std::to_string(curvature) + " <= 0 at iteration " +
                         std::to_string(iteration) + " (operator is not positive definite)"),
      iteration_(iteration) {}

long SolveReport::fine_iterations() const { return levels.empty() ? 0 : levels.front().iterations; }

double SolveReport::flop_proxy() const {
  double total = 0.0;
  for (const auto& l : levels) total += static_cast<double>(l.iterations) * l.grid.size();
  return total;
}

double SolveReport::level_share(std::size_t k) const {
  const double total = flop_proxy();
  if (k >= levels.size() || total == 0.0) return 0.0;
  return static_cast<double>(levels[k].iterations) * levels[k].grid.size() / total;
}

nlohmann::json SolveReport::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  const double total = flop_proxy();
  for (const auto& l : levels) {
    const double work = static_cast<double>(l.iterations) * l.grid.size();
    table.push_back({{"level", l.level},
                     {"grid", std::to_string(l.grid.nx) + "x" + std::to_string(l.grid.ny)},
                     {"nx", l.grid.nx},
                     {"ny", l.grid.ny},
                     {"dimension", l.grid.size()},
                     {"iterations", l.iterations},
                     {"inner_solves", l.inner_solves},
                     {"iterations_x_dimension", work},
                     {"percent_total", total > 0.0 ? 100.0 * work / total : 0.0}});
  }
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : events) trace.push_back({e.level, e.enter ? "enter" : "leave", e.seconds});
  return {{"method", method},
          {"converged", converged},
          {"diverged", diverged},
          {"fine_iterations", fine_iterations()},
          {"initial_rms", initial_rms},
          {"final_rms", final_rms},
          {"wall_seconds", wall_seconds},
          {"flop_proxy", total},
          {"inner_failures", inner_failures},
          {"levels", table},
          {"residual_history", residual_history},
          {"events", trace}};
}

Vector Preconditioner::apply(std::span<const double> r) {
  Vector z(r.size());
  apply(r, z);
  return z;
}

void IdentityPreconditioner::apply(std::span<const double> r, std::span<double> z) {
  require_same_size(r.size(), z.size(), "IdentityPreconditioner");
  std::copy(r.begin(), r.end(), z.begin());
}

PolynomialPreconditioner::PolynomialPreconditioner(const Splitting& s, int m)
    : s_(&s), m_(m), t_(s.op().size()) {
  if (m < 1) throw std::invalid_argument("PolynomialPreconditioner: m must be >= 1");
}

void PolynomialPreconditioner::apply(std::span<const double> r, std::span<double> z) {
  require_same_size(r.size(), t_.size(), "PolynomialPreconditioner");
  require_same_size(z.size(), t_.size(), "PolynomialPreconditioner");
  std::copy(r.begin(), r.end(), t_.begin());
  s_->apply_p_inverse_inplace(t_);
  std::copy(t_.begin(), t_.end(), z.begin());
  for (int step = 1; step <= 2 * m_; ++step) {
    s_->op().residual(z, r, t_);
    s_->apply_p_inverse_inplace(t_);
    axpy(1.0, t_, z);
  }
}

void DirectPreconditioner::apply(std::span<const double> r, std::span<double> z) {
  solver_->solve(r, z);
}

namespace {

struct CoreResult {
  int iterations = 0;
  bool converged = false;
  double rr = 0.0;
};

template <typename Precondition, typename OnIteration>
CoreResult pcg_core(const StencilOperator& a, std::span<const double> b, std::span<double> x,
                    std::span<double> r, std::span<double> p, std::span<double> z, double tol,
                    int max_iterations, bool x_is_zero, Precondition&& precondition,
                    OnIteration&& on_iteration) {
  if (x_is_zero) {
    std::fill(x.begin(), x.end(), 0.0);
    std::copy(b.begin(), b.end(), r.begin());
  } else {
    a.residual(x, b, r);
  }
  CoreResult out;
  out.rr = dot(r, r);
  if (out.rr == 0.0 || out.rr < tol) {
    out.converged = true;
    return out;
  }
  double rho_prev = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    precondition(std::span<const double>(r), z);
    const double rho = dot(r, z);
    if (it == 1) {
      std::copy(z.begin(), z.end(), p.begin());
    } else {
      const double beta = rho / rho_prev;
      for (std::size_t c = 0; c < p.size(); ++c) p[c] = z[c] + beta * p[c];
    }
    rho_prev = rho;
    a.apply(p, z);
    const double curvature = dot(p, z);
    if (!(curvature > 0.0)) throw IndefiniteOperatorError(it, curvature);
    const double alpha = rho / curvature;
    axpy(alpha, p, x);
    axpy(-alpha, z, r);
    out.rr = dot(r, r);
    out.iterations = it;
    if (out.rr < tol) {
      a.residual(x, b, r);
      out.rr = dot(r, r);
    }
    on_iteration(it, out.rr);
    if (out.rr < tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

void prepare_levels(SolveReport& report, std::size_t count,
                    const std::function<Grid2D(std::size_t)>& grid_of) {
  for (std::size_t k = report.levels.size(); k < count; ++k) {
    report.levels.push_back(LevelStats{static_cast<int>(k), grid_of(k), 0, 0});
  }
}

}  // namespace

class MultilevelWorkspace {
 public:
  MultilevelWorkspace(const LevelHierarchy& h, CoarseSolve mode, const SolveParams& params,
                      std::size_t top)
      : h_(h), mode_(mode), params_(params), top_(top), work_(h.size()) {
    if (top >= h.size()) throw std::out_of_range("MultilevelPreconditioner: level out of range");
    for (std::size_t k = top; k < h.size(); ++k) {
      const std::size_t n = h.level(k).grid.size();
      Work& w = work_[k];
      w.t.resize(n);
      if (k == top) continue;
      w.x.resize(n);
      w.b.resize(n);
      if (mode_ == CoarseSolve::kInnerPcg) {
        w.r.resize(n);
        w.p.resize(n);
        w.z.resize(n);
      }
    }
  }

  void set_report(SolveReport* report) {
    report_ = report;
    origin_ = Clock::now();
    if (report_) {
      prepare_levels(*report_, h_.size(), [&](std::size_t k) { return h_.level(k).grid; });
    }
  }

  [[nodiscard]] CoarseSolve mode() const { return mode_; }

  void cycle(std::size_t k, std::span<const double> r, std::span<double> z) {
    if (k == h_.coarsest_index()) {
      h_.coarsest_solver().solve(r, z);
      return;
    }
    const Level& level = h_.level(k);
    const int m = params_.smoothing_degree.value_or(level.smoothing_degree);
    Vector& t = work_[k].t;
    std::fill(z.begin(), z.end(), 0.0);
    for (int s = 0; s < m; ++s) smooth(level, r, z, t, s == 0);

    level.op->residual(z, r, t);
    Work& c = work_[k + 1];
    level.transfer->restrict(t, c.b);
    coarse_solve(k + 1);
    level.transfer->prolongate_add(c.x, z);

    for (int s = 0; s < m; ++s) smooth(level, r, z, t, false);
  }

 private:
  struct Work {
    Vector x, b, r, p, z, t;
  };

  static void smooth(const Level& level, std::span<const double> r, std::span<double> z,
                     Vector& t, bool z_is_zero) {
    if (z_is_zero) {
      std::copy(r.begin(), r.end(), t.begin());
    } else {
      level.op->residual(z, r, t);
    }
    level.splitting.apply_p_inverse_inplace(t);
    axpy(1.0, t, z);
  }

  void coarse_solve(std::size_t k) {
    Work& w = work_[k];
    event(k, true);
    if (k == h_.coarsest_index()) {
      h_.coarsest_solver().solve(w.b, w.x);
      count(k, 1);
    } else if (mode_ == CoarseSolve::kSingleCycle) {
      cycle(k, w.b, w.x);
      count(k, 1);
    } else {
      const double tol = level_tolerance(static_cast<int>(k), params_, w.b.size());
      const CoreResult res =
          pcg_core(*h_.level(k).op, w.b, w.x, w.r, w.p, w.z, tol, params_.max_iterations, true,
                   [&](std::span<const double> rr, std::span<double> zz) { cycle(k, rr, zz); },
                   [](int, double) {});
      count(k, res.iterations);
      if (report_) {
        ++report_->levels[k].inner_solves;
        if (!res.converged) ++report_->inner_failures;
      }
    }
    event(k, false);
  }

  void count(std::size_t k, long n) {
    if (report_) report_->levels[k].iterations += n;
  }

  void event(std::size_t k, bool enter) {
    if (report_ && params_.record_events) {
      const double s = std::chrono::duration<double>(Clock::now() - origin_).count();
      report_->events.push_back({static_cast<int>(k), enter, s});
    }
  }

  const LevelHierarchy& h_;
  CoarseSolve mode_;
  SolveParams params_;
  std::size_t top_;
  std::vector<Work> work_;
  SolveReport* report_ = nullptr;
  Clock::time_point origin_ = Clock::now();
};

MultilevelPreconditioner::MultilevelPreconditioner(const LevelHierarchy& h, CoarseSolve coarse,
                                                   const SolveParams& params, std::size_t level)
    : work_(std::make_unique<MultilevelWorkspace>(h, coarse, params, level)), level_(level) {}

MultilevelPreconditioner::~MultilevelPreconditioner() = default;

void MultilevelPreconditioner::apply(std::span<const double> r, std::span<double> z) {
  work_->cycle(level_, r, z);
}

void MultilevelPreconditioner::set_report(SolveReport* report) { work_->set_report(report); }

std::string MultilevelPreconditioner::name() const {
  return work_->mode() == CoarseSolve::kSingleCycle ? "tatebe" : "recursive-ms";
}

const char* to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::kNone:
      return "none";
    case PreconditionerKind::kPolynomial:
      return "polynomial";
    case PreconditionerKind::kTatebe:
      return "tatebe";
    case PreconditionerKind::kRecursiveMultiscale:
      return "recursive-ms";
  }
  return "unknown";
}

PreconditionerKind parse_preconditioner(const std::string& name) {
  if (name == "none" || name == "cg") return PreconditionerKind::kNone;
  if (name == "polynomial" || name == "poly") return PreconditionerKind::kPolynomial;
  if (name == "tatebe" || name == "mg") return PreconditionerKind::kTatebe;
  if (name == "ms" || name == "recursive-ms" || name == "multiscale") {
    return PreconditionerKind::kRecursiveMultiscale;
  }
  throw std::invalid_argument("unknown preconditioner '" + name +
                              "' (expected none, polynomial, tatebe or ms)");
}

SolveOutcome pcg(const StencilOperator& a, std::span<const double> b, Preconditioner& m,
                 const SolveParams& params, std::span<const double> x0, int level) {
  const std::size_t n = a.size();
  require_same_size(b.size(), n, "pcg");
  if (!x0.empty()) require_same_size(x0.size(), n, "pcg initial guess");

  SolveOutcome out;
  SolveReport& report = out.report;
  report.method = m.name();
  prepare_levels(report, static_cast<std::size_t>(level) + 1,
                 [&](std::size_t) { return a.grid(); });
  out.x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), out.x.begin());
  Vector r(n), p(n), z(n);

  m.set_report(&report);
  const auto start = Clock::now();
  if (params.record_events) report.events.push_back({level, true, 0.0});
  const double tol = level_tolerance(level, params, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  if (x0.empty()) {
    report.initial_rms = rms_residual(b);
  } else {
    report.initial_rms = rms_residual(residual(a, x0, b));
  }
  report.residual_history.push_back(report.initial_rms);
  CoreResult res;
  try {
    res = pcg_core(
        a, b, out.x, r, p, z, tol, params.max_iterations, x0.empty(),
        [&](std::span<const double> rr, std::span<double> zz) { m.apply(rr, zz); },
        [&](int, double rr) { report.residual_history.push_back(std::sqrt(rr * inv_n)); });
  } catch (...) {
    m.set_report(nullptr);
    throw;
  }
  m.set_report(nullptr);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (params.record_events) report.events.push_back({level, false, report.wall_seconds});

  report.levels[static_cast<std::size_t>(level)].iterations += res.iterations;
  report.converged = res.converged;
  report.final_rms = std::sqrt(res.rr * inv_n);
  return out;
}

namespace {

std::unique_ptr<Preconditioner> make_preconditioner(const LevelHierarchy& h,
                                                    PreconditionerKind kind,
                                                    const SolveParams& params) {
  switch (kind) {
    case PreconditionerKind::kNone:
      return std::make_unique<IdentityPreconditioner>();
    case PreconditionerKind::kPolynomial:
      return std::make_unique<PolynomialPreconditioner>(
          h.finest().splitting, params.smoothing_degree.value_or(h.finest().smoothing_degree));
    case PreconditionerKind::kTatebe:
      return std::make_unique<MultilevelPreconditioner>(h, CoarseSolve::kSingleCycle, params);
    case PreconditionerKind::kRecursiveMultiscale:
      return std::make_unique<MultilevelPreconditioner>(h, CoarseSolve::kInnerPcg, params);
  }
  throw std::invalid_argument("make_preconditioner: unknown kind");
}

}  // namespace

SolveOutcome solve(const LevelHierarchy& h, std::span<const double> b, PreconditionerKind kind,
                   const SolveParams& params) {
  auto m = make_preconditioner(h, kind, params);
  SolveOutcome out = pcg(*h.finest().op, b, *m, params);
  out.report.method = to_string(kind);
  prepare_levels(out.report, h.size(), [&](std::size_t k) { return h.level(k).grid; });
  return out;
}

SolveOutcome standard_multigrid_solve(const LevelHierarchy& h, std::span<const double> b,
                                      const SolveParams& params) {
  const StencilOperator& a = *h.finest().op;
  const std::size_t n = a.size();
  require_same_size(b.size(), n, "standard_multigrid_solve");

  SolveOutcome out;
  SolveReport& report = out.report;
  report.method = "standard-multigrid";
  out.x.assign(n, 0.0);
  Vector r(b.begin(), b.end());
  Vector z(n);
  const double tol = level_tolerance(0, params, n);
  const double rr0 = dot(r, r);
  report.initial_rms = std::sqrt(rr0 / static_cast<double>(n));
  report.residual_history.push_back(report.initial_rms);

  MultilevelPreconditioner m(h, CoarseSolve::kSingleCycle, params);
  m.set_report(&report);
  const auto start = Clock::now();
  if (params.record_events) report.events.push_back({0, true, 0.0});
  double rr = rr0;
  report.converged = rr0 == 0.0 || rr0 < tol;
  for (int it = 1; it <= params.max_iterations && !report.converged; ++it) {
    m.apply(r, z);
    axpy(1.0, z, out.x);
    a.residual(out.x, b, r);
    rr = dot(r, r);
    ++report.levels[0].iterations;
    report.residual_history.push_back(std::sqrt(rr / static_cast<double>(n)));
    if (rr < tol) {
      report.converged = true;
    } else if (!std::isfinite(rr) ||
               std::sqrt(rr) > params.divergence_factor * std::sqrt(rr0)) {
      report.diverged = true;
      break;
    }
  }
  m.set_report(nullptr);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (params.record_events) report.events.push_back({0, false, report.wall_seconds});
  report.final_rms = std::sqrt(rr / static_cast<double>(n));
  return out;
}

Vector precond_polynomial(const Splitting& s, int m, std::span<const double> v) {
  PolynomialPreconditioner p(s, m);
  return p.apply(v);
}

Vector precond_tatebe(const LevelHierarchy& h, std::size_t level, std::span<const double> v) {
  MultilevelPreconditioner p(h, CoarseSolve::kSingleCycle, {}, level);
  return p.apply(v);
}

Vector precond_recursive_ms(const LevelHierarchy& h, std::size_t level,
                            std::span<const double> v, const SolveParams& params) {
  MultilevelPreconditioner p(h, CoarseSolve::kInnerPcg, params, level);
  return p.apply(v);
}

}  // namespace mscg
