#pragma once

/// @file solvers.hpp
/// @brief Preconditioned conjugate gradients, the polynomial, multigrid
/// (Tatebe) and recursive multi-scale preconditioners, and standard
/// multigrid as a stationary iteration.

#include <chrono>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mscg/multiscale.hpp"

namespace mscg {

struct SolveParams {
  /// Target RMS residual on the finest level.
  double epsilon = 1e-5;
  /// Per-level tightening factor of the squared tolerance.
  double f = 0.1;
  int max_iterations = 100;
  /// Overrides the hierarchy's per-level smoothing degree.
  std::optional<int> smoothing_degree;
  /// Standard multigrid stops when the residual norm grows by this factor.
  double divergence_factor = 10.0;
  /// Record the enter/leave trace of every level visit.
  bool record_events = true;
};

/// Threshold on ||r||^2 at level k: N_k f^k epsilon^2.
double level_tolerance(int k, const SolveParams& params, std::size_t nk);

/// Thrown by PCG when p^T A p <= 0.
class IndefiniteOperatorError : public std::runtime_error {
 public:
  IndefiniteOperatorError(int iteration, double curvature);
  [[nodiscard]] int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct LevelEvent {
  int level;
  bool enter;
  double seconds;
};

struct LevelStats {
  int level = 0;
  Grid2D grid;
  /// PCG iterations on the level, or cycle visits for single-sweep methods.
  /// The coarsest level counts one per direct solve.
  long iterations = 0;
  long inner_solves = 0;
};

struct SolveReport {
  std::string method;
  std::vector<LevelStats> levels;
  std::vector<LevelEvent> events;
  /// Fine-level RMS residual after each iteration, starting with the initial.
  std::vector<double> residual_history;
  double initial_rms = 0.0;
  double final_rms = 0.0;
  double wall_seconds = 0.0;
  bool converged = false;
  bool diverged = false;
  /// Inner solves that stopped at their iteration cap.
  long inner_failures = 0;

  [[nodiscard]] long fine_iterations() const;
  /// Sum over levels of iterations times dimension.
  [[nodiscard]] double flop_proxy() const;
  /// Fraction of the flop proxy spent on level k.
  [[nodiscard]] double level_share(std::size_t k) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct SolveOutcome {
  Vector x;
  SolveReport report;
};

/// z = M^-1 r. Implementations may keep internal scratch and are therefore
/// not const.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<const double> r, std::span<double> z) = 0;
  /// Attach a report that receives coarse-level statistics.
  virtual void set_report(SolveReport* /*report*/) {}
  [[nodiscard]] virtual std::string name() const = 0;

  [[nodiscard]] Vector apply(std::span<const double> r);
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  void apply(std::span<const double> r, std::span<double> z) override;
  using Preconditioner::apply;
  [[nodiscard]] std::string name() const override { return "none"; }
};

/// Sum_{j=0}^{2m} (P^-1 Q)^j P^-1, evaluated as 2m+1 smoothing steps from zero.
class PolynomialPreconditioner final : public Preconditioner {
 public:
  PolynomialPreconditioner(const Splitting& s, int m);
  void apply(std::span<const double> r, std::span<double> z) override;
  using Preconditioner::apply;
  [[nodiscard]] std::string name() const override { return "polynomial"; }

 private:
  const Splitting* s_;
  int m_;
  Vector t_;
};

/// Coarsest-level factorisation used as a preconditioner.
class DirectPreconditioner final : public Preconditioner {
 public:
  explicit DirectPreconditioner(const DirectSolver& solver) : solver_(&solver) {}
  void apply(std::span<const double> r, std::span<double> z) override;
  using Preconditioner::apply;
  [[nodiscard]] std::string name() const override { return "direct"; }

 private:
  const DirectSolver* solver_;
};

class MultilevelWorkspace;

enum class CoarseSolve {
  /// One recursive cycle on the coarse level.
  kSingleCycle,
  /// Inner PCG on the coarse level to its level tolerance (recursive multi-scale).
  kInnerPcg,
};

/// Symmetric two-grid cycle on level k: m smoothing steps, coarse
/// correction E W R, m smoothing steps. W is either one recursive cycle or
/// an inner PCG solve; on the coarsest level the cycle is the direct solve.
class MultilevelPreconditioner final : public Preconditioner {
 public:
  MultilevelPreconditioner(const LevelHierarchy& h, CoarseSolve coarse,
                           const SolveParams& params = {}, std::size_t level = 0);
  ~MultilevelPreconditioner() override;
  MultilevelPreconditioner(const MultilevelPreconditioner&) = delete;
  MultilevelPreconditioner& operator=(const MultilevelPreconditioner&) = delete;

  void apply(std::span<const double> r, std::span<double> z) override;
  using Preconditioner::apply;
  void set_report(SolveReport* report) override;
  [[nodiscard]] std::string name() const override;

 private:
  std::unique_ptr<MultilevelWorkspace> work_;
  std::size_t level_;
};

enum class PreconditionerKind { kNone, kPolynomial, kTatebe, kRecursiveMultiscale };

const char* to_string(PreconditionerKind kind);
/// Accepts none, polynomial, tatebe, ms (and the long forms).
PreconditionerKind parse_preconditioner(const std::string& name);

/// Conjugate gradients with convergence on the true residual
/// ||b - A x||^2 < level_tolerance(level). Throws IndefiniteOperatorError.
SolveOutcome pcg(const StencilOperator& a, std::span<const double> b, Preconditioner& m,
                 const SolveParams& params, std::span<const double> x0 = {}, int level = 0);

/// PCG on the finest level of the hierarchy with the chosen preconditioner.
SolveOutcome solve(const LevelHierarchy& h, std::span<const double> b, PreconditionerKind kind,
                   const SolveParams& params);

/// x <- x + M0^-1 (b - A x) with the multigrid cycle as M0^-1. Stops at the
/// fine-level tolerance, the iteration cap, or on divergence (flagged).
SolveOutcome standard_multigrid_solve(const LevelHierarchy& h, std::span<const double> b,
                                      const SolveParams& params);

Vector precond_polynomial(const Splitting& s, int m, std::span<const double> v);
Vector precond_tatebe(const LevelHierarchy& h, std::size_t level, std::span<const double> v);
Vector precond_recursive_ms(const LevelHierarchy& h, std::size_t level,
                            std::span<const double> v, const SolveParams& params);

}  // namespace mscg
