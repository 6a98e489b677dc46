#include <benchmark/benchmark.h>

#include <numbers>

#include "mscg/field_gen.hpp"
#include "mscg/solvers.hpp"

namespace {

using namespace mscg;

CellField field(int n) {
  const Grid2D g(n, n, 0.128 / n, 0.128 / n);
  const auto spec = CorrelationSpec::oriented(CorrelationModel::kPowerLaw, 0.016, 0.002,
                                              15.0 * std::numbers::pi / 180.0, 0.0, 2.0);
  return generate_lognormal_field(g, spec, 1);
}

LiftedProblem problem(int n) {
  const CellField k = field(n);
  return boundary_lift(k, BoundarySpec::left_right_pressure_drop(k.grid()), CellField(k.grid()));
}

void BM_StencilApply(benchmark::State& state) {
  const auto p = problem(static_cast<int>(state.range(0)));
  Vector x(p.op->size(), 1.0), y(p.op->size());
  for (auto _ : state) {
    p.op->apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.op->size()));
}
BENCHMARK(BM_StencilApply)->Arg(256)->Arg(1024);

void BM_SgsInverse(benchmark::State& state) {
  const auto p = problem(static_cast<int>(state.range(0)));
  const Splitting s(p.op, SplittingKind::kSymmetricGaussSeidel);
  Vector v(p.op->size(), 1.0);
  for (auto _ : state) {
    s.apply_p_inverse_inplace(v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.op->size()));
}
BENCHMARK(BM_SgsInverse)->Arg(256)->Arg(1024);

void BM_RecursiveMsSolve(benchmark::State& state) {
  const auto p = problem(static_cast<int>(state.range(0)));
  const auto h = build_hierarchy(p.transmissivity);
  SolveParams params;
  params.record_events = false;
  double bb = 0.0;
  for (double v : p.source) bb += v * v;
  params.epsilon = std::sqrt(1e-10 * bb / p.source.size());
  for (auto _ : state) {
    auto out = solve(h, p.source, PreconditionerKind::kRecursiveMultiscale, params);
    benchmark::DoNotOptimize(out.x.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.op->size()));
}
BENCHMARK(BM_RecursiveMsSolve)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_FieldGeneration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto k = field(n);
    benchmark::DoNotOptimize(k.values().data());
  }
}
BENCHMARK(BM_FieldGeneration)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
