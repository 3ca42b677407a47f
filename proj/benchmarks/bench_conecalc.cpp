#include <benchmark/benchmark.h>

#include "conecalc/calculus.hpp"
#include "conecalc/discretize.hpp"
#include "conecalc/geometry.hpp"
#include "conecalc/linalg.hpp"
#include "conecalc/pde.hpp"

using namespace conecalc;

namespace {

DiscreteOperator laplacian_target(int points, int cutoff) {
  const FuchsOperator op = make_cone_laplacian(CrossSectionSpectrum::circle(cutoff), 1.0, WeightData{});
  return assemble(op, LogGrid(-12.0, 12.0, points, GridKind::model_cone));
}

void BM_PlanContour(benchmark::State& state) {
  const KeyholeRegion region(0.5, pi / 4);
  const std::vector<cplx> zs{-1.0, -0.5, {-0.1, 5.0}};
  for (auto _ : state) benchmark::DoNotOptimize(plan_contour(region, 1e13, zs, 1e-9));
}
BENCHMARK(BM_PlanContour);

void BM_Assemble(benchmark::State& state) {
  const FuchsOperator op = make_cone_laplacian(CrossSectionSpectrum::circle(4), 1.0, WeightData{});
  const LogGrid grid(-12.0, 12.0, static_cast<int>(state.range(0)), GridKind::model_cone);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(op, grid));
}
BENCHMARK(BM_Assemble)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BandedInverse(benchmark::State& state) {
  const DiscreteOperator target = laplacian_target(static_cast<int>(state.range(0)), 0);
  const CMatrix& m = target.modes[0].matrix;
  for (auto _ : state) benchmark::DoNotOptimize(BandedLU(m, lower_bandwidth(m), upper_bandwidth(m)).inverse());
}
BENCHMARK(BM_BandedInverse)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_DunfordPower(benchmark::State& state) {
  const DiscreteOperator target = laplacian_target(static_cast<int>(state.range(0)), 0);
  const std::vector<cplx> zs{-1.0, -0.5, {-0.1, 3.0}, {-0.1, 5.0}};
  const ContourQuadrature contour = make_contour(target, zs, ContourOptions{});
  for (auto _ : state) benchmark::DoNotOptimize(dunford_power(target, zs, contour));
  state.counters["nodes"] = static_cast<double>(contour.nodes.size());
}
BENCHMARK(BM_DunfordPower)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SolveHeat(benchmark::State& state) {
  CauchyProblem p;
  p.target = laplacian_target(256, 4);
  p.steps = static_cast<int>(state.range(0));
  p.check_spectrum = false;
  p.forcing = [&](double) {
    ModeVectors f;
    for (const auto& m : p.target.modes) f.push_back(CVector::Ones(m.matrix.rows()));
    return f;
  };
  for (auto _ : state) benchmark::DoNotOptimize(solve_heat(p));
}
BENCHMARK(BM_SolveHeat)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
