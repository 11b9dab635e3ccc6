#include <benchmark/benchmark.h>

#include "wgres/resonance.hpp"

using namespace wgres;

static void BM_AssembleK2D(benchmark::State& state) {
  const Geometry g = default_geometry_2d();
  const Truncation tr{(int)state.range(0), (int)state.range(1)};
  ResonanceContext ctx(g, {1, 1, 0}, tr);
  const double eps = 0.05 * g.d2;
  const cplx z = ctx.xi() - cplx(0.0, 0.01) * ctx.clearance();
  ctx.overlaps(eps);  // warm the cache, the loop times assembly alone
  for (auto _ : state) benchmark::DoNotOptimize(ctx.assemble(z, eps));
}
BENCHMARK(BM_AssembleK2D)->Args({64, 256})->Args({128, 512})->Args({256, 1024})
    ->Unit(benchmark::kMillisecond);

static void BM_AssembleK3D(benchmark::State& state) {
  const Geometry g = default_geometry_3d();
  const Truncation tr{(int)state.range(0), (int)state.range(1)};
  ResonanceContext ctx(g, {1, 1, 1}, tr);
  const double eps = 0.05 * g.d2;
  const cplx z = ctx.xi() - cplx(0.0, 0.01) * ctx.clearance();
  ctx.overlaps(eps);
  for (auto _ : state) benchmark::DoNotOptimize(ctx.assemble(z, eps));
}
BENCHMARK(BM_AssembleK3D)->Args({16, 64})->Args({24, 128})
    ->Unit(benchmark::kMillisecond);

static void BM_ScalarEval2D(benchmark::State& state) {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{64, 256});
  const double eps = 0.05 * g.d2;
  const cplx z = ctx.xi() - cplx(0.0, 0.01) * ctx.clearance();
  ctx.overlaps(eps);
  for (auto _ : state) {
    const TruncatedBS bs = ctx.assemble(z, eps);
    const Eigen::MatrixXcd dK = ctx.assemble_dz(z, eps);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(bs.K);
    benchmark::DoNotOptimize(lu.solve(dK).trace());
  }
}
BENCHMARK(BM_ScalarEval2D)->Unit(benchmark::kMillisecond);

static void BM_Solve2D(benchmark::State& state) {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{64, 256});
  const double eps = 0.05 * g.d2;
  ctx.overlaps(eps);
  const cplx z0 = ctx.xi() * cplx(1.0, -1e-8);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_resonance(ctx, eps, z0, 1e-12));
}
BENCHMARK(BM_Solve2D)->Unit(benchmark::kMillisecond);

static void BM_BranchEigenpair(benchmark::State& state) {
  const Geometry g = default_geometry_2d();
  ResonanceContext ctx(g, {1, 1, 0}, Truncation{(int)state.range(0), 256});
  const double eps = 0.05 * g.d2;
  const cplx z = ctx.xi() - cplx(0.0, 0.01) * ctx.clearance();
  const TruncatedBS bs = ctx.assemble(z, eps);
  for (auto _ : state)
    benchmark::DoNotOptimize(branch_eigenpair(bs, ctx.seed_flat()));
}
BENCHMARK(BM_BranchEigenpair)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
