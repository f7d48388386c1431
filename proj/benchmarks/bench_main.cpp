#include <benchmark/benchmark.h>

#include <random>

#include "gencont/bvp1d.hpp"
#include "gencont/constitutive.hpp"
#include "gencont/modes.hpp"
#include "gencont/tensor.hpp"

using namespace gencont;

namespace {

void bm_energy_density(benchmark::State& state) {
  const Model model = static_cast<Model>(state.range(0));
  std::mt19937_64 rng(1);
  const IsotropicModuli p;
  const KinematicState s = random_state(model, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy_density(model, p, s));
  }
}
BENCHMARK(bm_energy_density)->DenseRange(0, 4)->Unit(benchmark::kNanosecond);

void bm_anti_power(benchmark::State& state) {
  const Vec3 v(0.3, -1.2, 0.7);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(anti_power(v, n));
  }
}
BENCHMARK(bm_anti_power)->Arg(2)->Arg(5)->Arg(9)->Unit(benchmark::kNanosecond);

ProblemSpec bench_spec(int n) {
  ProblemSpec spec;
  spec.model = Model::Micromorphic;
  spec.test = TestKind::SimpleShear;
  spec.bc = BcKind::ConsistentCoupling;
  spec.params.L_c = 0.5;
  spec.n = n;
  return spec;
}

void bm_assemble(benchmark::State& state) {
  const ProblemSpec spec = bench_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble(spec));
  }
}
BENCHMARK(bm_assemble)->Arg(64)->Arg(512)->Arg(4096)->Unit(benchmark::kMicrosecond);

void bm_solve(benchmark::State& state) {
  const ProblemSpec spec = bench_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(spec).stiffness);
  }
}
BENCHMARK(bm_solve)->Arg(64)->Arg(512)->Arg(4096)->Unit(benchmark::kMicrosecond);

void bm_solve_spline(benchmark::State& state) {
  ProblemSpec spec = bench_spec(static_cast<int>(state.range(0)));
  spec.model = Model::SecondGradient;
  spec.bc = BcKind::NormalClamp;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(spec).stiffness);
  }
}
BENCHMARK(bm_solve_spline)->Arg(64)->Arg(512)->Arg(4096)->Unit(benchmark::kMicrosecond);

void bm_mode_kernel(benchmark::State& state) {
  const IsotropicModuli p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(zero_energy_kernel(Model::Micromorphic, p).dim);
  }
}
BENCHMARK(bm_mode_kernel)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
