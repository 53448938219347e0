#include <benchmark/benchmark.h>

#include "tfn/clebsch_gordan.hpp"
#include "tfn/random.hpp"
#include "tfn/spherical_harmonics.hpp"
#include "tfn/wigner.hpp"

namespace {

void BM_RealSphericalHarmonics(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  tfn::RandomEngine rng(1);
  const tfn::so3::Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(tfn::so3::real_spherical_harmonics(l, dir));
  }
}
BENCHMARK(BM_RealSphericalHarmonics)->Arg(1)->Arg(2)->Arg(4);

void BM_CGTableBuild(benchmark::State& state) {
  const int l_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tfn::so3::CGTable(l_max));
  }
}
BENCHMARK(BM_CGTableBuild)->Arg(2)->Arg(4);

void BM_WignerD(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const tfn::so3::CGTable cg(l);
  tfn::RandomEngine rng(2);
  const tfn::so3::Rotation g = tfn::so3::Rotation::random(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tfn::so3::wigner_d_matrix(l, g, cg));
  }
}
BENCHMARK(BM_WignerD)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
