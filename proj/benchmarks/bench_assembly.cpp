#include <benchmark/benchmark.h>

#include "viscofem/assembly.hpp"
#include "viscofem/cases.hpp"
#include "viscofem/meshgen.hpp"

using namespace vfem;

namespace {

struct Fixture {
  Mesh mesh = gen_cylinder_half(0.2);
  SolverParams params;
  FemSystem sys{mesh, params, cylinder_bc(), RampSpec::constant(0.5)};
  VecX u = sys.zero_state();
  VecX udot = sys.zero_state();

  Fixture() {
    params.beta = 0.59;
    sys.impose_constraints(0.0, u);
  }
};

void BM_Residual(benchmark::State& state) {
  Fixture f;
  VecX r(f.sys.size());
  for (auto _ : state) {
    f.sys.residual(f.u, f.udot, 0.0, r);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_Residual);

void BM_Jacobian(benchmark::State& state) {
  Fixture f;
  SpMat jac;
  for (auto _ : state) {
    f.sys.jacobian(f.u, f.udot, 0.0, 1.0, jac);
    benchmark::DoNotOptimize(jac.valuePtr());
  }
}
BENCHMARK(BM_Jacobian);

}  // namespace

BENCHMARK_MAIN();
