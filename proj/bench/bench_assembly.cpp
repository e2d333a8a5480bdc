// Serial vs OpenMP timings for the element-loop kernels: operator
// construction, linearized assembly, residual, and Jacobian.

#include <benchmark/benchmark.h>

#include "vem/forms.hpp"

namespace {

struct Fixture {
  vem::Mesh mesh;
  vem::DofLayout layout;
  vem::AssemblyContext ctx;
  vem::ProblemData problem;
  Eigen::VectorXd u;

  Fixture(int n, int order)
      : mesh(vem::build_uniform_quad_mesh(n)),
        layout(mesh, order),
        ctx(vem::AssemblyContext::build(mesh, layout)),
        problem(vem::manufactured("p1", 0.01)),
        u(vem::interpolate(problem.exact.u, problem.exact.grad, layout))
  {
  }
};

Fixture& fixture()
{
  static Fixture f(40, 3);
  return f;
}

vem::Exec mode(const benchmark::State& state)
{
  return state.range(0) == 0 ? vem::Exec::Serial : vem::Exec::OpenMP;
}

void BM_BuildOperators(benchmark::State& state)
{
  Fixture& f = fixture();
  for (auto _ : state) {
    auto ops = vem::build_all_element_operators(f.mesh, f.layout, {}, mode(state));
    benchmark::DoNotOptimize(ops);
  }
}

void BM_AssembleLinearized(benchmark::State& state)
{
  Fixture& f = fixture();
  const vem::PhiField phi = vem::frozen_cofactor_phi(f.ctx, f.u);
  for (auto _ : state) {
    auto sys = vem::assemble_linearized(f.ctx, phi, 0.01, {}, nullptr, mode(state));
    benchmark::DoNotOptimize(sys);
  }
}

void BM_AssembleResidual(benchmark::State& state)
{
  Fixture& f = fixture();
  for (auto _ : state) {
    auto r = vem::assemble_residual(f.ctx, f.u, f.problem, {}, nullptr, mode(state));
    benchmark::DoNotOptimize(r);
  }
}

void BM_AssembleJacobian(benchmark::State& state)
{
  Fixture& f = fixture();
  for (auto _ : state) {
    auto J = vem::assemble_jacobian(f.ctx, f.u, f.problem, {}, mode(state));
    benchmark::DoNotOptimize(J);
  }
}

} // namespace

BENCHMARK(BM_BuildOperators)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleLinearized)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleResidual)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleJacobian)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
