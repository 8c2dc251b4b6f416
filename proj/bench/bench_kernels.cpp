// Production (OpenMP) kernels vs the serial reference, same workloads.
// Run with --benchmark_filter=... to pick a family.

#include <benchmark/benchmark.h>

#include "qfgan/circuit.hpp"
#include "qfgan/par.hpp"
#include "qfgan/rng.hpp"
#include "qfgan/statevector.hpp"

using namespace qfgan;

namespace {

GateProgram make_program(int n, int layers, std::uint64_t seed) {
  CircuitSpec spec;
  spec.n_qubits = n;
  spec.n_layers = layers;
  spec.topology = Topology::ring;
  rng::Stream s(seed);
  ParameterSet p = init_parameters(spec, s.child("theta"));
  auto noise = sample_noise(spec, s.child("noise"));
  return build_program(spec, p, noise);
}

void bm_gate_prod(benchmark::State& state) {
  int n = int(state.range(0));
  sv::Statevector psi = sv::zero_state(n);
  Gate g;
  g.kind = GateKind::rx;
  g.q0 = n / 2;
  g.angle = 0.7;
  for (auto _ : state) {
    sv::apply_gate(psi, g);
    benchmark::DoNotOptimize(psi.amp.data());
  }
  state.SetItemsProcessed(state.iterations() * (1ll << n));
}

void bm_gate_ref(benchmark::State& state) {
  int n = int(state.range(0));
  sv::Statevector psi = sv::zero_state(n);
  Gate g;
  g.kind = GateKind::rx;
  g.q0 = n / 2;
  g.angle = 0.7;
  for (auto _ : state) {
    sv::ref::apply_gate(psi, g);
    benchmark::DoNotOptimize(psi.amp.data());
  }
  state.SetItemsProcessed(state.iterations() * (1ll << n));
}

void bm_run_prod(benchmark::State& state) {
  GateProgram prog = make_program(int(state.range(0)), 3, 11);
  for (auto _ : state) {
    sv::Statevector psi = sv::run(prog);
    benchmark::DoNotOptimize(psi.amp.data());
  }
}

void bm_run_ref(benchmark::State& state) {
  GateProgram prog = make_program(int(state.range(0)), 3, 11);
  for (auto _ : state) {
    sv::Statevector psi = sv::ref::run(prog);
    benchmark::DoNotOptimize(psi.amp.data());
  }
}

void bm_expectations_prod(benchmark::State& state) {
  sv::Statevector psi = sv::run(make_program(int(state.range(0)), 3, 11));
  for (auto _ : state) {
    auto e = sv::expectations(psi);
    benchmark::DoNotOptimize(e.data());
  }
}

void bm_expectations_ref(benchmark::State& state) {
  sv::Statevector psi = sv::run(make_program(int(state.range(0)), 3, 11));
  for (auto _ : state) {
    auto e = sv::ref::expectations(psi);
    benchmark::DoNotOptimize(e.data());
  }
}

void bm_gradient_adjoint(benchmark::State& state) {
  int n = int(state.range(0));
  CircuitSpec spec;
  spec.n_qubits = n;
  spec.n_layers = 3;
  spec.topology = Topology::ring;
  rng::Stream s(5);
  ParameterSet p = init_parameters(spec, s.child("theta"));
  auto noise = sample_noise(spec, s.child("noise"));
  std::vector<double> upstream(std::size_t(spec.output_dim()), 1.0);
  for (auto _ : state) {
    auto g = sv::gradient(spec, p, noise, upstream, sv::GradMethod::adjoint);
    benchmark::DoNotOptimize(g.theta.data());
  }
}

void bm_gradient_shift(benchmark::State& state) {
  int n = int(state.range(0));
  CircuitSpec spec;
  spec.n_qubits = n;
  spec.n_layers = 3;
  spec.topology = Topology::ring;
  rng::Stream s(5);
  ParameterSet p = init_parameters(spec, s.child("theta"));
  auto noise = sample_noise(spec, s.child("noise"));
  std::vector<double> upstream(std::size_t(spec.output_dim()), 1.0);
  for (auto _ : state) {
    auto g = sv::gradient(spec, p, noise, upstream, sv::GradMethod::parameter_shift);
    benchmark::DoNotOptimize(g.theta.data());
  }
}

BENCHMARK(bm_gate_prod)->Arg(10)->Arg(16)->Arg(20);
BENCHMARK(bm_gate_ref)->Arg(10)->Arg(16)->Arg(20);
BENCHMARK(bm_run_prod)->Arg(6)->Arg(10)->Arg(16);
BENCHMARK(bm_run_ref)->Arg(6)->Arg(10)->Arg(16);
BENCHMARK(bm_expectations_prod)->Arg(10)->Arg(16);
BENCHMARK(bm_expectations_ref)->Arg(10)->Arg(16);
BENCHMARK(bm_gradient_adjoint)->Arg(6)->Arg(10);
BENCHMARK(bm_gradient_shift)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
