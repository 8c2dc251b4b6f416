#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qfgan/circuit.hpp"

namespace qfgan::sv {

using cplx = std::complex<double>;

// 2^24 amplitudes (256 MiB) is the sanity cap for exact simulation.
inline constexpr int kMaxQubits = 24;

// Little-endian: qubit q is bit q of the amplitude index.
struct Statevector {
  int n_qubits = 0;
  std::vector<cplx> amp;
};

Statevector zero_state(int n_qubits);

// Rotation conventions: R_P(a) = exp(-i a P / 2). CNOT flips q1 when q0 is 1.
void apply_gate(Statevector& state, const Gate& gate);

Statevector run(const GateProgram& program);
Statevector run(const CircuitSpec& spec, const ParameterSet& params,
                std::span<const double> noise);

// [<X_0>, <Z_0>, <X_1>, <Z_1>, ...], clamped into [-1, 1] so downstream
// range checks never trip on roundoff.
std::vector<double> expectations(const Statevector& state);
std::vector<double> expectations(const CircuitSpec& spec, const ParameterSet& params,
                                 std::span<const double> noise);

struct Gradient {
  std::vector<double> theta;
  std::vector<double> lambda;
};

// Both methods compute d/dp of dot(upstream, expectations) exactly:
// parameter-shift evaluates (E(a + pi/2) - E(a - pi/2)) / 2 per bound gate;
// adjoint makes one reverse sweep and costs O(gates) instead of
// O(params * gates). They agree to roundoff and a test holds them to 1e-10.
enum class GradMethod { adjoint, parameter_shift };

Gradient gradient(const CircuitSpec& spec, const ParameterSet& params,
                  std::span<const double> noise, std::span<const double> upstream,
                  GradMethod method = GradMethod::adjoint);

// Plain serial kernels kept as the reference implementation for tests and
// benchmarks. Same conventions, no parallel helpers.
namespace ref {
void apply_gate(Statevector& state, const Gate& gate);
Statevector run(const GateProgram& program);
std::vector<double> expectations(const Statevector& state);
}  // namespace ref

}  // namespace qfgan::sv
