// Serial reference kernels: textbook base/offset loops, no parallel helpers.
// Kept alongside the production kernels so tests and benchmarks can compare.

#include <algorithm>
#include <cmath>

#include "qfgan/errors.hpp"
#include "qfgan/statevector.hpp"

namespace qfgan::sv::ref {

void apply_gate(Statevector& state, const Gate& gate) {
  if (gate.q0 < 0 || gate.q0 >= state.n_qubits)
    raise(Errc::dimension_mismatch, "qubit index out of range");
  cplx* a = state.amp.data();
  std::size_t dim = state.amp.size();

  if (gate.kind == GateKind::cnot) {
    if (gate.q1 < 0 || gate.q1 >= state.n_qubits || gate.q1 == gate.q0)
      raise(Errc::dimension_mismatch, "bad cnot qubits");
    std::size_t cmask = std::size_t(1) << gate.q0;
    std::size_t tmask = std::size_t(1) << gate.q1;
    for (std::size_t i = 0; i < dim; ++i)
      if ((i & cmask) && !(i & tmask)) std::swap(a[i], a[i | tmask]);
    return;
  }

  double ch = std::cos(0.5 * gate.angle);
  double sh = std::sin(0.5 * gate.angle);
  cplx u00, u01, u10, u11;
  switch (gate.kind) {
    case GateKind::rx:
      u00 = u11 = ch;
      u01 = u10 = cplx(0.0, -sh);
      break;
    case GateKind::ry:
      u00 = u11 = ch;
      u01 = -sh;
      u10 = sh;
      break;
    case GateKind::rz:
      u00 = cplx(ch, -sh);
      u11 = cplx(ch, sh);
      u01 = u10 = 0.0;
      break;
    case GateKind::cnot:
      return;
  }

  std::size_t stride = std::size_t(1) << gate.q0;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      std::size_t i0 = base + off;
      std::size_t i1 = i0 + stride;
      cplx v0 = a[i0], v1 = a[i1];
      a[i0] = u00 * v0 + u01 * v1;
      a[i1] = u10 * v0 + u11 * v1;
    }
  }
}

Statevector run(const GateProgram& program) {
  Statevector s = zero_state(program.n_qubits);
  for (const Gate& g : program.gates) ref::apply_gate(s, g);
  return s;
}

std::vector<double> expectations(const Statevector& state) {
  const cplx* a = state.amp.data();
  std::size_t dim = state.amp.size();
  std::vector<double> out(std::size_t(2) * state.n_qubits);
  for (int q = 0; q < state.n_qubits; ++q) {
    std::size_t stride = std::size_t(1) << q;
    double x = 0.0, z = 0.0;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t off = 0; off < stride; ++off) {
        std::size_t i0 = base + off;
        std::size_t i1 = i0 + stride;
        x += 2.0 * (std::conj(a[i0]) * a[i1]).real();
        z += std::norm(a[i0]) - std::norm(a[i1]);
      }
    }
    out[2 * std::size_t(q)] = std::clamp(x, -1.0, 1.0);
    out[2 * std::size_t(q) + 1] = std::clamp(z, -1.0, 1.0);
  }
  return out;
}

}  // namespace qfgan::sv::ref
