#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qfgan/circuit.hpp"
#include "qfgan/statevector.hpp"

namespace qfgan::mps {

using cplx = std::complex<double>;

// Site tensor, row-major over (left bond, spin, right bond):
// a[(l * 2 + s) * dr + r]. Site k carries qubit k (little-endian, matching
// the dense backend).
struct SiteTensor {
  int dl = 1;
  int dr = 1;
  std::vector<cplx> a;

  cplx& at(int l, int s, int r) { return a[std::size_t((l * 2 + s) * dr + r)]; }
  cplx at(int l, int s, int r) const { return a[std::size_t((l * 2 + s) * dr + r)]; }
};

// Mixed-canonical MPS: sites left of `center` are left-canonical, sites
// right of it are right-canonical. Two-site gates truncate to max_bond and
// accumulate the discarded squared singular values in trunc_err; the kept
// spectrum is renormalized so the state stays unit norm. kept_weight_log
// sums ln of the surviving weight fraction per truncation, so the fidelity
// of the never-renormalized trajectory is recoverable as
// fidelity * exp(kept_weight_log).
struct MpsState {
  int n_qubits = 0;
  int max_bond = 1;
  int center = 0;
  double trunc_err = 0.0;
  double kept_weight_log = 0.0;
  std::vector<SiteTensor> site;
};

MpsState mps_zero_state(int n_qubits, int max_bond);

// QR (rightward) / LQ (leftward) sweeps; no truncation, bond can only shrink.
void move_center(MpsState& state, int target);

// Single-qubit gates keep the canonical form; CNOT on adjacent sites is one
// SVD; a long-range CNOT swaps the control rightward until adjacent, applies
// the gate, and swaps back, truncating at every step.
void apply_gate(MpsState& state, const Gate& gate);

MpsState mps_run(const GateProgram& program, int max_bond);
MpsState mps_run(const CircuitSpec& spec, const ParameterSet& params,
                 std::span<const double> noise, int max_bond);

// Same layout as the dense backend: [<X_0>, <Z_0>, <X_1>, <Z_1>, ...],
// measured on a center sweep, clamped into [-1, 1]. Moves the center.
std::vector<double> mps_expectations(MpsState& state);

// <a|b> by transfer-matrix contraction, O(n chi^3).
cplx mps_overlap(const MpsState& a, const MpsState& b);

// |<a|b>|^2 of unit-norm states.
double fidelity_mps(const MpsState& a, const MpsState& b);

double mps_norm(const MpsState& state);

// Full 2^n amplitude vector; only sensible for small n.
std::vector<cplx> mps_to_statevector(const MpsState& state);

double fidelity_dense(const MpsState& a, const sv::Statevector& b);

// Parameter-shift on the truncated simulator: d/dp of dot(upstream,
// expectations) with every shifted evaluation run at the same max_bond.
sv::Gradient mps_gradient(const CircuitSpec& spec, const ParameterSet& params,
                          std::span<const double> noise, std::span<const double> upstream,
                          int max_bond);

}  // namespace qfgan::mps
