#include "qfgan/statevector.hpp"

#include <algorithm>
#include <cmath>

#include "qfgan/errors.hpp"
#include "qfgan/par.hpp"

namespace qfgan::sv {

namespace {

constexpr double kHalfPi = 1.5707963267948966192313216916398;

using std::ptrdiff_t;

inline ptrdiff_t insert_bit(ptrdiff_t x, int pos, int bit) {
  ptrdiff_t low = x & ((ptrdiff_t(1) << pos) - 1);
  return ((x >> pos) << (pos + 1)) | (ptrdiff_t(bit) << pos) | low;
}

// i0 = p with a 0 bit spliced in at position q; i1 sets that bit.
inline ptrdiff_t pair_base(ptrdiff_t p, ptrdiff_t stride) {
  return ((p & ~(stride - 1)) << 1) | (p & (stride - 1));
}

void check_qubit(const Statevector& s, int q) {
  if (q < 0 || q >= s.n_qubits) raise(Errc::dimension_mismatch, "qubit index out of range");
}

}  // namespace

Statevector zero_state(int n_qubits) {
  if (n_qubits < 1) raise(Errc::config_error, "need at least one qubit");
  if (n_qubits > kMaxQubits) raise(Errc::too_many_qubits, "statevector capped at 24 qubits");
  Statevector s;
  s.n_qubits = n_qubits;
  s.amp.assign(std::size_t(1) << n_qubits, cplx(0.0, 0.0));
  s.amp[0] = cplx(1.0, 0.0);
  return s;
}

void apply_gate(Statevector& state, const Gate& gate) {
  check_qubit(state, gate.q0);
  cplx* a = state.amp.data();
  ptrdiff_t dim = ptrdiff_t(state.amp.size());

  if (gate.kind == GateKind::cnot) {
    check_qubit(state, gate.q1);
    if (gate.q0 == gate.q1) raise(Errc::dimension_mismatch, "cnot needs distinct qubits");
    int c = gate.q0, t = gate.q1;
    int lo = c < t ? c : t, hi = c < t ? t : c;
    ptrdiff_t tmask = ptrdiff_t(1) << t;
    par::for_index(
        dim / 4,
        [&](ptrdiff_t p) {
          ptrdiff_t i = insert_bit(insert_bit(p, lo, lo == c ? 1 : 0), hi, hi == c ? 1 : 0);
          std::swap(a[i], a[i | tmask]);
        },
        4096);
    return;
  }

  double ch = std::cos(0.5 * gate.angle);
  double sh = std::sin(0.5 * gate.angle);
  ptrdiff_t stride = ptrdiff_t(1) << gate.q0;
  ptrdiff_t half = dim / 2;

  switch (gate.kind) {
    case GateKind::rx: {
      cplx off(0.0, -sh);
      par::for_index(
          half,
          [&](ptrdiff_t p) {
            ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
            cplx v0 = a[i0], v1 = a[i1];
            a[i0] = ch * v0 + off * v1;
            a[i1] = off * v0 + ch * v1;
          },
          4096);
      break;
    }
    case GateKind::ry: {
      par::for_index(
          half,
          [&](ptrdiff_t p) {
            ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
            cplx v0 = a[i0], v1 = a[i1];
            a[i0] = ch * v0 - sh * v1;
            a[i1] = sh * v0 + ch * v1;
          },
          4096);
      break;
    }
    case GateKind::rz: {
      cplx e0(ch, -sh), e1(ch, sh);
      par::for_index(
          half,
          [&](ptrdiff_t p) {
            ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
            a[i0] *= e0;
            a[i1] *= e1;
          },
          4096);
      break;
    }
    case GateKind::cnot:
      break;  // handled above
  }
}

Statevector run(const GateProgram& program) {
  Statevector s = zero_state(program.n_qubits);
  for (const Gate& g : program.gates) apply_gate(s, g);
  return s;
}

Statevector run(const CircuitSpec& spec, const ParameterSet& params,
                std::span<const double> noise) {
  return run(build_program(spec, params, noise));
}

std::vector<double> expectations(const Statevector& state) {
  const cplx* a = state.amp.data();
  ptrdiff_t half = ptrdiff_t(state.amp.size()) / 2;
  std::vector<double> out(std::size_t(2) * state.n_qubits);
  for (int q = 0; q < state.n_qubits; ++q) {
    ptrdiff_t stride = ptrdiff_t(1) << q;
    double x = 2.0 * par::block_sum(half, [&](ptrdiff_t p) {
                 ptrdiff_t i0 = pair_base(p, stride);
                 cplx prod = std::conj(a[i0]) * a[i0 | stride];
                 return prod.real();
               });
    double z = par::block_sum(half, [&](ptrdiff_t p) {
      ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
      return std::norm(a[i0]) - std::norm(a[i1]);
    });
    out[2 * std::size_t(q)] = std::clamp(x, -1.0, 1.0);
    out[2 * std::size_t(q) + 1] = std::clamp(z, -1.0, 1.0);
  }
  return out;
}

std::vector<double> expectations(const CircuitSpec& spec, const ParameterSet& params,
                                 std::span<const double> noise) {
  return expectations(run(spec, params, noise));
}

namespace {

void check_upstream(const CircuitSpec& spec, std::span<const double> upstream) {
  if (upstream.size() != std::size_t(spec.output_dim()))
    raise(Errc::dimension_mismatch, "upstream size != 2 * n_qubits");
}

Gate inverted(const Gate& g) {
  Gate inv = g;
  if (g.kind != GateKind::cnot) inv.angle = -g.angle;
  return inv;
}

// phi += ux * X_q psi + uz * Z_q psi, accumulated pairwise.
void accumulate_weighted_pauli(Statevector& phi, const Statevector& psi, int q, double ux,
                               double uz) {
  cplx* f = phi.amp.data();
  const cplx* s = psi.amp.data();
  ptrdiff_t stride = ptrdiff_t(1) << q;
  par::for_index(
      ptrdiff_t(psi.amp.size()) / 2,
      [&](ptrdiff_t p) {
        ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
        f[i0] += ux * s[i1] + uz * s[i0];
        f[i1] += ux * s[i0] - uz * s[i1];
      },
      4096);
}

// Im <phi | P_q | psi> for the rotation generator P of `kind`.
double generator_overlap(const Statevector& phi, const Statevector& psi, int q, GateKind kind) {
  const cplx* f = phi.amp.data();
  const cplx* s = psi.amp.data();
  ptrdiff_t stride = ptrdiff_t(1) << q;
  ptrdiff_t half = ptrdiff_t(psi.amp.size()) / 2;
  switch (kind) {
    case GateKind::rx:
      return par::block_sum(half, [&](ptrdiff_t p) {
        ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
        return (std::conj(f[i0]) * s[i1] + std::conj(f[i1]) * s[i0]).imag();
      });
    case GateKind::ry:
      return par::block_sum(half, [&](ptrdiff_t p) {
        ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
        cplx v = cplx(0.0, -1.0) * std::conj(f[i0]) * s[i1] +
                 cplx(0.0, 1.0) * std::conj(f[i1]) * s[i0];
        return v.imag();
      });
    case GateKind::rz:
      return par::block_sum(half, [&](ptrdiff_t p) {
        ptrdiff_t i0 = pair_base(p, stride), i1 = i0 | stride;
        return (std::conj(f[i0]) * s[i0] - std::conj(f[i1]) * s[i1]).imag();
      });
    case GateKind::cnot:
      break;
  }
  raise(Errc::dimension_mismatch, "no generator for cnot");
}

Gradient gradient_adjoint(const CircuitSpec& spec, const ParameterSet& params,
                          std::span<const double> noise, std::span<const double> upstream) {
  GateProgram prog = build_program(spec, params, noise);
  Statevector psi = run(prog);

  // phi = (sum_q u_x X_q + u_z Z_q) |psi>, then both states are walked
  // backwards; before undoing gate k, Im<phi|G|psi> is d(loss)/d(angle_k).
  Statevector phi;
  phi.n_qubits = psi.n_qubits;
  phi.amp.assign(psi.amp.size(), cplx(0.0, 0.0));
  for (int q = 0; q < spec.n_qubits; ++q)
    accumulate_weighted_pauli(phi, psi, q, upstream[2 * std::size_t(q)],
                              upstream[2 * std::size_t(q) + 1]);

  Gradient grad;
  grad.theta.assign(params.theta.size(), 0.0);
  grad.lambda.assign(params.lambda.size(), 0.0);

  for (std::size_t k = prog.gates.size(); k-- > 0;) {
    const Gate& g = prog.gates[k];
    if (g.param != ParamKind::none) {
      double d = generator_overlap(phi, psi, g.q0, g.kind) * g.scale;
      if (g.param == ParamKind::theta)
        grad.theta[std::size_t(g.param_index)] += d;
      else
        grad.lambda[std::size_t(g.param_index)] += d;
    }
    Gate inv = inverted(g);
    apply_gate(psi, inv);
    apply_gate(phi, inv);
  }
  return grad;
}

Gradient gradient_shift(const CircuitSpec& spec, const ParameterSet& params,
                        std::span<const double> noise, std::span<const double> upstream) {
  GateProgram prog = build_program(spec, params, noise);
  std::vector<std::size_t> bound;
  for (std::size_t k = 0; k < prog.gates.size(); ++k)
    if (prog.gates[k].param != ParamKind::none) bound.push_back(k);

  auto weighted = [&](const GateProgram& p) {
    std::vector<double> e = expectations(run(p));
    double s = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) s += e[j] * upstream[j];
    return s;
  };

  std::vector<double> derivs(bound.size());
  par::for_index(
      ptrdiff_t(bound.size()),
      [&](ptrdiff_t bi) {
        GateProgram local = prog;
        Gate& g = local.gates[bound[std::size_t(bi)]];
        g.angle += kHalfPi;
        double ep = weighted(local);
        g.angle -= 2.0 * kHalfPi;
        double em = weighted(local);
        derivs[std::size_t(bi)] =
            0.5 * (ep - em) * prog.gates[bound[std::size_t(bi)]].scale;
      },
      1);

  Gradient grad;
  grad.theta.assign(params.theta.size(), 0.0);
  grad.lambda.assign(params.lambda.size(), 0.0);
  for (std::size_t bi = 0; bi < bound.size(); ++bi) {
    const Gate& g = prog.gates[bound[bi]];
    if (g.param == ParamKind::theta)
      grad.theta[std::size_t(g.param_index)] += derivs[bi];
    else
      grad.lambda[std::size_t(g.param_index)] += derivs[bi];
  }
  return grad;
}

}  // namespace

Gradient gradient(const CircuitSpec& spec, const ParameterSet& params,
                  std::span<const double> noise, std::span<const double> upstream,
                  GradMethod method) {
  check_upstream(spec, upstream);
  return method == GradMethod::adjoint ? gradient_adjoint(spec, params, noise, upstream)
                                       : gradient_shift(spec, params, noise, upstream);
}

}  // namespace qfgan::sv
