// Truncated matrix-product-state simulator. Eigen supplies the SVD/QR
// factorizations; everything here is deterministic and single-threaded so
// results never depend on the thread count.
#define EIGEN_DONT_PARALLELIZE

#include "qfgan/mps.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>

#include "qfgan/errors.hpp"
#include "qfgan/par.hpp"

namespace qfgan::mps {

namespace {

constexpr double kHalfPi = 1.5707963267948966192313216916398;

using EMat = Eigen::MatrixXcd;
using EVec = Eigen::VectorXd;

// dl x dr slice of a site tensor at fixed spin.
EMat spin_slice(const SiteTensor& t, int s) {
  EMat m(t.dl, t.dr);
  for (int l = 0; l < t.dl; ++l)
    for (int r = 0; r < t.dr; ++r) m(l, r) = t.at(l, s, r);
  return m;
}

void check_adjacent_site(const MpsState& state, int k) {
  if (k < 0 || k + 1 >= state.n_qubits)
    raise(Errc::dimension_mismatch, "two-site gate needs adjacent sites in range");
}

struct ThinSvd {
  EMat u;
  EVec s;
  EMat v;  // M = u * diag(s) * v.adjoint()
};

ThinSvd svd_thin(const EMat& m) {
  ThinSvd out;
  if (std::min(m.rows(), m.cols()) >= 32) {
    Eigen::BDCSVD<EMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
  } else {
    Eigen::JacobiSVD<EMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
  }
  return out;
}

// 4x4 two-site unitaries in the basis i = s_k + 2 * s_{k+1}.
using Gate4 = std::array<std::array<cplx, 4>, 4>;

Gate4 permutation_gate(const std::array<int, 4>& perm) {
  Gate4 g{};
  for (int i = 0; i < 4; ++i) g[std::size_t(perm[std::size_t(i)])][std::size_t(i)] = 1.0;
  return g;
}

Gate4 cnot_gate(bool control_is_low) {
  // control low: flip s_{k+1} when s_k = 1 (1 <-> 3);
  // control high: flip s_k when s_{k+1} = 1 (2 <-> 3).
  return control_is_low ? permutation_gate({0, 3, 2, 1}) : permutation_gate({0, 1, 3, 2});
}

Gate4 swap_gate() { return permutation_gate({0, 2, 1, 3}); }

}  // namespace

MpsState mps_zero_state(int n_qubits, int max_bond) {
  if (n_qubits < 1) raise(Errc::config_error, "need at least one site");
  if (max_bond < 1) raise(Errc::invalid_bond, "max_bond must be >= 1");
  MpsState st;
  st.n_qubits = n_qubits;
  st.max_bond = max_bond;
  st.center = 0;
  st.site.resize(std::size_t(n_qubits));
  for (SiteTensor& t : st.site) {
    t.dl = t.dr = 1;
    t.a = {cplx(1.0, 0.0), cplx(0.0, 0.0)};
  }
  return st;
}

namespace {

void move_center_right(MpsState& st) {
  int c = st.center;
  SiteTensor& t = st.site[std::size_t(c)];
  EMat m(t.dl * 2, t.dr);
  for (int l = 0; l < t.dl; ++l)
    for (int s = 0; s < 2; ++s)
      for (int r = 0; r < t.dr; ++r) m(l * 2 + s, r) = t.at(l, s, r);
  int k = int(std::min(m.rows(), m.cols()));
  Eigen::HouseholderQR<EMat> qr(m);
  EMat q = qr.householderQ() * EMat::Identity(m.rows(), k);
  EMat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  SiteTensor nt;
  nt.dl = t.dl;
  nt.dr = k;
  nt.a.assign(std::size_t(t.dl * 2 * k), cplx(0, 0));
  for (int l = 0; l < t.dl; ++l)
    for (int s = 0; s < 2; ++s)
      for (int j = 0; j < k; ++j) nt.at(l, s, j) = q(l * 2 + s, j);
  st.site[std::size_t(c)] = std::move(nt);

  SiteTensor& b = st.site[std::size_t(c + 1)];
  SiteTensor nb;
  nb.dl = k;
  nb.dr = b.dr;
  nb.a.assign(std::size_t(k * 2 * b.dr), cplx(0, 0));
  for (int mrow = 0; mrow < k; ++mrow)
    for (int s = 0; s < 2; ++s)
      for (int rr = 0; rr < b.dr; ++rr) {
        cplx acc = 0.0;
        for (int j = 0; j < b.dl; ++j) acc += r(mrow, j) * b.at(j, s, rr);
        nb.at(mrow, s, rr) = acc;
      }
  st.site[std::size_t(c + 1)] = std::move(nb);
  st.center = c + 1;
}

void move_center_left(MpsState& st) {
  int c = st.center;
  SiteTensor& t = st.site[std::size_t(c)];
  EMat m(t.dl, 2 * t.dr);
  for (int l = 0; l < t.dl; ++l)
    for (int s = 0; s < 2; ++s)
      for (int r = 0; r < t.dr; ++r) m(l, s * t.dr + r) = t.at(l, s, r);

  // LQ through the QR of the adjoint: M = R^H Q^H.
  EMat madj = m.adjoint();
  int k = int(std::min(madj.rows(), madj.cols()));
  Eigen::HouseholderQR<EMat> qr(madj);
  EMat q = qr.householderQ() * EMat::Identity(madj.rows(), k);
  EMat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  EMat lfac = r.adjoint();   // dl x k
  EMat qrc = q.adjoint();    // k x 2 dr, right-canonical rows

  SiteTensor nt;
  nt.dl = k;
  nt.dr = t.dr;
  nt.a.assign(std::size_t(k * 2 * t.dr), cplx(0, 0));
  for (int j = 0; j < k; ++j)
    for (int s = 0; s < 2; ++s)
      for (int r2 = 0; r2 < t.dr; ++r2) nt.at(j, s, r2) = qrc(j, s * t.dr + r2);
  st.site[std::size_t(c)] = std::move(nt);

  SiteTensor& b = st.site[std::size_t(c - 1)];
  SiteTensor nb;
  nb.dl = b.dl;
  nb.dr = k;
  nb.a.assign(std::size_t(b.dl * 2 * k), cplx(0, 0));
  for (int l = 0; l < b.dl; ++l)
    for (int s = 0; s < 2; ++s)
      for (int j = 0; j < k; ++j) {
        cplx acc = 0.0;
        for (int r2 = 0; r2 < b.dr; ++r2) acc += b.at(l, s, r2) * lfac(r2, j);
        nb.at(l, s, j) = acc;
      }
  st.site[std::size_t(c - 1)] = std::move(nb);
  st.center = c - 1;
}

void apply_single_site(MpsState& st, int q, const std::array<std::array<cplx, 2>, 2>& u) {
  SiteTensor& t = st.site[std::size_t(q)];
  for (int l = 0; l < t.dl; ++l)
    for (int r = 0; r < t.dr; ++r) {
      cplx v0 = t.at(l, 0, r), v1 = t.at(l, 1, r);
      t.at(l, 0, r) = u[0][0] * v0 + u[0][1] * v1;
      t.at(l, 1, r) = u[1][0] * v0 + u[1][1] * v1;
    }
}

// Contract sites k,k+1, apply the 4x4, split by truncated SVD. The center
// must sit on one of the two sites; it ends on k+1 (absorb_left=false) or k.
void apply_two_site(MpsState& st, int k, const Gate4& u, bool absorb_left) {
  check_adjacent_site(st, k);
  if (st.center < k || st.center > k + 1) move_center(st, k);

  const SiteTensor& a = st.site[std::size_t(k)];
  const SiteTensor& b = st.site[std::size_t(k + 1)];
  int dl = a.dl, dr = b.dr;

  // theta[s0][s1] = A_k[:,s0,:] * B_{k+1}[:,s1,:], then rotate spins by u.
  EMat theta[2][2], rot[2][2];
  for (int s0 = 0; s0 < 2; ++s0)
    for (int s1 = 0; s1 < 2; ++s1) theta[s0][s1] = spin_slice(a, s0) * spin_slice(b, s1);
  for (int t0 = 0; t0 < 2; ++t0)
    for (int t1 = 0; t1 < 2; ++t1) {
      rot[t0][t1] = EMat::Zero(dl, dr);
      for (int s0 = 0; s0 < 2; ++s0)
        for (int s1 = 0; s1 < 2; ++s1) {
          cplx coef = u[std::size_t(t0 + 2 * t1)][std::size_t(s0 + 2 * s1)];
          if (coef != cplx(0.0, 0.0)) rot[t0][t1] += coef * theta[s0][s1];
        }
    }

  EMat m(dl * 2, 2 * dr);
  for (int s0 = 0; s0 < 2; ++s0)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int l = 0; l < dl; ++l)
        for (int r = 0; r < dr; ++r) m(l * 2 + s0, s1 * dr + r) = rot[s0][s1](l, r);

  ThinSvd svd = svd_thin(m);
  int rank = int(svd.s.size());
  int keep = std::min(rank, st.max_bond);
  // Drop numerically dead directions as well; their weight still counts as
  // truncation error.
  double smax = rank > 0 ? svd.s(0) : 0.0;
  while (keep > 1 && svd.s(keep - 1) <= smax * 1e-15) --keep;

  double kept_sq = 0.0, lost_sq = 0.0;
  for (int i = 0; i < keep; ++i) kept_sq += svd.s(i) * svd.s(i);
  for (int i = keep; i < rank; ++i) lost_sq += svd.s(i) * svd.s(i);
  st.trunc_err += lost_sq;
  if (lost_sq > 0.0 && kept_sq > 0.0)
    st.kept_weight_log += std::log1p(-lost_sq / (kept_sq + lost_sq));
  double renorm = kept_sq > 0.0 ? 1.0 / std::sqrt(kept_sq) : 1.0;

  SiteTensor na, nb;
  na.dl = dl;
  na.dr = keep;
  na.a.assign(std::size_t(dl * 2 * keep), cplx(0, 0));
  nb.dl = keep;
  nb.dr = dr;
  nb.a.assign(std::size_t(keep * 2 * dr), cplx(0, 0));

  if (absorb_left) {
    // A <- U S (renormalized), B <- V^H rows.
    for (int l = 0; l < dl; ++l)
      for (int s = 0; s < 2; ++s)
        for (int j = 0; j < keep; ++j)
          na.at(l, s, j) = svd.u(l * 2 + s, j) * svd.s(j) * renorm;
    for (int j = 0; j < keep; ++j)
      for (int s = 0; s < 2; ++s)
        for (int r = 0; r < dr; ++r) nb.at(j, s, r) = std::conj(svd.v(s * dr + r, j));
    st.center = k;
  } else {
    for (int l = 0; l < dl; ++l)
      for (int s = 0; s < 2; ++s)
        for (int j = 0; j < keep; ++j) na.at(l, s, j) = svd.u(l * 2 + s, j);
    for (int j = 0; j < keep; ++j)
      for (int s = 0; s < 2; ++s)
        for (int r = 0; r < dr; ++r)
          nb.at(j, s, r) = svd.s(j) * renorm * std::conj(svd.v(s * dr + r, j));
    st.center = k + 1;
  }
  st.site[std::size_t(k)] = std::move(na);
  st.site[std::size_t(k + 1)] = std::move(nb);
}

std::array<std::array<cplx, 2>, 2> rotation_2x2(GateKind kind, double angle) {
  double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
  switch (kind) {
    case GateKind::rx:
      return {{{cplx(c, 0), cplx(0, -s)}, {cplx(0, -s), cplx(c, 0)}}};
    case GateKind::ry:
      return {{{cplx(c, 0), cplx(-s, 0)}, {cplx(s, 0), cplx(c, 0)}}};
    case GateKind::rz:
      return {{{cplx(c, -s), cplx(0, 0)}, {cplx(0, 0), cplx(c, s)}}};
    default:
      raise(Errc::dimension_mismatch, "not a single-qubit rotation");
  }
}

}  // namespace

void move_center(MpsState& state, int target) {
  if (target < 0 || target >= state.n_qubits)
    raise(Errc::dimension_mismatch, "center target out of range");
  while (state.center < target) move_center_right(state);
  while (state.center > target) move_center_left(state);
}

void apply_gate(MpsState& state, const Gate& gate) {
  if (gate.q0 < 0 || gate.q0 >= state.n_qubits)
    raise(Errc::dimension_mismatch, "qubit index out of range");

  if (gate.kind != GateKind::cnot) {
    apply_single_site(state, gate.q0, rotation_2x2(gate.kind, gate.angle));
    return;
  }

  int c = gate.q0, t = gate.q1;
  if (t < 0 || t >= state.n_qubits || t == c)
    raise(Errc::dimension_mismatch, "bad cnot qubits");

  if (std::abs(c - t) == 1) {
    int k = std::min(c, t);
    apply_two_site(state, k, cnot_gate(/*control_is_low=*/c == k), /*absorb_left=*/false);
    return;
  }

  // Long-range: swap the control toward the target until adjacent, apply,
  // swap back. Forward swaps absorb rightward, the return sweep leftward, so
  // the center rides along without extra moves.
  int step = t > c ? 1 : -1;
  int pos = c;
  Gate4 sw = swap_gate();
  while (std::abs(pos - t) > 1) {
    int k = step > 0 ? pos : pos - 1;
    apply_two_site(state, k, sw, /*absorb_left=*/step < 0);
    pos += step;
  }
  int k = std::min(pos, t);
  apply_two_site(state, k, cnot_gate(/*control_is_low=*/pos == k), /*absorb_left=*/step > 0);
  while (pos != c) {
    int back = -step;
    int kk = back > 0 ? pos : pos - 1;
    apply_two_site(state, kk, sw, /*absorb_left=*/back < 0);
    pos += back;
  }
}

MpsState mps_run(const GateProgram& program, int max_bond) {
  MpsState st = mps_zero_state(program.n_qubits, max_bond);
  for (const Gate& g : program.gates) apply_gate(st, g);
  return st;
}

MpsState mps_run(const CircuitSpec& spec, const ParameterSet& params,
                 std::span<const double> noise, int max_bond) {
  return mps_run(build_program(spec, params, noise), max_bond);
}

std::vector<double> mps_expectations(MpsState& state) {
  std::vector<double> out(std::size_t(2 * state.n_qubits));
  move_center(state, 0);
  for (int q = 0; q < state.n_qubits; ++q) {
    if (q > 0) move_center(state, q);
    const SiteTensor& t = state.site[std::size_t(q)];
    // Mixed-canonical form: environments are identity, so local sandwiches
    // over the center tensor are the full expectations.
    cplx x = 0.0, z = 0.0;
    for (int l = 0; l < t.dl; ++l)
      for (int r = 0; r < t.dr; ++r) {
        cplx v0 = t.at(l, 0, r), v1 = t.at(l, 1, r);
        x += std::conj(v0) * v1 + std::conj(v1) * v0;
        z += std::conj(v0) * v0 - std::conj(v1) * v1;
      }
    out[2 * std::size_t(q)] = std::clamp(x.real(), -1.0, 1.0);
    out[2 * std::size_t(q) + 1] = std::clamp(z.real(), -1.0, 1.0);
  }
  return out;
}

cplx mps_overlap(const MpsState& a, const MpsState& b) {
  if (a.n_qubits != b.n_qubits) raise(Errc::dimension_mismatch, "qubit counts differ");
  EMat env = EMat::Ones(1, 1);
  for (int k = 0; k < a.n_qubits; ++k) {
    const SiteTensor& ta = a.site[std::size_t(k)];
    const SiteTensor& tb = b.site[std::size_t(k)];
    EMat next = EMat::Zero(ta.dr, tb.dr);
    for (int s = 0; s < 2; ++s)
      next += spin_slice(ta, s).adjoint() * env * spin_slice(tb, s);
    env = std::move(next);
  }
  return env(0, 0);
}

double fidelity_mps(const MpsState& a, const MpsState& b) {
  return std::norm(mps_overlap(a, b));
}

double mps_norm(const MpsState& state) {
  return std::sqrt(std::abs(mps_overlap(state, state).real()));
}

std::vector<cplx> mps_to_statevector(const MpsState& state) {
  if (state.n_qubits > sv::kMaxQubits)
    raise(Errc::too_many_qubits, "dense conversion capped at 24 qubits");
  // t[r * block + i]: amplitude of bit pattern i over sites 0..k with open
  // right bond r.
  std::vector<cplx> t{cplx(1.0, 0.0)};
  std::size_t block = 1;
  for (int k = 0; k < state.n_qubits; ++k) {
    const SiteTensor& s = state.site[std::size_t(k)];
    std::size_t nblock = block * 2;
    std::vector<cplx> nt(std::size_t(s.dr) * nblock, cplx(0, 0));
    for (int r = 0; r < s.dr; ++r)
      for (int sp = 0; sp < 2; ++sp)
        for (int l = 0; l < s.dl; ++l) {
          cplx w = s.at(l, sp, r);
          if (w == cplx(0.0, 0.0)) continue;
          const cplx* src = t.data() + std::size_t(l) * block;
          cplx* dst = nt.data() + std::size_t(r) * nblock + std::size_t(sp) * block;
          for (std::size_t i = 0; i < block; ++i) dst[i] += w * src[i];
        }
    t = std::move(nt);
    block = nblock;
  }
  return t;
}

double fidelity_dense(const MpsState& a, const sv::Statevector& b) {
  std::vector<cplx> av = mps_to_statevector(a);
  if (av.size() != b.amp.size()) raise(Errc::dimension_mismatch, "state sizes differ");
  cplx ov = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) ov += std::conj(av[i]) * b.amp[i];
  return std::norm(ov);
}

sv::Gradient mps_gradient(const CircuitSpec& spec, const ParameterSet& params,
                          std::span<const double> noise, std::span<const double> upstream,
                          int max_bond) {
  if (upstream.size() != std::size_t(spec.output_dim()))
    raise(Errc::dimension_mismatch, "upstream size != 2 * n_qubits");
  GateProgram prog = build_program(spec, params, noise);
  std::vector<std::size_t> bound;
  for (std::size_t k = 0; k < prog.gates.size(); ++k)
    if (prog.gates[k].param != ParamKind::none) bound.push_back(k);

  auto weighted = [&](const GateProgram& p) {
    MpsState st = mps_run(p, max_bond);
    std::vector<double> e = mps_expectations(st);
    double s = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) s += e[j] * upstream[j];
    return s;
  };

  std::vector<double> derivs(bound.size());
  par::for_index(
      std::ptrdiff_t(bound.size()),
      [&](std::ptrdiff_t bi) {
        GateProgram local = prog;
        Gate& g = local.gates[bound[std::size_t(bi)]];
        g.angle += kHalfPi;
        double ep = weighted(local);
        g.angle -= 2.0 * kHalfPi;
        double em = weighted(local);
        derivs[std::size_t(bi)] = 0.5 * (ep - em) * prog.gates[bound[std::size_t(bi)]].scale;
      },
      1);

  sv::Gradient grad;
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

}  // namespace qfgan::mps
