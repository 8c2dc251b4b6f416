#include "qfgan/circuit.hpp"

#include <cstdio>

#include "qfgan/errors.hpp"

namespace qfgan {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void CircuitSpec::validate() const {
  if (n_qubits < 1) raise(Errc::config_error, "n_qubits must be >= 1");
  if (n_qubits > 24) raise(Errc::too_many_qubits, "n_qubits capped at 24");
  if (n_layers < 1) raise(Errc::config_error, "n_layers must be >= 1");
  if (topology == Topology::ring && n_qubits < 2)
    raise(Errc::config_error, "ring topology needs >= 2 qubits");
}

int CircuitSpec::gate_count() const {
  int entanglers = n_qubits - 1 + (topology == Topology::ring ? 1 : 0);
  return n_layers * (3 * n_qubits + entanglers + n_qubits) + 3 * n_qubits;
}

std::pair<int, int> CircuitSpec::parameter_count(int n_qubits, int n_layers) {
  return {3 * n_qubits * n_layers + 3 * n_qubits, n_qubits * n_layers};
}

ParameterSet init_parameters(const CircuitSpec& spec, rng::Stream stream) {
  spec.validate();
  ParameterSet p;
  p.theta.resize(static_cast<std::size_t>(spec.theta_count()));
  for (double& t : p.theta) t = stream.uniform(0.0, kTwoPi);
  p.lambda.assign(static_cast<std::size_t>(spec.lambda_count()), 1.0);
  return p;
}

std::vector<double> sample_noise(const CircuitSpec& spec, rng::Stream stream) {
  std::vector<double> z(static_cast<std::size_t>(spec.lambda_count()));
  for (double& v : z) v = stream.uniform(0.0, kTwoPi);
  return z;
}

GateProgram build_program(const CircuitSpec& spec, const ParameterSet& params,
                          std::span<const double> noise) {
  spec.validate();
  if (params.theta.size() != static_cast<std::size_t>(spec.theta_count()))
    raise(Errc::length_mismatch, "theta size != 3n(L+1)");
  if (params.lambda.size() != static_cast<std::size_t>(spec.lambda_count()))
    raise(Errc::length_mismatch, "lambda size != nL");
  if (noise.size() != static_cast<std::size_t>(spec.lambda_count()))
    raise(Errc::length_mismatch, "noise size != nL");

  const int n = spec.n_qubits;
  GateProgram prog;
  prog.n_qubits = n;
  prog.gates.reserve(static_cast<std::size_t>(spec.gate_count()));

  int ti = 0;
  auto rotation_rank = [&]() {
    for (int q = 0; q < n; ++q) {
      for (GateKind k : {GateKind::rx, GateKind::ry, GateKind::rz}) {
        Gate g;
        g.kind = k;
        g.q0 = q;
        g.param = ParamKind::theta;
        g.param_index = ti;
        g.angle = params.theta[static_cast<std::size_t>(ti)];
        ++ti;
        prog.gates.push_back(g);
      }
    }
  };

  for (int layer = 0; layer < spec.n_layers; ++layer) {
    rotation_rank();
    for (int q = 0; q + 1 < n; ++q) {
      Gate g;
      g.kind = GateKind::cnot;
      g.q0 = q;
      g.q1 = q + 1;
      prog.gates.push_back(g);
    }
    if (spec.topology == Topology::ring) {
      Gate g;
      g.kind = GateKind::cnot;
      g.q0 = 0;
      g.q1 = n - 1;
      prog.gates.push_back(g);
    }
    for (int q = 0; q < n; ++q) {
      int li = layer * n + q;
      Gate g;
      g.kind = GateKind::rx;
      g.q0 = q;
      g.param = ParamKind::lambda;
      g.param_index = li;
      g.scale = noise[static_cast<std::size_t>(li)];
      g.angle = params.lambda[static_cast<std::size_t>(li)] * g.scale;
      prog.gates.push_back(g);
    }
  }
  rotation_rank();
  return prog;
}

std::string to_text(const GateProgram& program) {
  std::string out = "qubits " + std::to_string(program.n_qubits) + "\n";
  char buf[128];
  for (const Gate& g : program.gates) {
    if (g.kind == GateKind::cnot) {
      std::snprintf(buf, sizeof buf, "cnot q%d q%d\n", g.q0, g.q1);
      out += buf;
      continue;
    }
    const char* name = g.kind == GateKind::rx ? "rx" : (g.kind == GateKind::ry ? "ry" : "rz");
    std::snprintf(buf, sizeof buf, "%s q%d %.17g", name, g.q0, g.angle);
    out += buf;
    if (g.param == ParamKind::theta) {
      std::snprintf(buf, sizeof buf, " theta[%d]", g.param_index);
      out += buf;
    } else if (g.param == ParamKind::lambda) {
      std::snprintf(buf, sizeof buf, " lambda[%d] z=%.17g", g.param_index, g.scale);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace qfgan
