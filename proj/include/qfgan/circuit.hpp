#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfgan/rng.hpp"

namespace qfgan {

enum class Topology { chain, ring };

// Hardware-efficient ansatz. Each of n_layers blocks is: per-qubit RX,RY,RZ
// (trainable), a CNOT staircase control q -> target q+1 (ring closes with
// control 0 -> target n-1), then a per-qubit RX data upload with angle
// lambda * z. One final trainable RX,RY,RZ rank follows the last block.
struct CircuitSpec {
  int n_qubits = 4;
  int n_layers = 1;
  Topology topology = Topology::chain;

  void validate() const;

  int theta_count() const { return 3 * n_qubits * n_layers + 3 * n_qubits; }
  int lambda_count() const { return n_qubits * n_layers; }
  int gate_count() const;
  // Interleaved X/Z expectations, two per qubit.
  int output_dim() const { return 2 * n_qubits; }

  static std::pair<int, int> parameter_count(int n_qubits, int n_layers);
};

struct ParameterSet {
  std::vector<double> theta;
  std::vector<double> lambda;
};

// theta ~ U[0, 2pi) drawn qubit-major from the stream; upload scales start
// at 1 so the noise passes through untouched.
ParameterSet init_parameters(const CircuitSpec& spec, rng::Stream stream);

enum class GateKind : std::uint8_t { rx, ry, rz, cnot };
enum class ParamKind : std::uint8_t { none, theta, lambda };

struct Gate {
  GateKind kind = GateKind::rx;
  int q0 = 0;       // rotation target, or CNOT control
  int q1 = -1;      // CNOT target
  double angle = 0.0;
  ParamKind param = ParamKind::none;
  int param_index = -1;
  // d(angle)/d(parameter); 1 for theta gates, the consumed z for uploads.
  double scale = 1.0;
};

struct GateProgram {
  int n_qubits = 0;
  std::vector<Gate> gates;
};

// Noise for one shot: n_qubits * n_layers values in [0, 2pi), layer-major.
std::vector<double> sample_noise(const CircuitSpec& spec, rng::Stream stream);

// Resolves every angle. noise.size() must equal lambda_count().
GateProgram build_program(const CircuitSpec& spec, const ParameterSet& params,
                          std::span<const double> noise);

// One gate per line; stable text for debugging and cross-backend diffing.
std::string to_text(const GateProgram& program);

}  // namespace qfgan
