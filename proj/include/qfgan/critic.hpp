#pragma once

#include <span>
#include <string>
#include <vector>

#include "qfgan/matrix.hpp"
#include "qfgan/rng.hpp"
#include "qfgan/tape.hpp"

// 1-D convolutional critic with a scalar linear head. Every layer except the
// final neuron is followed by a ReLU. All passes run over the tape engine so
// input gradients (needed by the gradient penalty) and parameter gradients
// come from the same recorded computation.
namespace qfgan::critic {

struct ConvSpec {
  int filters = 1;
  int kernel = 1;
  int stride = 1;
};

struct CriticConfig {
  int input_length = 20;
  std::vector<ConvSpec> conv_layers{{32, 5, 1}, {64, 5, 2}};
  std::vector<int> dense_layers{64};

  // Raises ShapeMismatch when a kernel outruns the running feature length,
  // a stride or width is non-positive, or the input length is < 1.
  void validate() const;

  // (channels, length) after each conv layer, starting with the (1, m) input.
  std::vector<std::pair<long, long>> feature_plan() const;
  // Widths of the dense stack including the final single neuron.
  std::vector<long> dense_plan() const;
  long parameter_count() const;
};

// Weight/bias arrays per layer: conv layers first, then the dense stack whose
// last entry is the single output neuron.
struct CriticParameters {
  std::vector<std::vector<double>> conv_w;
  std::vector<std::vector<double>> conv_b;
  std::vector<std::vector<double>> dense_w;
  std::vector<std::vector<double>> dense_b;

  long count() const;
};

// Uniform in [-k, k], k = 1/sqrt(fan_in), biases included, fixed draw order.
CriticParameters init_parameters(const CriticConfig& cfg, rng::Stream stream);

void check_shapes(const CriticConfig& cfg, const CriticParameters& params);

// One recorded forward pass. Single-consumer: backward() flags it consumed.
struct CriticTape {
  ad::Tape tape;
  int input_id = -1;
  int scores_id = -1;
  std::vector<int> param_ids;
  bool consumed = false;

  std::vector<double> scores() const;
};

CriticTape forward(const CriticConfig& cfg, const CriticParameters& params,
                   const Matrix& batch);

struct CriticGrads {
  CriticParameters params;
  Matrix inputs;
};

// Exact reverse-mode gradients of upstream . scores. Raises StaleTape when
// the tape was already consumed.
CriticGrads backward(CriticTape& tape, std::span<const double> upstream);

// penalty = lambda_gp * mean_b (||grad_x D(xhat_b)||_2 - 1)^2 with
// xhat_b = eps_b real_b + (1 - eps_b) fake_b. param_grads (optional) receives
// the exact parameter gradient of the penalty, obtained by differentiating
// the recorded input-gradient computation a second time.
double gradient_penalty(const CriticConfig& cfg, const CriticParameters& params,
                        const Matrix& real, const Matrix& fake,
                        std::span<const double> epsilons, double lambda_gp,
                        CriticParameters* param_grads = nullptr);

// loss = mean D(real) - mean D(fake) - penalty, with everything on one tape
// so grads (optional) is the exact parameter gradient of the full objective.
// wasserstein (optional) receives mean D(real) - mean D(fake).
double critic_objective(const CriticConfig& cfg, const CriticParameters& params,
                        const Matrix& real, const Matrix& fake,
                        std::span<const double> epsilons, double lambda_gp,
                        CriticParameters* grads = nullptr,
                        double* wasserstein = nullptr);

// Text checkpoint with a shape manifest; values round-trip bit-exactly.
void save_parameters(const std::string& path, const CriticConfig& cfg,
                     const CriticParameters& params);
CriticParameters load_parameters(const std::string& path, const CriticConfig& cfg);

}  // namespace qfgan::critic
