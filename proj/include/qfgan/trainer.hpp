#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qfgan/circuit.hpp"
#include "qfgan/critic.hpp"
#include "qfgan/csvio.hpp"
#include "qfgan/pipeline.hpp"
#include "qfgan/statevector.hpp"

// Alternating adversarial training: the critic ascends
//   L = mean D(real) - mean D(fake) - lambda_gp * mean (||grad_x D(xhat)|| - 1)^2
// and the generator ascends mean D(fake), both with Adam. All randomness is
// derived from labeled substreams of the run seed, keyed by (epoch, step,
// sample), so a step's draws never depend on how much any other consumer has
// drawn and parallel evaluation cannot shift them.
namespace qfgan::train {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

// Flat moment buffers; step counts the applied updates.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

AdamState make_adam_state(std::size_t n);

// Textbook bias-corrected descent: p -= lr * mhat / (sqrt(vhat) + eps_hat).
// Ascent callers negate their gradients.
void adam_update(AdamState& state, std::span<double> params, std::span<const double> grads,
                 const AdamConfig& cfg);

enum class Backend { statevector, mps };

struct TrainConfig {
  int epochs = 500;
  int batch_size = 64;
  int n_critic = 5;  // critic steps per generator step
  double lambda_gp = 10.0;
  AdamConfig adam;
  Backend backend = Backend::statevector;
  int max_bond = 32;  // mps backend only
  std::uint64_t seed = 1;
  int eval_rows = 32;  // generated windows per metrics row; see design note
  int tau_max = 6;
  int checkpoint_every = 100;  // epochs; 0 = final checkpoint only
  int stop_after_epoch = 0;    // > 0: checkpoint and return after this epoch
  std::filesystem::path out_dir;  // empty: keep everything in memory
  Provenance provenance;

  void validate() const;
};

// Design note on eval_rows: the per-row autocorrelation estimator on short
// windows carries a bias of roughly -1/window per lag, so the achievable
// E_ACF_id floor does not shrink as eval_rows grows while the white-noise
// band does. Evaluation batches must stay modest (around 2-4x the window)
// for the band to stay above the floor an ideal generator would reach.

struct TrainLogRow {
  int epoch = 0;  // 1-based
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  double wasserstein = 0.0;  // duality gap from the epoch's last critic step
  double e_acf_id = 0.0;
  double e_acf_abs = 0.0;
  double e_lev = 0.0;
  double emd = 0.0;
  double wall_time = 0.0;  // seconds since training start; timing sidecar only
};

struct TrainLog {
  std::vector<TrainLogRow> rows;

  // All nine columns in order. Timing makes this serialization
  // run-dependent; artifacts on disk use the split writers below.
  std::string to_csv() const;
  // The eight deterministic columns; byte-identical across same-seed runs.
  std::string to_csv_deterministic() const;
  // epoch,wall_time sidecar.
  std::string timing_csv() const;
};

// Parse a written log pair back into memory. timing.csv is optional; rows
// keep wall_time 0 when it is absent.
TrainLog load_log(const std::filesystem::path& out_dir);

// Everything a resumed run needs; the noise streams are reconstructed from
// (seed, epoch, step), so no RNG state is stored.
struct TrainState {
  ParameterSet gen_params;
  critic::CriticParameters critic_params;
  AdamState gen_adam;
  AdamState critic_adam;
  int epoch = 0;  // completed epochs
};

struct TrainResult {
  TrainState state;
  TrainLog log;
};

// One ascent step on the critic objective. Returns the loss; wasserstein
// (optional) receives mean D(real) - mean D(fake).
double critic_step(const critic::CriticConfig& ccfg, critic::CriticParameters& params,
                   AdamState& adam, const AdamConfig& acfg, const Matrix& real,
                   const Matrix& fake, std::span<const double> epsilons, double lambda_gp,
                   double* wasserstein = nullptr);

// Expectation vectors for each noise row; values in [-1, 1], never clipped.
Matrix fake_batch(const CircuitSpec& spec, const ParameterSet& params,
                  const std::vector<std::vector<double>>& noise, Backend backend, int max_bond);

// The raw generated batch an epoch's metrics row evaluates: eval_rows noise
// draws from the run's labeled substream pushed through the generator.
// Exposed so callers can rebuild the final report without re-training.
Matrix eval_batch(const CircuitSpec& spec, const ParameterSet& params, const TrainConfig& cfg,
                  int epoch);

// d mean_b D(G(noise_b)) / d(theta, lambda): critic input-gradients chained
// into the backend's exact circuit gradient. loss (optional) receives
// mean D(G(noise)).
sv::Gradient generator_gradient(const CircuitSpec& spec, const ParameterSet& params,
                                const critic::CriticConfig& ccfg,
                                const critic::CriticParameters& cparams,
                                const std::vector<std::vector<double>>& noise, Backend backend,
                                int max_bond, double* loss = nullptr);

// One ascent step on mean D(G(noise)). Returns the pre-update loss.
double generator_step(const CircuitSpec& spec, ParameterSet& params, AdamState& adam,
                      const AdamConfig& acfg, const critic::CriticConfig& ccfg,
                      const critic::CriticParameters& cparams,
                      const std::vector<std::vector<double>>& noise, Backend backend,
                      int max_bond);

std::filesystem::path checkpoint_dir(const std::filesystem::path& out_dir, int epoch);

// Largest epoch with a checkpoint under out_dir/checkpoints; 0 when none.
int latest_checkpoint(const std::filesystem::path& out_dir);

void save_checkpoint(const std::filesystem::path& dir, const CircuitSpec& spec,
                     const critic::CriticConfig& ccfg, const TrainState& state,
                     const Provenance& prov);
TrainState load_checkpoint(const std::filesystem::path& dir, const CircuitSpec& spec,
                           const critic::CriticConfig& ccfg);

// The full loop. `resume` continues from a loaded checkpoint state and
// `prior_log` supplies the rows up to that epoch (extra rows are dropped);
// recomputed epochs reproduce the uninterrupted run bit for bit. When
// cfg.out_dir is set, checkpoints land under out_dir/checkpoints/epoch_N and
// the log pair (train_log.csv, timing.csv) is rewritten at every checkpoint.
TrainResult train(const WindowBatch& data, const CircuitSpec& spec,
                  const critic::CriticConfig& critic_cfg, const TrainConfig& cfg,
                  const TrainState* resume = nullptr, const TrainLog* prior_log = nullptr);

}  // namespace qfgan::train
