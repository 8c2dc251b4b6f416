#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qfgan/circuit.hpp"
#include "qfgan/critic.hpp"
#include "qfgan/pipeline.hpp"
#include "qfgan/trainer.hpp"

// Run configuration: a strict JSON schema covering every tunable of the
// pipeline, model, training loop, metrics, generation, and fidelity sweep.
// Unknown keys are rejected so a typo cannot silently fall back to defaults.
namespace qfgan::config {

struct IoConfig {
  std::string input_csv;                  // raw price history, "date,close"
  std::string batch_csv = "windows.csv";  // preprocessed windows + .meta sidecar
  std::string work_dir = "runs";          // run directories are created here
};

struct MetricsConfig {
  int tau_max = 0;  // 0 picks half the window length
  int qq_count = 99;
  int pdf_bins = 50;

  int resolved_tau_max(int window) const;
};

struct GenerateConfig {
  long count = 256;
};

struct FidelityConfig {
  int n_qubits = 10;
  std::vector<int> depths;  // empty picks 1..18
  std::vector<int> bonds{1, 8, 16, 24, 32};
  int seeds = 5;
  Topology topology = Topology::ring;
  std::string output_csv = "fidelity_sweep.csv";

  std::vector<int> resolved_depths() const;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the hardware default
  IoConfig io;
  PipelineConfig pipeline;
  CircuitSpec circuit;
  critic::CriticConfig critic;  // input_length is tied to pipeline.window
  train::TrainConfig train;     // seed, out_dir, provenance are filled at dispatch
  MetricsConfig metrics;
  GenerateConfig generate;
  FidelityConfig fidelity;

  // Cross-section checks beyond what each module validates on use.
  void validate() const;
};

// Strict parse; origin names the source in error messages.
RunConfig parse_config(const std::string& text, const std::string& origin);
RunConfig load_config(const std::filesystem::path& path);

// Canonical sorted-key JSON of the experiment settings. io paths and the
// thread count are excluded: results are path- and thread-invariant, so
// neither belongs to the run identity.
std::string canonical_json(const RunConfig& cfg);

// 16-hex FNV-1a over the run-identity core (seed, pipeline, circuit, critic,
// train, metrics). Generation counts and sweep grids only consume a trained
// model, so they do not move the hash. Computed after CLI overrides are
// applied; names the run directory together with the seed.
std::string config_hash(const RunConfig& cfg);

}  // namespace qfgan::config
