#include "qfgan/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfgan/csvio.hpp"
#include "qfgan/errors.hpp"
#include "qfgan/rng.hpp"

namespace qfgan::config {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  raise(Errc::config_error, where + ": " + what);
}

// One JSON object with consumed-key tracking; finish() rejects leftovers so
// misspelled keys never silently fall back to a default.
class Section {
 public:
  Section(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "must be an object");
  }

  const Json* find(const char* key) {
    seen_.push_back(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void integer(const char* key, int& out, long lo, long hi) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) fail(where_ + "." + key, "must be an integer");
    const long raw = v->get<long>();
    if (raw < lo || raw > hi) bounds(key, lo, hi);
    out = int(raw);
  }

  void longint(const char* key, long& out, long lo, long hi) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) fail(where_ + "." + key, "must be an integer");
    out = v->get<long>();
    if (out < lo || out > hi) bounds(key, lo, hi);
  }

  void u64(const char* key, std::uint64_t& out) {
    const Json* v = find(key);
    if (!v) return;
    // The parser stores any non-negative literal as unsigned.
    if (!v->is_number_unsigned()) fail(where_ + "." + key, "must be a non-negative integer");
    out = v->get<std::uint64_t>();
  }

  void real(const char* key, double& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_number()) fail(where_ + "." + key, "must be a number");
    out = v->get<double>();
  }

  void str(const char* key, std::string& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_string()) fail(where_ + "." + key, "must be a string");
    out = v->get<std::string>();
  }

  void int_list(const char* key, std::vector<int>& out, long lo, long hi) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_array()) fail(where_ + "." + key, "must be an array of integers");
    out.clear();
    for (const Json& e : *v) {
      if (!e.is_number_integer()) fail(where_ + "." + key, "must be an array of integers");
      const long raw = e.get<long>();
      if (raw < lo || raw > hi) bounds(key, lo, hi);
      out.push_back(int(raw));
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end())
        fail(where_, "unknown key '" + item.key() + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  [[noreturn]] void bounds(const char* key, long lo, long hi) {
    fail(where_ + "." + key,
         "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }

  const Json& j_;
  std::string where_;
  std::vector<std::string> seen_;
};

Topology parse_topology(const std::string& text, const std::string& where) {
  if (text == "chain") return Topology::chain;
  if (text == "ring") return Topology::ring;
  fail(where, "topology must be 'chain' or 'ring'");
}

const char* topology_name(Topology t) { return t == Topology::ring ? "ring" : "chain"; }

train::Backend parse_backend(const std::string& text, const std::string& where) {
  if (text == "statevector") return train::Backend::statevector;
  if (text == "mps") return train::Backend::mps;
  fail(where, "backend must be 'statevector' or 'mps'");
}

const char* backend_name(train::Backend b) {
  return b == train::Backend::mps ? "mps" : "statevector";
}

void parse_io(const Json& j, const std::string& origin, IoConfig& io) {
  Section s(j, origin + ": io");
  s.str("input_csv", io.input_csv);
  s.str("batch_csv", io.batch_csv);
  s.str("work_dir", io.work_dir);
  s.finish();
}

void parse_pipeline(const Json& j, const std::string& origin, PipelineConfig& p) {
  Section s(j, origin + ": pipeline");
  s.real("delta", p.delta);
  s.real("clip_bound", p.clip_bound);
  s.integer("window", p.window, 2, 1 << 20);
  s.integer("stride", p.stride, 1, 1 << 20);
  s.finish();
}

void parse_circuit(const Json& j, const std::string& origin, CircuitSpec& c) {
  Section s(j, origin + ": circuit");
  s.integer("n_qubits", c.n_qubits, 1, sv::kMaxQubits);
  s.integer("n_layers", c.n_layers, 1, 1 << 10);
  std::string topology;
  s.str("topology", topology);
  if (!topology.empty()) c.topology = parse_topology(topology, s.where());
  s.finish();
}

void parse_critic(const Json& j, const std::string& origin, critic::CriticConfig& c) {
  Section s(j, origin + ": critic");
  if (const Json* arr = s.find("conv_layers")) {
    if (!arr->is_array()) fail(s.where() + ".conv_layers", "must be an array");
    c.conv_layers.clear();
    for (const Json& e : *arr) {
      Section cs(e, origin + ": critic.conv_layers entry");
      critic::ConvSpec spec;
      cs.integer("filters", spec.filters, 1, 4096);
      cs.integer("kernel", spec.kernel, 1, 4096);
      cs.integer("stride", spec.stride, 1, 4096);
      cs.finish();
      c.conv_layers.push_back(spec);
    }
  }
  s.int_list("dense_layers", c.dense_layers, 1, 1 << 16);
  s.finish();
}

void parse_adam(const Json& j, const std::string& origin, train::AdamConfig& a) {
  Section s(j, origin + ": train.adam");
  s.real("learning_rate", a.learning_rate);
  s.real("beta1", a.beta1);
  s.real("beta2", a.beta2);
  s.real("epsilon", a.eps_hat);
  s.finish();
}

void parse_train(const Json& j, const std::string& origin, train::TrainConfig& t) {
  Section s(j, origin + ": train");
  s.integer("epochs", t.epochs, 1, 1 << 24);
  s.integer("batch_size", t.batch_size, 1, 1 << 20);
  s.integer("n_critic", t.n_critic, 1, 1 << 16);
  s.real("lambda_gp", t.lambda_gp);
  std::string backend;
  s.str("backend", backend);
  if (!backend.empty()) t.backend = parse_backend(backend, s.where());
  s.integer("max_bond", t.max_bond, 1, 1 << 16);
  s.integer("eval_rows", t.eval_rows, 2, 1 << 20);
  s.integer("checkpoint_every", t.checkpoint_every, 0, 1 << 24);
  if (const Json* adam = s.find("adam")) parse_adam(*adam, origin, t.adam);
  s.finish();
}

void parse_metrics(const Json& j, const std::string& origin, MetricsConfig& m) {
  Section s(j, origin + ": metrics");
  s.integer("tau_max", m.tau_max, 0, 1 << 20);
  s.integer("qq_count", m.qq_count, 1, 1 << 20);
  s.integer("pdf_bins", m.pdf_bins, 1, 1 << 20);
  s.finish();
}

void parse_generate(const Json& j, const std::string& origin, GenerateConfig& g) {
  Section s(j, origin + ": generate");
  s.longint("count", g.count, 0, 1L << 32);
  s.finish();
}

void parse_fidelity(const Json& j, const std::string& origin, FidelityConfig& f) {
  Section s(j, origin + ": fidelity");
  s.integer("n_qubits", f.n_qubits, 1, sv::kMaxQubits);
  s.int_list("depths", f.depths, 1, 1 << 10);
  s.int_list("bonds", f.bonds, 1, 1 << 16);
  s.integer("seeds", f.seeds, 1, 1 << 16);
  std::string topology;
  s.str("topology", topology);
  if (!topology.empty()) f.topology = parse_topology(topology, s.where());
  s.str("output_csv", f.output_csv);
  s.finish();
}

}  // namespace

int MetricsConfig::resolved_tau_max(int window) const {
  return tau_max > 0 ? tau_max : window / 2;
}

std::vector<int> FidelityConfig::resolved_depths() const {
  if (!depths.empty()) return depths;
  std::vector<int> out;
  for (int d = 1; d <= 18; ++d) out.push_back(d);
  return out;
}

void RunConfig::validate() const {
  if (pipeline.delta < 0.0) raise(Errc::config_error, "pipeline.delta must be >= 0");
  if (pipeline.clip_bound <= 0.0) raise(Errc::config_error, "pipeline.clip_bound must be > 0");
  critic.validate();
  const int tau = metrics.resolved_tau_max(pipeline.window);
  if (tau >= pipeline.window)
    raise(Errc::config_error, "metrics.tau_max must be smaller than pipeline.window");
  if (train.lambda_gp < 0.0) raise(Errc::config_error, "train.lambda_gp must be >= 0");
  if (train.adam.learning_rate <= 0.0)
    raise(Errc::config_error, "train.adam.learning_rate must be > 0");
  if (train.adam.beta1 < 0.0 || train.adam.beta1 >= 1.0 || train.adam.beta2 < 0.0 ||
      train.adam.beta2 >= 1.0)
    raise(Errc::config_error, "train.adam betas must lie in [0, 1)");
  if (train.adam.eps_hat <= 0.0) raise(Errc::config_error, "train.adam.epsilon must be > 0");
  if (fidelity.bonds.empty()) raise(Errc::config_error, "fidelity.bonds must not be empty");
  for (std::size_t i = 1; i < fidelity.bonds.size(); ++i) {
    if (fidelity.bonds[i] <= fidelity.bonds[i - 1])
      raise(Errc::config_error, "fidelity.bonds must be strictly increasing");
  }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(origin, e.what());
  }

  RunConfig cfg;
  Section top(root, origin);
  top.u64("seed", cfg.seed);
  top.integer("threads", cfg.threads, 0, 4096);
  if (const Json* j = top.find("io")) parse_io(*j, origin, cfg.io);
  if (const Json* j = top.find("pipeline")) parse_pipeline(*j, origin, cfg.pipeline);
  if (const Json* j = top.find("circuit")) parse_circuit(*j, origin, cfg.circuit);
  if (const Json* j = top.find("critic")) parse_critic(*j, origin, cfg.critic);
  if (const Json* j = top.find("train")) parse_train(*j, origin, cfg.train);
  if (const Json* j = top.find("metrics")) parse_metrics(*j, origin, cfg.metrics);
  if (const Json* j = top.find("generate")) parse_generate(*j, origin, cfg.generate);
  if (const Json* j = top.find("fidelity")) parse_fidelity(*j, origin, cfg.fidelity);
  top.finish();

  // Dependent fields the schema keeps single-sourced.
  cfg.critic.input_length = cfg.pipeline.window;
  cfg.train.tau_max = cfg.metrics.resolved_tau_max(cfg.pipeline.window);
  cfg.train.seed = cfg.seed;

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.string());
}

namespace {

// The run-identity core: everything that shapes the trained model and its
// logged metrics. Generation counts and sweep grids only consume a model,
// so they stay out of the hash (and a generate override cannot orphan the
// training run directory it needs to find).
Json core_json(const RunConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["pipeline"] = {{"delta", cfg.pipeline.delta},
                   {"clip_bound", cfg.pipeline.clip_bound},
                   {"window", cfg.pipeline.window},
                   {"stride", cfg.pipeline.stride}};
  j["circuit"] = {{"n_qubits", cfg.circuit.n_qubits},
                  {"n_layers", cfg.circuit.n_layers},
                  {"topology", topology_name(cfg.circuit.topology)}};
  Json conv = Json::array();
  for (const critic::ConvSpec& c : cfg.critic.conv_layers)
    conv.push_back({{"filters", c.filters}, {"kernel", c.kernel}, {"stride", c.stride}});
  j["critic"] = {{"conv_layers", conv}, {"dense_layers", cfg.critic.dense_layers}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"n_critic", cfg.train.n_critic},
                {"lambda_gp", cfg.train.lambda_gp},
                {"backend", backend_name(cfg.train.backend)},
                {"max_bond", cfg.train.max_bond},
                {"eval_rows", cfg.train.eval_rows},
                {"checkpoint_every", cfg.train.checkpoint_every},
                {"adam",
                 {{"learning_rate", cfg.train.adam.learning_rate},
                  {"beta1", cfg.train.adam.beta1},
                  {"beta2", cfg.train.adam.beta2},
                  {"epsilon", cfg.train.adam.eps_hat}}}};
  j["metrics"] = {{"tau_max", cfg.metrics.resolved_tau_max(cfg.pipeline.window)},
                  {"qq_count", cfg.metrics.qq_count},
                  {"pdf_bins", cfg.metrics.pdf_bins}};
  return j;
}

}  // namespace

std::string canonical_json(const RunConfig& cfg) {
  Json j = core_json(cfg);
  j["generate"] = {{"count", cfg.generate.count}};
  j["fidelity"] = {{"n_qubits", cfg.fidelity.n_qubits},
                   {"depths", cfg.fidelity.resolved_depths()},
                   {"bonds", cfg.fidelity.bonds},
                   {"seeds", cfg.fidelity.seeds},
                   {"topology", topology_name(cfg.fidelity.topology)}};
  // nlohmann::json orders object keys lexicographically, so dump() is already
  // a canonical form.
  return j.dump();
}

std::string config_hash(const RunConfig& cfg) {
  const std::string canon = core_json(cfg).dump();
  const std::uint64_t h = rng::hash_label(canon);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return std::string(buf);
}

}  // namespace qfgan::config
