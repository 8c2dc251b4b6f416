#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qfgan/circuit.hpp"
#include "qfgan/config.hpp"
#include "qfgan/critic.hpp"
#include "qfgan/csvio.hpp"
#include "qfgan/errors.hpp"
#include "qfgan/metrics.hpp"
#include "qfgan/mps.hpp"
#include "qfgan/par.hpp"
#include "qfgan/pipeline.hpp"
#include "qfgan/rng.hpp"
#include "qfgan/statevector.hpp"
#include "qfgan/trainer.hpp"
#include "qfgan/version.hpp"

namespace {

using namespace qfgan;

namespace fs = std::filesystem;

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return std::string(buf);
}

fs::path resolve_out(const std::string& work_dir, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p;
  return fs::path(work_dir) / p;
}

Provenance make_provenance(const config::RunConfig& cfg, const char* command) {
  Provenance prov;
  prov.tool_version = kVersion;
  prov.config_hash = config::config_hash(cfg);
  prov.seed = cfg.seed;
  prov.extra.push_back({"command", command});
  return prov;
}

std::string window_header(std::size_t cols) {
  std::string out;
  for (std::size_t c = 0; c < cols; ++c) {
    if (c) out += ',';
    out += "t" + std::to_string(c);
  }
  return out;
}

fs::path run_dir_for(const config::RunConfig& cfg) {
  return fs::path(cfg.io.work_dir) /
         ("run_" + config::config_hash(cfg) + "_s" + std::to_string(cfg.seed));
}

// The preprocessed batch plus the sidecar needed to invert the transform.
struct StoredBatch {
  WindowBatch batch;
  fs::path path;
};

void write_batch_meta(const fs::path& csv_path, const WindowBatch& batch) {
  write_kv_file(csv_path.string() + ".meta",
                {{"format", "1"},
                 {"mean", fmt_double(batch.stats.mean)},
                 {"std", fmt_double(batch.stats.std)},
                 {"delta", fmt_double(batch.config.delta)},
                 {"clip_bound", fmt_double(batch.config.clip_bound)},
                 {"window", std::to_string(batch.config.window)},
                 {"stride", std::to_string(batch.config.stride)},
                 {"rows", std::to_string(batch.samples.rows)}});
}

StoredBatch load_batch(const config::RunConfig& cfg) {
  StoredBatch out;
  out.path = resolve_out(cfg.io.work_dir, cfg.io.batch_csv);
  const auto kv = read_kv_file(out.path.string() + ".meta");
  out.batch.stats.mean = parse_double(kv_lookup(kv, "mean"), -1);
  out.batch.stats.std = parse_double(kv_lookup(kv, "std"), -1);
  out.batch.config.delta = parse_double(kv_lookup(kv, "delta"), -1);
  out.batch.config.clip_bound = parse_double(kv_lookup(kv, "clip_bound"), -1);
  out.batch.config.window = std::stoi(kv_lookup(kv, "window"));
  out.batch.config.stride = std::stoi(kv_lookup(kv, "stride"));
  if (out.batch.config.window != cfg.pipeline.window ||
      out.batch.config.stride != cfg.pipeline.stride ||
      out.batch.config.delta != cfg.pipeline.delta ||
      out.batch.config.clip_bound != cfg.pipeline.clip_bound)
    raise(Errc::config_error,
          "stored batch was preprocessed with different pipeline settings; re-run preprocess");
  out.batch.samples = read_matrix_csv(out.path);
  return out;
}

std::vector<int> checkpoint_epochs(const fs::path& run_dir) {
  std::vector<int> epochs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(run_dir / "checkpoints", ec)) {
    if (!entry.is_directory()) continue;
    int epoch = 0;
    if (std::sscanf(entry.path().filename().string().c_str(), "epoch_%d", &epoch) == 1 &&
        epoch > 0)
      epochs.push_back(epoch);
  }
  std::sort(epochs.begin(), epochs.end());
  return epochs;
}

int cmd_preprocess(const config::RunConfig& cfg) {
  if (cfg.io.input_csv.empty()) raise(Errc::config_error, "io.input_csv is required");
  const PriceSeries prices = load_price_csv(cfg.io.input_csv);
  const WindowBatch batch = preprocess(prices, cfg.pipeline);

  fs::create_directories(cfg.io.work_dir);
  const fs::path out = resolve_out(cfg.io.work_dir, cfg.io.batch_csv);
  write_matrix_csv(out, batch.samples, make_provenance(cfg, "preprocess"),
                   window_header(batch.samples.cols));
  write_batch_meta(out, batch);

  if (2 * cfg.circuit.n_qubits != cfg.pipeline.window)
    std::fprintf(stderr,
                 "warning: the circuit emits %d values per window but pipeline.window is %d; "
                 "train will reject this pairing\n",
                 2 * cfg.circuit.n_qubits, cfg.pipeline.window);

  std::printf("rows %zu\n", batch.samples.rows);
  std::printf("window %d\n", cfg.pipeline.window);
  std::printf("batch %s\n", out.string().c_str());
  return 0;
}

void write_report_files(const fs::path& dir, const metrics::MetricsReport& rep,
                        const Provenance& prov) {
  write_text_file(dir / "report.json", metrics::report_json(rep));
  write_text_file(dir / "acf_reference.csv",
                  prov.header_block() + metrics::curves_csv(rep, metrics::Side::reference));
  write_text_file(dir / "acf_generated.csv",
                  prov.header_block() + metrics::curves_csv(rep, metrics::Side::generated));
}

int cmd_train(config::RunConfig cfg) {
  const StoredBatch stored = load_batch(cfg);

  const fs::path run_dir = run_dir_for(cfg);
  fs::create_directories(run_dir);
  const Provenance prov = make_provenance(cfg, "train");
  write_text_file(run_dir / "config.json", config::canonical_json(cfg) + "\n");

  cfg.train.out_dir = run_dir;
  cfg.train.provenance = prov;
  if (const char* env = std::getenv("QFGAN_STOP_AFTER_EPOCH"))
    cfg.train.stop_after_epoch = std::atoi(env);

  // Resume from the newest checkpoint the on-disk log still covers; anything
  // newer cannot be continued seamlessly and is recomputed instead.
  train::TrainState resume_state;
  train::TrainLog prior;
  int resume_epoch = 0;
  if (fs::exists(run_dir / "train_log.csv")) {
    prior = train::load_log(run_dir);
    const std::vector<int> epochs = checkpoint_epochs(run_dir);
    for (int e : epochs)
      if (std::size_t(e) <= prior.rows.size()) resume_epoch = e;
  }
  if (resume_epoch > 0) {
    resume_state = train::load_checkpoint(train::checkpoint_dir(run_dir, resume_epoch),
                                          cfg.circuit, cfg.critic);
    std::printf("resumed_from_epoch %d\n", resume_epoch);
  }

  const train::TrainResult result =
      train::train(stored.batch, cfg.circuit, cfg.critic, cfg.train,
                   resume_epoch > 0 ? &resume_state : nullptr,
                   resume_epoch > 0 ? &prior : nullptr);

  // Final report, rebuilt from the same evaluation draws as the last row.
  const Matrix real_post = postprocess(stored.batch.samples, stored.batch.stats,
                                       stored.batch.config);
  const Matrix fake = train::eval_batch(cfg.circuit, result.state.gen_params, cfg.train,
                                        result.state.epoch);
  const Matrix fake_post = postprocess(fake, stored.batch.stats, stored.batch.config);
  const metrics::MetricsReport rep =
      metrics::stylized_fact_errors(real_post, fake_post, cfg.train.tau_max);
  write_report_files(run_dir, rep, prov);

  const train::TrainLogRow& last = result.log.rows.back();
  std::printf("run_dir %s\n", run_dir.string().c_str());
  std::printf("final_epoch %d\n", result.state.epoch);
  std::printf("final_emd %s\n", fmt_double(last.emd).c_str());
  std::printf("final_e_acf_id %s\n", fmt_double(last.e_acf_id).c_str());
  std::printf("final_wasserstein %s\n", fmt_double(last.wasserstein).c_str());
  return 0;
}

int cmd_generate(const config::RunConfig& cfg, const std::string& checkpoint_arg,
                 const std::string& output_arg, bool emit_raw) {
  fs::path ckpt(checkpoint_arg);
  if (ckpt.empty()) {
    const fs::path run_dir = run_dir_for(cfg);
    const int last = train::latest_checkpoint(run_dir);
    if (last == 0)
      raise(Errc::missing_file, "no checkpoint under " + run_dir.string() +
                                    "; train first or pass --checkpoint");
    ckpt = train::checkpoint_dir(run_dir, last);
  }
  const train::TrainState state = train::load_checkpoint(ckpt, cfg.circuit, cfg.critic);
  const StoredBatch stored = load_batch(cfg);

  Provenance prov = make_provenance(cfg, "generate");
  prov.extra.push_back(
      {"checkpoint_hash", hex16(rng::hash_label(read_text_file(ckpt / "generator.txt")))});

  const long count = cfg.generate.count;
  const rng::Stream gs = rng::Stream(cfg.seed).child("generate");
  std::vector<std::vector<double>> noise;
  noise.reserve(std::size_t(count));
  for (long i = 0; i < count; ++i)
    noise.push_back(sample_noise(cfg.circuit, gs.child(std::uint64_t(i))));

  const Matrix raw = train::fake_batch(cfg.circuit, state.gen_params, noise,
                                       cfg.train.backend, cfg.train.max_bond);
  const Matrix post = postprocess(raw, stored.batch.stats, stored.batch.config);

  fs::create_directories(cfg.io.work_dir);
  const fs::path out =
      output_arg.empty()
          ? resolve_out(cfg.io.work_dir, "generated_" + config::config_hash(cfg) + "_s" +
                                             std::to_string(cfg.seed) + ".csv")
          : fs::path(output_arg);
  write_matrix_csv(out, post, prov, window_header(post.cols));

  if (emit_raw) {
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
      if (!(raw.data[i] >= -1.0 && raw.data[i] <= 1.0))
        raise(Errc::out_of_range, "raw expectation outside [-1, 1]", long(i));
    }
    fs::path raw_path = out;
    raw_path.replace_extension();
    raw_path += "_raw.csv";
    write_matrix_csv(raw_path, raw, prov, window_header(raw.cols));
    std::printf("raw_output %s\n", raw_path.string().c_str());
  }

  std::printf("rows %zu\n", post.rows);
  std::printf("checkpoint_hash %s\n", prov.extra.back().second.c_str());
  std::printf("output %s\n", out.string().c_str());
  return 0;
}

double interpolated_quantile(std::vector<double> sorted, double p) {
  const double pos = p * double(sorted.size() - 1);
  const std::size_t lo = std::size_t(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

int cmd_evaluate(const config::RunConfig& cfg, const std::string& reference_arg,
                 const std::string& generated_arg, int tau_arg, const std::string& out_arg) {
  const Matrix ref = read_matrix_csv(reference_arg);
  const Matrix gen = read_matrix_csv(generated_arg);
  const int window = int(ref.cols);
  const int tau_max = tau_arg > 0 ? tau_arg : cfg.metrics.resolved_tau_max(window);
  if (tau_max >= window)
    raise(Errc::config_error, "tau_max must be smaller than the window length");

  const metrics::MetricsReport rep = metrics::stylized_fact_errors(ref, gen, tau_max);

  const fs::path out_dir(out_arg);
  fs::create_directories(out_dir);
  const Provenance prov = make_provenance(cfg, "evaluate");
  write_report_files(out_dir, rep, prov);

  std::vector<double> ref_pool = ref.data;
  std::vector<double> gen_pool = gen.data;
  const auto qq = metrics::qq_points(ref_pool, gen_pool, cfg.metrics.qq_count);
  {
    std::string csv = prov.header_block() + "reference,generated\n";
    for (const auto& [a, b] : qq) csv += fmt_double(a) + "," + fmt_double(b) + "\n";
    write_text_file(out_dir / "qq.csv", csv);
  }
  const std::pair<const char*, const std::vector<double>*> pdf_jobs[] = {
      {"pdf_reference.csv", &ref_pool}, {"pdf_generated.csv", &gen_pool}};
  for (const auto& [name, pool] : pdf_jobs) {
    const metrics::Histogram h = metrics::pdf_histogram(*pool, cfg.metrics.pdf_bins);
    std::string csv = prov.header_block() + "left,right,density\n";
    for (std::size_t b = 0; b < h.density.size(); ++b)
      csv += fmt_double(h.edges[b]) + "," + fmt_double(h.edges[b + 1]) + "," +
             fmt_double(h.density[b]) + "\n";
    write_text_file(out_dir / name, csv);
  }

  // A generated tail is flagged when the extreme quantile pair drifts apart
  // by more than half the reference interquartile range.
  std::sort(ref_pool.begin(), ref_pool.end());
  const double iqr =
      interpolated_quantile(ref_pool, 0.75) - interpolated_quantile(ref_pool, 0.25);
  const double tail_low = std::abs(qq.front().first - qq.front().second);
  const double tail_high = std::abs(qq.back().first - qq.back().second);
  const double tail_limit = 0.5 * iqr;

  std::printf("emd %s\n", fmt_double(rep.emd).c_str());
  std::printf("e_acf_id %s\n", fmt_double(rep.e_acf_id).c_str());
  std::printf("e_acf_abs %s\n", fmt_double(rep.e_acf_abs).c_str());
  std::printf("e_lev %s\n", fmt_double(rep.e_lev).c_str());
  std::printf("acf_band %s\n", fmt_double(rep.ci_halfwidth).c_str());
  std::printf("qq_tail_low %s flag %s\n", fmt_double(tail_low).c_str(),
              tail_low > tail_limit ? "yes" : "no");
  std::printf("qq_tail_high %s flag %s\n", fmt_double(tail_high).c_str(),
              tail_high > tail_limit ? "yes" : "no");
  std::printf("output_dir %s\n", out_dir.string().c_str());
  return 0;
}

int cmd_fidelity_sweep(const config::RunConfig& cfg) {
  const config::FidelityConfig& f = cfg.fidelity;
  // The exact reference needs the full 2^n statevector.
  if (f.n_qubits > 20)
    raise(Errc::config_error, "the dense reference is infeasible beyond 20 qubits");

  const std::vector<int> depths = f.resolved_depths();
  std::string csv = "depth,bond,seed,fidelity,kept_weight_log,weighted_fidelity\n";
  std::size_t rows = 0;
  std::vector<std::string> violations;
  double min_top_fidelity = 1.0;

  for (int depth : depths) {
    CircuitSpec spec;
    spec.n_qubits = f.n_qubits;
    spec.n_layers = depth;
    spec.topology = f.topology;
    for (int seed = 1; seed <= f.seeds; ++seed) {
      const rng::Stream root{std::uint64_t(seed)};
      const ParameterSet params = init_parameters(spec, root.child("theta"));
      const std::vector<double> noise = sample_noise(spec, root.child("noise"));
      const GateProgram program = build_program(spec, params, noise);
      const sv::Statevector dense = sv::run(program);

      double prev = -1.0;
      int prev_bond = 0;
      for (int bond : f.bonds) {
        const mps::MpsState state = mps::mps_run(program, bond);
        const double fidelity = mps::fidelity_dense(state, dense);
        const double weighted = fidelity * std::exp(state.kept_weight_log);
        csv += std::to_string(depth) + "," + std::to_string(bond) + "," +
               std::to_string(seed) + "," + fmt_double(fidelity) + "," +
               fmt_double(state.kept_weight_log) + "," + fmt_double(weighted) + "\n";
        ++rows;
        if (prev_bond > 0 && fidelity + 1e-9 < prev) {
          char line[160];
          std::snprintf(line, sizeof(line),
                        "violation depth=%d seed=%d: F(chi=%d)=%.12f < F(chi=%d)=%.12f", depth,
                        seed, bond, fidelity, prev_bond, prev);
          violations.push_back(line);
        }
        prev = fidelity;
        prev_bond = bond;
      }
      min_top_fidelity = std::min(min_top_fidelity, prev);
    }
  }

  fs::create_directories(cfg.io.work_dir);
  const fs::path out = resolve_out(cfg.io.work_dir, f.output_csv);
  write_text_file(out, make_provenance(cfg, "fidelity-sweep").header_block() + csv);

  for (const std::string& v : violations) std::printf("%s\n", v.c_str());
  std::printf("rows %zu\n", rows);
  std::printf("monotonicity_violations %zu\n", violations.size());
  std::printf("min_top_bond_fidelity %s\n", fmt_double(min_top_fidelity).c_str());
  std::printf("output %s\n", out.string().c_str());
  return 0;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::missing_file:
    case Errc::io_error:
      return 3;
    case Errc::non_finite_loss:
      return 4;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein GAN with a quantum-circuit generator for financial time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path;
  std::uint64_t seed_override = 0;
  int epochs_override = 0;
  std::string backend_override;
  int bond_override = 0;
  int threads_override = 0;
  long count_override = -1;

  std::string reference_arg, generated_arg, checkpoint_arg, output_arg;
  std::string eval_out_dir = "evaluation";
  int tau_arg = 0;
  bool emit_raw = false;

  const auto add_common = [&](CLI::App* sub, bool config_required) {
    CLI::Option* c = sub->add_option("--config", config_path, "JSON run configuration");
    if (config_required) c->required();
    sub->add_option("--seed", seed_override, "override the run seed");
    sub->add_option("--epochs", epochs_override, "override train.epochs");
    sub->add_option("--backend", backend_override, "override train.backend")
        ->check(CLI::IsMember({"statevector", "mps"}));
    sub->add_option("--bond", bond_override, "override train.max_bond");
    sub->add_option("--threads", threads_override, "worker thread cap");
  };

  CLI::App* sub_pre = app.add_subcommand("preprocess", "price CSV to training windows");
  add_common(sub_pre, true);

  CLI::App* sub_train = app.add_subcommand("train", "adversarial training run");
  add_common(sub_train, true);

  CLI::App* sub_gen = app.add_subcommand("generate", "sample windows from a checkpoint");
  add_common(sub_gen, true);
  sub_gen->add_option("--checkpoint", checkpoint_arg, "checkpoint directory (default: latest)");
  sub_gen->add_option("--output", output_arg, "output CSV path");
  sub_gen->add_option("--count", count_override, "override generate.count");
  sub_gen->add_flag("--emit-raw", emit_raw, "also write pre-image expectations");

  CLI::App* sub_eval = app.add_subcommand("evaluate", "stylized-fact comparison of two window CSVs");
  add_common(sub_eval, false);
  sub_eval->add_option("--reference", reference_arg, "reference window CSV")->required();
  sub_eval->add_option("--generated", generated_arg, "generated window CSV")->required();
  sub_eval->add_option("--tau-max", tau_arg, "autocorrelation lag cutoff");
  sub_eval->add_option("--output-dir", eval_out_dir, "report directory");

  CLI::App* sub_fid = app.add_subcommand("fidelity-sweep",
                                         "truncated-simulator fidelity against the dense state");
  add_common(sub_fid, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    config::RunConfig cfg;
    if (!config_path.empty()) cfg = config::load_config(config_path);

    CLI::App* active = app.get_subcommands().front();
    const auto given = [&](const char* name) {
      const CLI::Option* o = active->get_option_no_throw(name);
      return o != nullptr && o->count() > 0;
    };

    if (given("--seed")) cfg.seed = seed_override;
    if (given("--epochs")) {
      if (epochs_override < 1) raise(Errc::config_error, "--epochs must be >= 1");
      cfg.train.epochs = epochs_override;
    }
    if (given("--backend"))
      cfg.train.backend = backend_override == "mps" ? train::Backend::mps
                                                    : train::Backend::statevector;
    if (given("--bond")) {
      if (bond_override < 1) raise(Errc::config_error, "--bond must be >= 1");
      cfg.train.max_bond = bond_override;
    }
    if (given("--threads")) {
      if (threads_override < 1) raise(Errc::config_error, "--threads must be >= 1");
      cfg.threads = threads_override;
    }
    if (given("--count")) {
      if (count_override < 0) raise(Errc::config_error, "--count must be >= 0");
      cfg.generate.count = count_override;
    }
    cfg.train.seed = cfg.seed;
    if (cfg.threads > 0) par::set_max_threads(cfg.threads);

    if (*sub_pre) return cmd_preprocess(cfg);
    if (*sub_train) return cmd_train(cfg);
    if (*sub_gen) return cmd_generate(cfg, checkpoint_arg, output_arg, emit_raw);
    if (*sub_eval) return cmd_evaluate(cfg, reference_arg, generated_arg, tau_arg, eval_out_dir);
    if (*sub_fid) return cmd_fidelity_sweep(cfg);
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
