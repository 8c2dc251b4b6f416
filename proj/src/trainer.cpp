#include "qfgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfgan/errors.hpp"
#include "qfgan/metrics.hpp"
#include "qfgan/mps.hpp"
#include "qfgan/rng.hpp"

namespace qfgan::train {

namespace {

void require(bool ok, Errc code, const std::string& message, long index = -1) {
  if (!ok) raise(code, message, index);
}

// Canonical flat order for the critic: conv (w, b) pairs, then dense (w, b)
// pairs. Matches the checkpoint layout.
std::vector<double> flatten(const critic::CriticParameters& p) {
  std::vector<double> flat;
  for (std::size_t i = 0; i < p.conv_w.size(); ++i) {
    flat.insert(flat.end(), p.conv_w[i].begin(), p.conv_w[i].end());
    flat.insert(flat.end(), p.conv_b[i].begin(), p.conv_b[i].end());
  }
  for (std::size_t i = 0; i < p.dense_w.size(); ++i) {
    flat.insert(flat.end(), p.dense_w[i].begin(), p.dense_w[i].end());
    flat.insert(flat.end(), p.dense_b[i].begin(), p.dense_b[i].end());
  }
  return flat;
}

void unflatten(std::span<const double> flat, critic::CriticParameters& p) {
  std::size_t pos = 0;
  auto take = [&](std::vector<double>& dst) {
    for (double& v : dst) v = flat[pos++];
  };
  for (std::size_t i = 0; i < p.conv_w.size(); ++i) {
    take(p.conv_w[i]);
    take(p.conv_b[i]);
  }
  for (std::size_t i = 0; i < p.dense_w.size(); ++i) {
    take(p.dense_w[i]);
    take(p.dense_b[i]);
  }
}

std::vector<double> flatten(const ParameterSet& p) {
  std::vector<double> flat(p.theta);
  flat.insert(flat.end(), p.lambda.begin(), p.lambda.end());
  return flat;
}

void unflatten(std::span<const double> flat, ParameterSet& p) {
  for (std::size_t i = 0; i < p.theta.size(); ++i) p.theta[i] = flat[i];
  for (std::size_t i = 0; i < p.lambda.size(); ++i) p.lambda[i] = flat[p.theta.size() + i];
}

std::vector<double> flatten(const sv::Gradient& g) {
  std::vector<double> flat(g.theta);
  flat.insert(flat.end(), g.lambda.begin(), g.lambda.end());
  return flat;
}

void check_finite(double v, Errc code, const std::string& what, long index = -1) {
  require(std::isfinite(v), code, what, index);
}

std::string array_line(const std::string& name, std::span<const double> v) {
  std::ostringstream out;
  out << name << " " << v.size();
  for (double x : v) out << " " << fmt_double(x);
  out << "\n";
  return out.str();
}

std::vector<double> parse_array_line(std::istream& in, const std::string& expect) {
  std::string name;
  std::size_t count = 0;
  in >> name >> count;
  require(bool(in) && name == expect, Errc::parse_error, "expected array '" + expect + "'");
  std::vector<double> v(count);
  for (double& x : v) {
    std::string tok;
    in >> tok;
    require(bool(in), Errc::parse_error, "truncated array '" + expect + "'");
    x = parse_double(tok);
  }
  return v;
}

}  // namespace

AdamState make_adam_state(std::size_t n) {
  AdamState st;
  st.m.assign(n, 0.0);
  st.v.assign(n, 0.0);
  return st;
}

void adam_update(AdamState& state, std::span<double> params, std::span<const double> grads,
                 const AdamConfig& cfg) {
  require(state.m.size() == params.size() && grads.size() == params.size(),
          Errc::length_mismatch, "adam buffers do not match the parameter count");
  state.step += 1;
  const double b1t = 1.0 - std::pow(cfg.beta1, double(state.step));
  const double b2t = 1.0 - std::pow(cfg.beta2, double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps_hat);
  }
}

void TrainConfig::validate() const {
  require(epochs >= 1, Errc::config_error, "epochs must be >= 1");
  require(batch_size >= 2, Errc::config_error, "batch_size must be >= 2");
  require(n_critic >= 1, Errc::config_error, "n_critic must be >= 1");
  require(lambda_gp >= 0.0, Errc::config_error, "lambda_gp must be >= 0");
  require(adam.learning_rate > 0.0, Errc::config_error, "learning_rate must be > 0");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, Errc::config_error, "beta1 must be in [0,1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, Errc::config_error, "beta2 must be in [0,1)");
  require(adam.eps_hat > 0.0, Errc::config_error, "adam eps must be > 0");
  require(max_bond >= 1, Errc::config_error, "max_bond must be >= 1");
  require(eval_rows >= 1, Errc::config_error, "eval_rows must be >= 1");
  require(tau_max >= 1, Errc::config_error, "tau_max must be >= 1");
  require(checkpoint_every >= 0, Errc::config_error, "checkpoint_every must be >= 0");
  require(stop_after_epoch >= 0, Errc::config_error, "stop_after_epoch must be >= 0");
}

double critic_step(const critic::CriticConfig& ccfg, critic::CriticParameters& params,
                   AdamState& adam, const AdamConfig& acfg, const Matrix& real,
                   const Matrix& fake, std::span<const double> epsilons, double lambda_gp,
                   double* wasserstein) {
  critic::CriticParameters grads;
  const double loss =
      critic::critic_objective(ccfg, params, real, fake, epsilons, lambda_gp, &grads, wasserstein);
  check_finite(loss, Errc::non_finite_loss, "critic loss is not finite");
  std::vector<double> g = flatten(grads);
  for (double& v : g) v = -v;  // ascend the objective
  std::vector<double> flat = flatten(params);
  adam_update(adam, flat, g, acfg);
  unflatten(flat, params);
  return loss;
}

Matrix fake_batch(const CircuitSpec& spec, const ParameterSet& params,
                  const std::vector<std::vector<double>>& noise, Backend backend, int max_bond) {
  Matrix out(noise.size(), std::size_t(spec.output_dim()));
  for (std::size_t b = 0; b < noise.size(); ++b) {
    std::vector<double> e;
    if (backend == Backend::statevector) {
      e = sv::expectations(spec, params, noise[b]);
    } else {
      mps::MpsState st = mps::mps_run(spec, params, noise[b], max_bond);
      e = mps::mps_expectations(st);
    }
    for (std::size_t i = 0; i < e.size(); ++i) out.at(b, i) = e[i];
  }
  return out;
}

sv::Gradient generator_gradient(const CircuitSpec& spec, const ParameterSet& params,
                                const critic::CriticConfig& ccfg,
                                const critic::CriticParameters& cparams,
                                const std::vector<std::vector<double>>& noise, Backend backend,
                                int max_bond, double* loss) {
  require(!noise.empty(), Errc::empty_input, "generator step needs at least one noise vector");
  const Matrix fake = fake_batch(spec, params, noise, backend, max_bond);
  critic::CriticTape tape = critic::forward(ccfg, cparams, fake);
  const std::vector<double> scores = tape.scores();
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= double(scores.size());
  check_finite(mean, Errc::non_finite_loss, "generator loss is not finite");
  if (loss != nullptr) *loss = mean;

  const std::vector<double> upstream(scores.size(), 1.0 / double(scores.size()));
  const critic::CriticGrads cg = critic::backward(tape, upstream);

  sv::Gradient total;
  total.theta.assign(params.theta.size(), 0.0);
  total.lambda.assign(params.lambda.size(), 0.0);
  for (std::size_t b = 0; b < noise.size(); ++b) {
    const sv::Gradient g =
        backend == Backend::statevector
            ? sv::gradient(spec, params, noise[b], cg.inputs.row(b))
            : mps::mps_gradient(spec, params, noise[b], cg.inputs.row(b), max_bond);
    for (std::size_t i = 0; i < total.theta.size(); ++i) total.theta[i] += g.theta[i];
    for (std::size_t i = 0; i < total.lambda.size(); ++i) total.lambda[i] += g.lambda[i];
  }
  return total;
}

Matrix eval_batch(const CircuitSpec& spec, const ParameterSet& params, const TrainConfig& cfg,
                  int epoch) {
  const rng::Stream ev =
      rng::Stream(cfg.seed).child("eval").child(std::uint64_t(epoch));
  std::vector<std::vector<double>> noise;
  noise.reserve(std::size_t(cfg.eval_rows));
  for (int b = 0; b < cfg.eval_rows; ++b)
    noise.push_back(sample_noise(spec, ev.child(std::uint64_t(b))));
  return fake_batch(spec, params, noise, cfg.backend, cfg.max_bond);
}

double generator_step(const CircuitSpec& spec, ParameterSet& params, AdamState& adam,
                      const AdamConfig& acfg, const critic::CriticConfig& ccfg,
                      const critic::CriticParameters& cparams,
                      const std::vector<std::vector<double>>& noise, Backend backend,
                      int max_bond) {
  double loss = 0.0;
  const sv::Gradient grad =
      generator_gradient(spec, params, ccfg, cparams, noise, backend, max_bond, &loss);
  std::vector<double> g = flatten(grad);
  for (double& v : g) v = -v;  // ascend mean D(fake)
  std::vector<double> flat = flatten(params);
  adam_update(adam, flat, g, acfg);
  unflatten(flat, params);
  return loss;
}

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,critic_loss,generator_loss,wasserstein_estimate,e_acf_id,e_acf_abs,e_lev,emd,"
         "wall_time\n";
  for (const TrainLogRow& r : rows) {
    out << r.epoch << "," << fmt_double(r.critic_loss) << "," << fmt_double(r.generator_loss)
        << "," << fmt_double(r.wasserstein) << "," << fmt_double(r.e_acf_id) << ","
        << fmt_double(r.e_acf_abs) << "," << fmt_double(r.e_lev) << "," << fmt_double(r.emd)
        << "," << fmt_double(r.wall_time) << "\n";
  }
  return out.str();
}

std::string TrainLog::to_csv_deterministic() const {
  std::ostringstream out;
  out << "epoch,critic_loss,generator_loss,wasserstein_estimate,e_acf_id,e_acf_abs,e_lev,emd\n";
  for (const TrainLogRow& r : rows) {
    out << r.epoch << "," << fmt_double(r.critic_loss) << "," << fmt_double(r.generator_loss)
        << "," << fmt_double(r.wasserstein) << "," << fmt_double(r.e_acf_id) << ","
        << fmt_double(r.e_acf_abs) << "," << fmt_double(r.e_lev) << "," << fmt_double(r.emd)
        << "\n";
  }
  return out.str();
}

std::string TrainLog::timing_csv() const {
  std::ostringstream out;
  out << "epoch,wall_time\n";
  for (const TrainLogRow& r : rows) out << r.epoch << "," << fmt_double(r.wall_time) << "\n";
  return out.str();
}

void save_checkpoint(const std::filesystem::path& dir, const CircuitSpec& spec,
                     const critic::CriticConfig& ccfg, const TrainState& state,
                     const Provenance& prov) {
  std::filesystem::create_directories(dir);

  std::ostringstream gen;
  gen << prov.header_block();
  gen << "generator_checkpoint 1\n";
  gen << "n_qubits " << spec.n_qubits << "\n";
  gen << "n_layers " << spec.n_layers << "\n";
  gen << "topology " << (spec.topology == Topology::ring ? "ring" : "chain") << "\n";
  gen << array_line("theta", state.gen_params.theta);
  gen << array_line("lambda", state.gen_params.lambda);
  write_text_file(dir / "generator.txt", gen.str());

  critic::save_parameters((dir / "critic.txt").string(), ccfg, state.critic_params);

  std::ostringstream opt;
  opt << "adam_state 1\n";
  opt << "gen_step " << state.gen_adam.step << "\n";
  opt << array_line("gen_m", state.gen_adam.m);
  opt << array_line("gen_v", state.gen_adam.v);
  opt << "critic_step " << state.critic_adam.step << "\n";
  opt << array_line("critic_m", state.critic_adam.m);
  opt << array_line("critic_v", state.critic_adam.v);
  write_text_file(dir / "optimizer.txt", opt.str());

  write_kv_file(dir / "state.txt", {{"format", "1"}, {"epoch", std::to_string(state.epoch)}});
}

TrainState load_checkpoint(const std::filesystem::path& dir, const CircuitSpec& spec,
                           const critic::CriticConfig& ccfg) {
  TrainState state;

  {
    std::istringstream in(read_text_file(dir / "generator.txt"));
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    }
    require(line == "generator_checkpoint 1", Errc::parse_error,
            "unrecognized generator checkpoint header");
    std::string key, value;
    in >> key >> value;
    require(key == "n_qubits" && std::stoi(value) == spec.n_qubits, Errc::config_error,
            "checkpoint qubit count does not match the circuit");
    in >> key >> value;
    require(key == "n_layers" && std::stoi(value) == spec.n_layers, Errc::config_error,
            "checkpoint layer count does not match the circuit");
    in >> key >> value;
    const std::string want = spec.topology == Topology::ring ? "ring" : "chain";
    require(key == "topology" && value == want, Errc::config_error,
            "checkpoint topology does not match the circuit");
    state.gen_params.theta = parse_array_line(in, "theta");
    state.gen_params.lambda = parse_array_line(in, "lambda");
    require(state.gen_params.theta.size() == std::size_t(spec.theta_count()) &&
                state.gen_params.lambda.size() == std::size_t(spec.lambda_count()),
            Errc::config_error, "checkpoint parameter counts do not match the circuit");
  }

  state.critic_params = critic::load_parameters((dir / "critic.txt").string(), ccfg);

  {
    std::istringstream in(read_text_file(dir / "optimizer.txt"));
    std::string header;
    std::getline(in, header);
    require(header == "adam_state 1", Errc::parse_error, "unrecognized optimizer header");
    std::string key;
    in >> key >> state.gen_adam.step;
    require(key == "gen_step", Errc::parse_error, "expected gen_step");
    state.gen_adam.m = parse_array_line(in, "gen_m");
    state.gen_adam.v = parse_array_line(in, "gen_v");
    in >> key >> state.critic_adam.step;
    require(key == "critic_step", Errc::parse_error, "expected critic_step");
    state.critic_adam.m = parse_array_line(in, "critic_m");
    state.critic_adam.v = parse_array_line(in, "critic_v");
    const std::size_t gen_n = state.gen_params.theta.size() + state.gen_params.lambda.size();
    require(state.gen_adam.m.size() == gen_n && state.gen_adam.v.size() == gen_n,
            Errc::config_error, "optimizer state does not match the generator");
    const std::size_t critic_n = std::size_t(ccfg.parameter_count());
    require(state.critic_adam.m.size() == critic_n && state.critic_adam.v.size() == critic_n,
            Errc::config_error, "optimizer state does not match the critic");
  }

  const auto kv = read_kv_file(dir / "state.txt");
  state.epoch = std::stoi(kv_lookup(kv, "epoch"));
  require(state.epoch >= 0, Errc::config_error, "checkpoint epoch must be >= 0");
  return state;
}

std::filesystem::path checkpoint_dir(const std::filesystem::path& out_dir, int epoch) {
  char name[32];
  std::snprintf(name, sizeof(name), "epoch_%06d", epoch);
  return out_dir / "checkpoints" / name;
}

int latest_checkpoint(const std::filesystem::path& out_dir) {
  const std::filesystem::path root = out_dir / "checkpoints";
  int best = 0;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(root, ec)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("epoch_", 0) != 0) continue;
    int epoch = 0;
    if (std::sscanf(name.c_str(), "epoch_%d", &epoch) == 1 && epoch > best) best = epoch;
  }
  return best;
}

TrainLog load_log(const std::filesystem::path& out_dir) {
  const auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };

  TrainLog log;
  {
    std::istringstream in(read_text_file(out_dir / "train_log.csv"));
    std::string line;
    bool saw_header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!saw_header) {
        require(line ==
                    "epoch,critic_loss,generator_loss,wasserstein_estimate,e_acf_id,e_acf_abs,"
                    "e_lev,emd",
                Errc::parse_error, "unrecognized train log header");
        saw_header = true;
        continue;
      }
      const std::vector<std::string> f = split(line);
      if (f.size() != 8) raise(Errc::parse_error, "train log row needs 8 fields", long(row));
      TrainLogRow r;
      r.epoch = int(parse_double(f[0], long(row)));
      r.critic_loss = parse_double(f[1], long(row));
      r.generator_loss = parse_double(f[2], long(row));
      r.wasserstein = parse_double(f[3], long(row));
      r.e_acf_id = parse_double(f[4], long(row));
      r.e_acf_abs = parse_double(f[5], long(row));
      r.e_lev = parse_double(f[6], long(row));
      r.emd = parse_double(f[7], long(row));
      log.rows.push_back(r);
      ++row;
    }
    require(saw_header, Errc::parse_error, "train log has no header row");
  }

  const std::filesystem::path timing = out_dir / "timing.csv";
  if (std::filesystem::exists(timing)) {
    std::istringstream in(read_text_file(timing));
    std::string line;
    std::getline(in, line);
    require(line == "epoch,wall_time", Errc::parse_error, "unrecognized timing header");
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<std::string> f = split(line);
      if (f.size() != 2) raise(Errc::parse_error, "timing row needs 2 fields", long(row));
      const int epoch = int(parse_double(f[0], long(row)));
      for (TrainLogRow& r : log.rows)
        if (r.epoch == epoch) r.wall_time = parse_double(f[1], long(row));
      ++row;
    }
  }
  return log;
}

namespace {

void write_logs(const std::filesystem::path& out_dir, const Provenance& prov,
                const TrainLog& log) {
  write_text_file(out_dir / "train_log.csv", prov.header_block() + log.to_csv_deterministic());
  write_text_file(out_dir / "timing.csv", log.timing_csv());
}

}  // namespace

TrainResult train(const WindowBatch& data, const CircuitSpec& spec,
                  const critic::CriticConfig& critic_cfg, const TrainConfig& cfg,
                  const TrainState* resume, const TrainLog* prior_log) {
  spec.validate();
  critic_cfg.validate();
  cfg.validate();
  require(data.samples.rows >= 1, Errc::empty_input, "training data has no windows");
  require(std::size_t(spec.output_dim()) == data.samples.cols, Errc::window_mismatch,
          "window length must equal 2 * n_qubits");
  require(std::size_t(critic_cfg.input_length) == data.samples.cols, Errc::shape_mismatch,
          "critic input length must equal the window length");
  require(cfg.tau_max < int(data.samples.cols), Errc::series_too_short,
          "tau_max must be smaller than the window");

  const rng::Stream root(cfg.seed);
  TrainState state;
  if (resume != nullptr) {
    state = *resume;
    require(state.epoch <= cfg.epochs, Errc::config_error,
            "checkpoint is beyond the configured epoch count");
  } else {
    state.gen_params = init_parameters(spec, root.child("theta_init"));
    state.critic_params = critic::init_parameters(critic_cfg, root.child("critic_init"));
    state.gen_adam =
        make_adam_state(state.gen_params.theta.size() + state.gen_params.lambda.size());
    state.critic_adam = make_adam_state(std::size_t(critic_cfg.parameter_count()));
    state.epoch = 0;
  }

  TrainLog log;
  if (prior_log != nullptr) {
    log = *prior_log;
    if (log.rows.size() > std::size_t(state.epoch)) log.rows.resize(std::size_t(state.epoch));
  }
  require(log.rows.size() == std::size_t(state.epoch), Errc::config_error,
          "prior log does not cover the checkpoint epoch");

  // Metrics compare in post-processed space; the reference side is the
  // training windows mapped back through the inverse pipeline.
  const Matrix real_post = postprocess(data.samples, data.stats, data.config);

  const bool writing = !cfg.out_dir.empty();
  if (writing) std::filesystem::create_directories(cfg.out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  auto seconds_since_start = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto noise_batch_for = [&](int epoch, int step, int count) {
    const rng::Stream ns =
        root.child("noise").child(std::uint64_t(epoch)).child(std::uint64_t(step));
    std::vector<std::vector<double>> noise;
    noise.reserve(std::size_t(count));
    for (int b = 0; b < count; ++b) noise.push_back(sample_noise(spec, ns.child(std::uint64_t(b))));
    return noise;
  };

  const int first_epoch = state.epoch + 1;
  for (int epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
    TrainLogRow row;
    row.epoch = epoch;

    for (int step = 1; step <= cfg.n_critic; ++step) {
      rng::Stream idx =
          root.child("minibatch").child(std::uint64_t(epoch)).child(std::uint64_t(step));
      Matrix real(std::size_t(cfg.batch_size), data.samples.cols);
      for (int b = 0; b < cfg.batch_size; ++b) {
        const std::size_t r = std::size_t(idx.below(data.samples.rows));
        for (std::size_t c = 0; c < data.samples.cols; ++c)
          real.at(std::size_t(b), c) = data.samples.at(r, c);
      }

      const auto noise = noise_batch_for(epoch, step, cfg.batch_size);
      const Matrix fake = fake_batch(spec, state.gen_params, noise, cfg.backend, cfg.max_bond);

      rng::Stream es = root.child("eps").child(std::uint64_t(epoch)).child(std::uint64_t(step));
      std::vector<double> epsilons(std::size_t(cfg.batch_size));
      for (double& e : epsilons) e = es.u01();

      row.critic_loss = critic_step(critic_cfg, state.critic_params, state.critic_adam, cfg.adam,
                                    real, fake, epsilons, cfg.lambda_gp, &row.wasserstein);
    }

    const auto gen_noise = noise_batch_for(epoch, cfg.n_critic + 1, cfg.batch_size);
    row.generator_loss =
        generator_step(spec, state.gen_params, state.gen_adam, cfg.adam, critic_cfg,
                       state.critic_params, gen_noise, cfg.backend, cfg.max_bond);

    {
      const Matrix gen_eval = eval_batch(spec, state.gen_params, cfg, epoch);
      const Matrix gen_post = postprocess(gen_eval, data.stats, data.config);
      const metrics::MetricsReport rep =
          metrics::stylized_fact_errors(real_post, gen_post, cfg.tau_max);
      row.e_acf_id = rep.e_acf_id;
      row.e_acf_abs = rep.e_acf_abs;
      row.e_lev = rep.e_lev;
      row.emd = rep.emd;
    }
    row.wall_time = seconds_since_start();
    for (double v : {row.critic_loss, row.generator_loss, row.wasserstein, row.e_acf_id,
                     row.e_acf_abs, row.e_lev, row.emd})
      check_finite(v, Errc::non_finite_loss, "non-finite value in the epoch log", epoch);
    log.rows.push_back(row);
    state.epoch = epoch;

    const bool stopping = cfg.stop_after_epoch > 0 && epoch == cfg.stop_after_epoch;
    const bool cadence = cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0;
    if (writing && (cadence || stopping || epoch == cfg.epochs)) {
      save_checkpoint(checkpoint_dir(cfg.out_dir, epoch), spec, critic_cfg, state,
                      cfg.provenance);
      write_logs(cfg.out_dir, cfg.provenance, log);
    }
    if (stopping) break;
  }

  if (writing) write_logs(cfg.out_dir, cfg.provenance, log);
  return TrainResult{std::move(state), std::move(log)};
}

}  // namespace qfgan::train
