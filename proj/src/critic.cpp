#include "qfgan/critic.hpp"

#include <cmath>
#include <sstream>

#include "qfgan/csvio.hpp"
#include "qfgan/errors.hpp"

namespace qfgan::critic {

namespace {

// Emits one parameter leaf per array in checkpoint order: conv stacks first
// (weight, bias), then the dense stack ending with the single output neuron.
std::vector<int> emit_parameters(ad::Tape& tape, const CriticConfig& cfg,
                                 const CriticParameters& params) {
  check_shapes(cfg, params);
  const auto plan = cfg.feature_plan();
  const auto widths = cfg.dense_plan();
  std::vector<int> ids;
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    const ConvSpec& c = cfg.conv_layers[i];
    ids.push_back(tape.leaf(ad::cube_shape(c.filters, plan[i].first, c.kernel), params.conv_w[i]));
    ids.push_back(tape.leaf(ad::vec_shape(c.filters), params.conv_b[i]));
  }
  long fan = plan.back().first * plan.back().second;
  for (std::size_t j = 0; j < widths.size(); ++j) {
    ids.push_back(tape.leaf(ad::mat_shape(widths[j], fan), params.dense_w[j]));
    ids.push_back(tape.leaf(ad::vec_shape(widths[j]), params.dense_b[j]));
    fan = widths[j];
  }
  return ids;
}

// Wires the network from an input leaf to the score vector, reusing the
// given parameter leaves so several passes can share one tape.
int emit_network(ad::Tape& tape, const CriticConfig& cfg,
                 const std::vector<int>& param_ids, int input_id) {
  const long B = tape.node(input_id).shape.d0;
  std::size_t next = 0;
  int h = input_id;
  if (!cfg.conv_layers.empty()) {
    int h3 = tape.reshape(h, ad::cube_shape(B, 1, cfg.input_length));
    for (const ConvSpec& c : cfg.conv_layers) {
      const int w = param_ids[next++];
      const int b = param_ids[next++];
      const int lin = tape.conv_fwd(h3, w, c.stride);
      const long Lo = tape.node(lin).shape.d2;
      h3 = tape.relu(tape.add(lin, tape.bcast_chan(b, B, Lo)));
    }
    const ad::Shape& s = tape.node(h3).shape;
    h = tape.reshape(h3, ad::mat_shape(B, s.d1 * s.d2));
  }
  const std::size_t n_dense = cfg.dense_layers.size() + 1;
  for (std::size_t j = 0; j < n_dense; ++j) {
    const int w = param_ids[next++];
    const int b = param_ids[next++];
    const long rows = tape.node(h).shape.d0;
    int y = tape.add(tape.matmul_nt(h, w), tape.bcast_rows(b, rows));
    h = j + 1 < n_dense ? tape.relu(y) : y;
  }
  return tape.reshape(h, ad::vec_shape(B));
}

CriticParameters pack_like(const CriticConfig& cfg,
                           const std::vector<std::vector<double>>& flat) {
  CriticParameters out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    out.conv_w.push_back(flat[next++]);
    out.conv_b.push_back(flat[next++]);
  }
  for (std::size_t j = 0; j < cfg.dense_layers.size() + 1; ++j) {
    out.dense_w.push_back(flat[next++]);
    out.dense_b.push_back(flat[next++]);
  }
  return out;
}

// Emits xhat scores plus the recorded input-gradient pass and returns the
// penalty node; shared by gradient_penalty and critic_objective.
int emit_penalty(ad::Tape& tape, const CriticConfig& cfg,
                 const std::vector<int>& param_ids, const Matrix& real,
                 const Matrix& fake, std::span<const double> epsilons,
                 double lambda_gp) {
  if (!real.same_shape(fake)) raise(Errc::shape_mismatch, "real and fake batches differ in shape");
  if (epsilons.size() != real.rows)
    raise(Errc::shape_mismatch, "one interpolation draw per sample required");
  const std::size_t B = real.rows, m = real.cols;
  std::vector<double> xhat(B * m);
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t c = 0; c < m; ++c)
      xhat[r * m + c] = epsilons[r] * real.at(r, c) + (1.0 - epsilons[r]) * fake.at(r, c);
  const int x = tape.leaf(ad::mat_shape(long(B), long(m)), xhat);
  const int scores = emit_network(tape, cfg, param_ids, x);
  std::vector<double> ones(B, 1.0);
  const int seed = tape.leaf(ad::vec_shape(long(B)), ones);
  const int wanted[] = {x};
  const int gx = backward_record(tape, scores, seed, wanted)[0];
  const int norm = tape.sqrt_guard(tape.row_sum(tape.mul(gx, gx)));
  const int dev = tape.add_const(norm, -1.0);
  return tape.scale(tape.mean_all(tape.mul(dev, dev)), lambda_gp);
}

}  // namespace

void CriticConfig::validate() const {
  if (input_length < 1) raise(Errc::shape_mismatch, "input length must be >= 1");
  long length = input_length;
  for (const ConvSpec& c : conv_layers) {
    if (c.filters < 1 || c.kernel < 1 || c.stride < 1)
      raise(Errc::shape_mismatch, "conv layer sizes must be >= 1");
    if (c.kernel > length) raise(Errc::shape_mismatch, "conv kernel longer than its input");
    length = (length - c.kernel) / c.stride + 1;
  }
  for (int w : dense_layers)
    if (w < 1) raise(Errc::shape_mismatch, "dense width must be >= 1");
}

std::vector<std::pair<long, long>> CriticConfig::feature_plan() const {
  validate();
  std::vector<std::pair<long, long>> plan{{1, input_length}};
  for (const ConvSpec& c : conv_layers) {
    const long length = (plan.back().second - c.kernel) / c.stride + 1;
    plan.emplace_back(c.filters, length);
  }
  return plan;
}

std::vector<long> CriticConfig::dense_plan() const {
  std::vector<long> widths(dense_layers.begin(), dense_layers.end());
  widths.push_back(1);
  return widths;
}

long CriticConfig::parameter_count() const {
  const auto plan = feature_plan();
  long total = 0;
  for (std::size_t i = 0; i < conv_layers.size(); ++i)
    total += long(conv_layers[i].filters) * (plan[i].first * conv_layers[i].kernel + 1);
  long fan = plan.back().first * plan.back().second;
  for (long w : dense_plan()) {
    total += w * (fan + 1);
    fan = w;
  }
  return total;
}

long CriticParameters::count() const {
  long total = 0;
  for (const auto& a : conv_w) total += long(a.size());
  for (const auto& a : conv_b) total += long(a.size());
  for (const auto& a : dense_w) total += long(a.size());
  for (const auto& a : dense_b) total += long(a.size());
  return total;
}

CriticParameters init_parameters(const CriticConfig& cfg, rng::Stream stream) {
  const auto plan = cfg.feature_plan();
  CriticParameters p;
  auto fill = [&stream](std::vector<double>& a, std::size_t n, long fan_in) {
    const double k = 1.0 / std::sqrt(double(fan_in));
    a.resize(n);
    for (double& x : a) x = stream.uniform(-k, k);
  };
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    const ConvSpec& c = cfg.conv_layers[i];
    const long fan = plan[i].first * c.kernel;
    p.conv_w.emplace_back();
    p.conv_b.emplace_back();
    fill(p.conv_w.back(), std::size_t(c.filters * plan[i].first * c.kernel), fan);
    fill(p.conv_b.back(), std::size_t(c.filters), fan);
  }
  long fan = plan.back().first * plan.back().second;
  for (long w : cfg.dense_plan()) {
    p.dense_w.emplace_back();
    p.dense_b.emplace_back();
    fill(p.dense_w.back(), std::size_t(w * fan), fan);
    fill(p.dense_b.back(), std::size_t(w), fan);
    fan = w;
  }
  return p;
}

void check_shapes(const CriticConfig& cfg, const CriticParameters& params) {
  const auto plan = cfg.feature_plan();
  const auto widths = cfg.dense_plan();
  if (params.conv_w.size() != cfg.conv_layers.size() ||
      params.conv_b.size() != cfg.conv_layers.size() ||
      params.dense_w.size() != widths.size() || params.dense_b.size() != widths.size())
    raise(Errc::shape_mismatch, "parameter layer count differs from config");
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    const ConvSpec& c = cfg.conv_layers[i];
    if (long(params.conv_w[i].size()) != c.filters * plan[i].first * c.kernel ||
        long(params.conv_b[i].size()) != c.filters)
      raise(Errc::shape_mismatch, "conv parameter sizes differ from config", long(i));
  }
  long fan = plan.back().first * plan.back().second;
  for (std::size_t j = 0; j < widths.size(); ++j) {
    if (long(params.dense_w[j].size()) != widths[j] * fan ||
        long(params.dense_b[j].size()) != widths[j])
      raise(Errc::shape_mismatch, "dense parameter sizes differ from config", long(j));
    fan = widths[j];
  }
  for (const auto* group : {&params.conv_w, &params.conv_b, &params.dense_w, &params.dense_b})
    for (const auto& a : *group)
      for (double v : a)
        if (!std::isfinite(v)) raise(Errc::shape_mismatch, "non-finite parameter value");
}

std::vector<double> CriticTape::scores() const {
  std::span<const double> v = tape.values(scores_id);
  return {v.begin(), v.end()};
}

CriticTape forward(const CriticConfig& cfg, const CriticParameters& params,
                   const Matrix& batch) {
  if (batch.cols != std::size_t(cfg.input_length))
    raise(Errc::shape_mismatch, "batch width differs from critic input length");
  if (batch.rows == 0) raise(Errc::empty_input, "empty batch");
  CriticTape t;
  t.param_ids = emit_parameters(t.tape, cfg, params);
  t.input_id = t.tape.leaf(ad::mat_shape(long(batch.rows), long(batch.cols)), batch.data);
  t.scores_id = emit_network(t.tape, cfg, t.param_ids, t.input_id);
  return t;
}

CriticGrads backward(CriticTape& t, std::span<const double> upstream) {
  if (t.consumed) raise(Errc::stale_tape, "tape already consumed by a backward pass");
  t.consumed = true;
  const ad::Shape in_shape = t.tape.node(t.input_id).shape;
  std::vector<int> wanted = t.param_ids;
  wanted.push_back(t.input_id);
  auto grads = backward_values(t.tape, t.scores_id, upstream, wanted);
  CriticGrads out;
  out.inputs = Matrix(std::size_t(in_shape.d0), std::size_t(in_shape.d1));
  out.inputs.data = std::move(grads.back());
  grads.pop_back();
  // Recover the config from the tape's leaf shapes to pack per layer.
  std::vector<std::vector<double>> flat(grads.begin(), grads.end());
  CriticParameters p;
  std::size_t next = 0;
  for (int id : t.param_ids) {
    const ad::Shape& s = t.tape.node(id).shape;
    if (s.rank == 3) p.conv_w.push_back(std::move(flat[next]));
    else if (s.rank == 2) p.dense_w.push_back(std::move(flat[next]));
    else if (p.dense_w.size() > p.dense_b.size()) p.dense_b.push_back(std::move(flat[next]));
    else p.conv_b.push_back(std::move(flat[next]));
    ++next;
  }
  out.params = std::move(p);
  return out;
}

double gradient_penalty(const CriticConfig& cfg, const CriticParameters& params,
                        const Matrix& real, const Matrix& fake,
                        std::span<const double> epsilons, double lambda_gp,
                        CriticParameters* param_grads) {
  ad::Tape tape;
  const std::vector<int> param_ids = emit_parameters(tape, cfg, params);
  const int pen = emit_penalty(tape, cfg, param_ids, real, fake, epsilons, lambda_gp);
  if (param_grads) {
    const double one = 1.0;
    auto grads = backward_values(tape, pen, std::span<const double>(&one, 1), param_ids);
    *param_grads = pack_like(cfg, grads);
  }
  return tape.values(pen)[0];
}

double critic_objective(const CriticConfig& cfg, const CriticParameters& params,
                        const Matrix& real, const Matrix& fake,
                        std::span<const double> epsilons, double lambda_gp,
                        CriticParameters* grads, double* wasserstein) {
  if (real.cols != std::size_t(cfg.input_length))
    raise(Errc::shape_mismatch, "batch width differs from critic input length");
  ad::Tape tape;
  const std::vector<int> param_ids = emit_parameters(tape, cfg, params);
  const int xr = tape.leaf(ad::mat_shape(long(real.rows), long(real.cols)), real.data);
  const int xf = tape.leaf(ad::mat_shape(long(fake.rows), long(fake.cols)), fake.data);
  const int mr = tape.mean_all(emit_network(tape, cfg, param_ids, xr));
  const int mf = tape.mean_all(emit_network(tape, cfg, param_ids, xf));
  const int pen = emit_penalty(tape, cfg, param_ids, real, fake, epsilons, lambda_gp);
  const int loss = tape.sub(tape.sub(mr, mf), pen);
  if (wasserstein) *wasserstein = tape.values(mr)[0] - tape.values(mf)[0];
  if (grads) {
    const double one = 1.0;
    auto g = backward_values(tape, loss, std::span<const double>(&one, 1), param_ids);
    *grads = pack_like(cfg, g);
  }
  return tape.values(loss)[0];
}

void save_parameters(const std::string& path, const CriticConfig& cfg,
                     const CriticParameters& params) {
  check_shapes(cfg, params);
  std::ostringstream out;
  out << "critic_checkpoint 1\n";
  out << "input_length " << cfg.input_length << "\n";
  out << "conv_layers " << cfg.conv_layers.size() << "\n";
  for (const ConvSpec& c : cfg.conv_layers)
    out << "conv " << c.filters << " " << c.kernel << " " << c.stride << "\n";
  out << "dense_layers " << cfg.dense_layers.size() << "\n";
  for (int w : cfg.dense_layers) out << "dense " << w << "\n";
  auto dump = [&out](const char* tag, std::size_t i, const std::vector<double>& a) {
    out << tag << " " << i;
    for (double v : a) out << " " << fmt_double(v);
    out << "\n";
  };
  for (std::size_t i = 0; i < params.conv_w.size(); ++i) {
    dump("conv_w", i, params.conv_w[i]);
    dump("conv_b", i, params.conv_b[i]);
  }
  for (std::size_t j = 0; j < params.dense_w.size(); ++j) {
    dump("dense_w", j, params.dense_w[j]);
    dump("dense_b", j, params.dense_b[j]);
  }
  write_text_file(path, out.str());
}

CriticParameters load_parameters(const std::string& path, const CriticConfig& cfg) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "critic_checkpoint 1")
    raise(Errc::parse_error, "not a critic checkpoint: " + path);
  CriticParameters p;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "input_length" || tag == "conv_layers" || tag == "dense_layers" ||
        tag == "conv" || tag == "dense" || tag.empty())
      continue;  // manifest lines; shapes are validated against cfg below
    std::vector<std::vector<double>>* group = nullptr;
    if (tag == "conv_w") group = &p.conv_w;
    else if (tag == "conv_b") group = &p.conv_b;
    else if (tag == "dense_w") group = &p.dense_w;
    else if (tag == "dense_b") group = &p.dense_b;
    else raise(Errc::parse_error, "unknown checkpoint line: " + tag, row);
    std::size_t index = 0;
    ls >> index;
    if (group->size() != index)
      raise(Errc::parse_error, "checkpoint arrays out of order", row);
    group->emplace_back();
    std::string token;
    while (ls >> token) group->back().push_back(parse_double(token, row));
  }
  check_shapes(cfg, p);
  return p;
}

}  // namespace qfgan::critic
