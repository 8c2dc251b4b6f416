#include "qfgan/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qfgan {

void PipelineConfig::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    raise(Errc::config_error, "delta must be finite and >= 0");
  if (!(clip_bound > 0.0) || !std::isfinite(clip_bound))
    raise(Errc::config_error, "clip_bound must be finite and > 0");
  if (window < 1) raise(Errc::config_error, "window must be >= 1");
  if (stride < 1) raise(Errc::config_error, "stride must be >= 1");
}

namespace {

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

// YYYY-MM-DD -> sortable integer; parse_error on malformed input.
long date_key(const std::string& d, long row) {
  auto bad = [&]() { raise(Errc::parse_error, "bad date '" + d + "'", row); };
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') bad();
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (d[i] < '0' || d[i] > '9') bad();
  long y = std::stol(d.substr(0, 4));
  long m = std::stol(d.substr(5, 2));
  long day = std::stol(d.substr(8, 2));
  if (m < 1 || m > 12 || day < 1 || day > 31) bad();
  return y * 10000 + m * 100 + day;
}

double parse_price(const std::string& tok, long row) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    raise(Errc::parse_error, "bad close '" + tok + "'", row);
  return v;
}

}  // namespace

PriceSeries load_price_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::missing_file, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) raise(Errc::parse_error, "empty file " + path.string());
  if (rtrim(line) != "date,close")
    raise(Errc::parse_error, "expected header 'date,close' in " + path.string());

  PriceSeries out;
  long row = 0;
  long prev_key = -1;
  while (std::getline(in, line)) {
    line = rtrim(line);
    if (line.empty()) continue;
    ++row;
    auto comma = line.find(',');
    if (comma == std::string::npos) raise(Errc::parse_error, "expected 'date,close'", row);
    std::string date = line.substr(0, comma);
    std::string tok = line.substr(comma + 1);
    long key = date_key(date, row);
    if (key <= prev_key) raise(Errc::non_monotone_date, "dates must strictly increase", row);
    prev_key = key;
    double price = parse_price(tok, row);
    if (!(price > 0.0)) raise(Errc::non_positive_price, "close must be > 0", row);
    out.dates.push_back(std::move(date));
    out.prices.push_back(price);
  }
  if (out.prices.empty()) raise(Errc::empty_input, "no data rows in " + path.string());
  return out;
}

ReturnSeries log_returns(const PriceSeries& series) {
  if (series.prices.size() < 2)
    raise(Errc::series_too_short, "need at least two prices for returns");
  ReturnSeries out;
  out.values.resize(series.prices.size() - 1);
  for (std::size_t t = 0; t + 1 < series.prices.size(); ++t) {
    double a = series.prices[t];
    double b = series.prices[t + 1];
    if (!(a > 0.0)) raise(Errc::non_positive_price, "close must be > 0", static_cast<long>(t + 1));
    if (!(b > 0.0)) raise(Errc::non_positive_price, "close must be > 0", static_cast<long>(t + 2));
    out.values[t] = std::log(b / a);
  }
  return out;
}

std::pair<ReturnSeries, NormStats> normalize(const ReturnSeries& series) {
  std::size_t n = series.values.size();
  if (n < 2) raise(Errc::series_too_short, "need at least two returns to normalize");
  double mean = 0.0;
  for (double v : series.values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : series.values) {
    double d = v - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  // Relative floor catches constant series whose deviations are pure roundoff.
  if (!(sd > 1e-12 * std::abs(mean)) || !std::isfinite(sd))
    raise(Errc::zero_variance, "returns have no spread");
  ReturnSeries out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = (series.values[i] - mean) / sd;
  return {std::move(out), NormStats{mean, sd}};
}

double lambert_w(double x) {
  if (!(x >= 0.0)) raise(Errc::negative_argument, "lambert_w domain is x >= 0 here");
  if (x == 0.0) return 0.0;
  // Seed: ln(1+x) is within ~20% on [0, e]; asymptotic form beyond.
  double w = x > 2.718281828459045
                 ? std::log(x) - std::log(std::log(x))
                 : std::log1p(x);
  for (int it = 0; it < 50; ++it) {
    double e = std::exp(w);
    double f = w * e - x;
    double denom = e * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-14 * std::max(std::abs(w), 1e-300)) break;
  }
  return w;
}

double lambert_gaussianize(double v, double delta) {
  if (delta < 0.0) raise(Errc::negative_argument, "delta must be >= 0");
  if (delta == 0.0 || v == 0.0) return v;
  double mag = std::sqrt(lambert_w(delta * v * v) / delta);
  return v < 0.0 ? -mag : mag;
}

double lambert_degaussianize(double w, double delta) {
  if (delta < 0.0) raise(Errc::negative_argument, "delta must be >= 0");
  return w * std::exp(0.5 * delta * w * w);
}

ReturnSeries clip_and_scale(const ReturnSeries& series, double bound) {
  if (!(bound > 0.0)) raise(Errc::config_error, "clip bound must be > 0");
  ReturnSeries out;
  out.values.resize(series.values.size());
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    double v = series.values[i];
    if (v > bound) v = bound;
    if (v < -bound) v = -bound;
    out.values[i] = v / bound;
  }
  return out;
}

Matrix rolling_window(const ReturnSeries& series, int window, int stride) {
  if (window < 1) raise(Errc::config_error, "window must be >= 1");
  if (stride < 1) raise(Errc::config_error, "stride must be >= 1");
  std::size_t t = series.values.size();
  std::size_t m = static_cast<std::size_t>(window);
  if (t < m) raise(Errc::series_too_short, "series shorter than window");
  std::size_t count = (t - m) / static_cast<std::size_t>(stride) + 1;
  Matrix out(count, m);
  for (std::size_t r = 0; r < count; ++r) {
    std::size_t start = r * static_cast<std::size_t>(stride);
    for (std::size_t c = 0; c < m; ++c) out.at(r, c) = series.values[start + c];
  }
  return out;
}

WindowBatch preprocess(const PriceSeries& series, const PipelineConfig& config) {
  config.validate();
  ReturnSeries returns = log_returns(series);
  auto [normed, stats] = normalize(returns);
  ReturnSeries gauss;
  gauss.values.resize(normed.values.size());
  for (std::size_t i = 0; i < normed.values.size(); ++i)
    gauss.values[i] = lambert_gaussianize(normed.values[i], config.delta);
  ReturnSeries scaled = clip_and_scale(gauss, config.clip_bound);
  WindowBatch batch;
  batch.samples = rolling_window(scaled, config.window, config.stride);
  batch.stats = stats;
  batch.config = config;
  return batch;
}

Matrix postprocess(const Matrix& generated, const NormStats& stats, const PipelineConfig& config) {
  config.validate();
  Matrix out(generated.rows, generated.cols);
  for (std::size_t i = 0; i < generated.data.size(); ++i) {
    double u = generated.data[i];
    if (!(u >= -1.0 && u <= 1.0))
      raise(Errc::out_of_range, "generated entry outside [-1, 1]", static_cast<long>(i));
    double w = u * config.clip_bound;
    double v = lambert_degaussianize(w, config.delta);
    out.data[i] = v * stats.std + stats.mean;
  }
  return out;
}

}  // namespace qfgan
