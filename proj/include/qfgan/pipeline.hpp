#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qfgan/matrix.hpp"

namespace qfgan {

struct PriceSeries {
  std::vector<std::string> dates;  // ISO YYYY-MM-DD, strictly increasing
  std::vector<double> prices;     // strictly positive
};

struct ReturnSeries {
  std::vector<double> values;
};

struct NormStats {
  double mean = 0.0;
  double std = 1.0;  // sample standard deviation, N-1 denominator
};

struct PipelineConfig {
  double delta = 0.5;      // gaussianization strength, 0 disables
  double clip_bound = 4.0;  // post-gaussianization clip, > 0
  int window = 20;
  int stride = 5;

  void validate() const;
};

// Windowed training samples plus everything needed to invert the transform.
struct WindowBatch {
  Matrix samples;  // num_windows x window, entries in [-1, 1]
  NormStats stats;
  PipelineConfig config;
};

// CSV with header "date,close". Rows are validated: positive close
// (non_positive_price at the 1-based data row), strictly increasing dates
// (non_monotone_date at the offending row).
PriceSeries load_price_csv(const std::filesystem::path& path);

// r_t = ln(S_{t+1} / S_t); needs at least two prices.
ReturnSeries log_returns(const PriceSeries& series);

// Zero-mean, unit sample std. Fails with zero_variance when std is not
// positive and finite.
std::pair<ReturnSeries, NormStats> normalize(const ReturnSeries& series);

// Principal branch on x >= 0, Halley iteration, relative tolerance 1e-14,
// at most 50 steps.
double lambert_w(double x);

// W_delta(v) = sgn(v) * sqrt(W(delta v^2) / delta); identity when delta == 0.
double lambert_gaussianize(double v, double delta);

// Inverse: w * exp(delta/2 * w^2).
double lambert_degaussianize(double w, double delta);

// Clip to [-bound, bound], then divide by bound. Output is inside [-1, 1].
ReturnSeries clip_and_scale(const ReturnSeries& series, double bound);

// One window per row, starts spaced by stride; count = (T - window)/stride + 1.
Matrix rolling_window(const ReturnSeries& series, int window, int stride);

// Full forward transform: returns -> normalize -> gaussianize -> clip/scale
// -> windows.
WindowBatch preprocess(const PriceSeries& series, const PipelineConfig& config);

// Inverse transform for generated samples in [-1, 1] (out_of_range with the
// flat element position otherwise): unscale, degaussianize, denormalize.
Matrix postprocess(const Matrix& generated, const NormStats& stats, const PipelineConfig& config);

}  // namespace qfgan
