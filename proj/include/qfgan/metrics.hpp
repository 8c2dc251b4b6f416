#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfgan/matrix.hpp"

// Stylized-fact metrics comparing generated return windows against reference
// windows: earth mover's distance between the pooled value distributions and
// RMS-aggregated autocorrelation curves (linear, absolute, leverage).
namespace qfgan::metrics {

enum class Transform { identity, absolute, square };

// Sample Pearson correlation. Raises LengthMismatch and ZeroVariance.
double corr(std::span<const double> x, std::span<const double> y);

// corr of transform(series[0..T-lag)) with series[lag..T); identity and
// absolute transform both slices, square transforms only the earlier slice
// (the leverage pairing: squared level leading raw return).
double autocorrelation(std::span<const double> series, int lag, Transform transform);

struct MetricsReport {
  double emd = 0.0;
  double e_acf_id = 0.0;
  double e_acf_abs = 0.0;
  double e_lev = 0.0;
  int tau_max = 0;
  double ci_halfwidth = 0.0;
  // Row-averaged per-lag curves, lags 1..tau_max.
  std::vector<double> ref_linear, ref_absolute, ref_leverage;
  std::vector<double> gen_linear, gen_absolute, gen_leverage;
  // Per-lag white-noise band 1.96/sqrt(rows * (window - lag)).
  std::vector<double> lag_ci;
};

// Per-lag correlations are computed within each sample row and averaged
// across rows (rows whose slices are exactly constant are skipped); the
// aggregate errors are the root-mean-square over lags 1..tau_max, with
// e_acf_id aggregating the generated linear curve itself and the other two
// aggregating reference-minus-generated differences. emd compares the two
// pooled value distributions.
MetricsReport stylized_fact_errors(const Matrix& reference, const Matrix& generated,
                                   int tau_max);

// Exact 1-D Wasserstein-1 distance between the empirical distributions:
// integral over quantile levels of |Q_a - Q_b|, evaluated by a sorted merge.
double emd_1d(std::span<const double> a, std::span<const double> b);

// The literal time-aligned mean absolute difference over lags 0..tau_max,
// kept for auditability next to the distributional emd_1d.
double aligned_mad(std::span<const double> a, std::span<const double> b, int tau_max);

// 1.96/sqrt(n): large-sample white-noise band for a sample autocorrelation.
double ci_halfwidth(long n_effective);

// RMS over lags 1..tau_max of ci_halfwidth(rows * (window - lag)); the
// aggregate band an RMS-aggregated white-noise autocorrelation stays below.
double white_noise_band(long rows, long window, int tau_max);

// Paired empirical quantiles at levels k/(count+1), k = 1..count, with
// linear interpolation between order statistics.
std::vector<std::pair<double, double>> qq_points(std::span<const double> a,
                                                 std::span<const double> b, int count);

struct Histogram {
  std::vector<double> edges;     // bins + 1 entries
  std::vector<double> density;   // bins entries; sum(density * width) = 1
};

Histogram pdf_histogram(std::span<const double> samples, int bins);

// Key-value JSON document with the scalar metrics.
std::string report_json(const MetricsReport& report);

enum class Side { reference, generated };

// One side's per-lag curves: lag,linear,absolute,leverage,ci.
std::string curves_csv(const MetricsReport& report, Side side);

}  // namespace qfgan::metrics
