#include "qfgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qfgan/csvio.hpp"
#include "qfgan/errors.hpp"

namespace qfgan::metrics {

namespace {

struct CorrValue {
  double value = 0.0;
  bool defined = false;  // false when either slice is exactly constant
};

CorrValue corr_checked(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {};
  return {sxy / std::sqrt(sxx * syy), true};
}

double transformed_autocorr(std::span<const double> series, int lag, Transform transform,
                            std::vector<double>& lead, std::vector<double>& trail) {
  const long T = long(series.size());
  if (lag < 1 || T <= lag + 1) raise(Errc::series_too_short, "need more points than lag + 1", T);
  const std::size_t n = std::size_t(T - lag);
  lead.resize(n);
  trail.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = series[i];
    switch (transform) {
      case Transform::identity: lead[i] = v; break;
      case Transform::absolute: lead[i] = std::abs(v); break;
      case Transform::square: lead[i] = v * v; break;
    }
    const double w = series[i + std::size_t(lag)];
    trail[i] = transform == Transform::absolute ? std::abs(w) : w;
  }
  const CorrValue c = corr_checked(lead, trail);
  if (!c.defined) raise(Errc::zero_variance, "constant slice has no correlation");
  return c.value;
}

// Average of within-row lag correlations across rows; rows with an exactly
// constant slice are skipped so one flat window cannot poison the curve.
double row_averaged(const Matrix& samples, int lag, Transform transform) {
  std::vector<double> lead, trail;
  double acc = 0.0;
  long used = 0;
  for (std::size_t r = 0; r < samples.rows; ++r) {
    std::span<const double> row = samples.row(r);
    const long T = long(row.size());
    const std::size_t n = std::size_t(T - lag);
    lead.resize(n);
    trail.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = row[i];
      switch (transform) {
        case Transform::identity: lead[i] = v; break;
        case Transform::absolute: lead[i] = std::abs(v); break;
        case Transform::square: lead[i] = v * v; break;
      }
      const double w = row[i + std::size_t(lag)];
      trail[i] = transform == Transform::absolute ? std::abs(w) : w;
    }
    const CorrValue c = corr_checked(lead, trail);
    if (c.defined) {
      acc += c.value;
      ++used;
    }
  }
  if (used == 0) raise(Errc::zero_variance, "every row is constant at this lag", lag);
  return acc / double(used);
}

double rms(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / double(v.size()));
}

}  // namespace

double corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    raise(Errc::length_mismatch, "correlation needs equal lengths", long(y.size()));
  if (x.size() < 2) raise(Errc::series_too_short, "correlation needs at least 2 points");
  const CorrValue c = corr_checked(x, y);
  if (!c.defined) raise(Errc::zero_variance, "constant series has no correlation");
  return c.value;
}

double autocorrelation(std::span<const double> series, int lag, Transform transform) {
  std::vector<double> lead, trail;
  return transformed_autocorr(series, lag, transform, lead, trail);
}

MetricsReport stylized_fact_errors(const Matrix& reference, const Matrix& generated,
                                   int tau_max) {
  if (reference.rows == 0 || generated.rows == 0)
    raise(Errc::empty_input, "need at least one sample row on each side");
  if (reference.cols != generated.cols)
    raise(Errc::window_mismatch, "reference and generated window lengths differ",
          long(generated.cols));
  const long window = long(reference.cols);
  if (tau_max < 1 || window <= tau_max)
    raise(Errc::series_too_short, "window must exceed tau_max", window);

  MetricsReport rep;
  rep.tau_max = tau_max;
  for (int lag = 1; lag <= tau_max; ++lag) {
    rep.ref_linear.push_back(row_averaged(reference, lag, Transform::identity));
    rep.ref_absolute.push_back(row_averaged(reference, lag, Transform::absolute));
    rep.ref_leverage.push_back(row_averaged(reference, lag, Transform::square));
    rep.gen_linear.push_back(row_averaged(generated, lag, Transform::identity));
    rep.gen_absolute.push_back(row_averaged(generated, lag, Transform::absolute));
    rep.gen_leverage.push_back(row_averaged(generated, lag, Transform::square));
    rep.lag_ci.push_back(ci_halfwidth(long(generated.rows) * (window - lag)));
  }
  rep.e_acf_id = rms(rep.gen_linear);
  std::vector<double> diff(std::size_t(tau_max), 0.0);
  for (int t = 0; t < tau_max; ++t)
    diff[std::size_t(t)] = rep.ref_absolute[std::size_t(t)] - rep.gen_absolute[std::size_t(t)];
  rep.e_acf_abs = rms(diff);
  for (int t = 0; t < tau_max; ++t)
    diff[std::size_t(t)] = rep.ref_leverage[std::size_t(t)] - rep.gen_leverage[std::size_t(t)];
  rep.e_lev = rms(diff);
  rep.emd = emd_1d(reference.data, generated.data);
  rep.ci_halfwidth = ci_halfwidth(long(generated.rows) * (window - 1));
  return rep;
}

double emd_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) raise(Errc::empty_input, "empty sample set");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = double(sa.size()), nb = double(sb.size());
  // Piecewise-constant quantile functions; integrate |Q_a - Q_b| between
  // consecutive breakpoints i/na and j/nb.
  double acc = 0.0, u = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double ua = double(i + 1) / na;
    const double ub = double(j + 1) / nb;
    const double end = std::min(ua, ub);
    acc += (end - u) * std::abs(sa[i] - sb[j]);
    u = end;
    if (ua <= end) ++i;
    if (ub <= end) ++j;
  }
  return acc;
}

double aligned_mad(std::span<const double> a, std::span<const double> b, int tau_max) {
  if (a.empty() || b.empty()) raise(Errc::empty_input, "empty sample set");
  if (tau_max < 0 || a.size() <= std::size_t(tau_max) || b.size() <= std::size_t(tau_max))
    raise(Errc::series_too_short, "need tau_max + 1 aligned points", tau_max);
  double acc = 0.0;
  for (int t = 0; t <= tau_max; ++t) acc += std::abs(a[std::size_t(t)] - b[std::size_t(t)]);
  return acc / double(tau_max + 1);
}

double ci_halfwidth(long n_effective) {
  if (n_effective < 2) raise(Errc::series_too_short, "band needs n >= 2", n_effective);
  return 1.96 / std::sqrt(double(n_effective));
}

double white_noise_band(long rows, long window, int tau_max) {
  if (tau_max < 1 || window <= tau_max)
    raise(Errc::series_too_short, "window must exceed tau_max", window);
  double acc = 0.0;
  for (int lag = 1; lag <= tau_max; ++lag) {
    const double h = ci_halfwidth(rows * (window - lag));
    acc += h * h;
  }
  return std::sqrt(acc / double(tau_max));
}

namespace {

double quantile_linear(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * double(n - 1);
  const std::size_t lo = std::size_t(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - double(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

std::vector<std::pair<double, double>> qq_points(std::span<const double> a,
                                                 std::span<const double> b, int count) {
  if (a.empty() || b.empty()) raise(Errc::empty_input, "empty sample set");
  if (count < 2) raise(Errc::series_too_short, "need at least 2 quantile levels", count);
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(std::size_t(count));
  for (int k = 1; k <= count; ++k) {
    const double p = double(k) / double(count + 1);
    out.emplace_back(quantile_linear(sa, p), quantile_linear(sb, p));
  }
  return out;
}

Histogram pdf_histogram(std::span<const double> samples, int bins) {
  if (samples.empty()) raise(Errc::empty_input, "empty sample set");
  if (bins < 2) raise(Errc::series_too_short, "need at least 2 bins", bins);
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(std::size_t(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges[std::size_t(i)] = lo + (hi - lo) * double(i) / double(bins);
  h.density.assign(std::size_t(bins), 0.0);
  const double width = (hi - lo) / double(bins);
  for (double v : samples) {
    long idx = long((v - lo) / width);
    idx = std::clamp(idx, 0L, long(bins) - 1);
    h.density[std::size_t(idx)] += 1.0;
  }
  const double norm = 1.0 / (double(samples.size()) * width);
  for (double& d : h.density) d *= norm;
  return h;
}

std::string report_json(const MetricsReport& rep) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"emd\": " << fmt_double(rep.emd) << ",\n";
  out << "  \"e_acf_id\": " << fmt_double(rep.e_acf_id) << ",\n";
  out << "  \"e_acf_abs\": " << fmt_double(rep.e_acf_abs) << ",\n";
  out << "  \"e_lev\": " << fmt_double(rep.e_lev) << ",\n";
  out << "  \"tau_max\": " << rep.tau_max << ",\n";
  out << "  \"ci_halfwidth\": " << fmt_double(rep.ci_halfwidth) << "\n";
  out << "}\n";
  return out.str();
}

std::string curves_csv(const MetricsReport& rep, Side side) {
  const bool gen = side == Side::generated;
  std::ostringstream out;
  out << "lag,linear,absolute,leverage,ci\n";
  for (int t = 0; t < rep.tau_max; ++t) {
    const auto i = std::size_t(t);
    out << (t + 1) << "," << fmt_double(gen ? rep.gen_linear[i] : rep.ref_linear[i]) << ","
        << fmt_double(gen ? rep.gen_absolute[i] : rep.ref_absolute[i]) << ","
        << fmt_double(gen ? rep.gen_leverage[i] : rep.ref_leverage[i]) << ","
        << fmt_double(rep.lag_ci[i]) << "\n";
  }
  return out.str();
}

}  // namespace qfgan::metrics
