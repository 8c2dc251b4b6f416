#include "qfgan/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "qfgan/errors.hpp"
#include "qfgan/rng.hpp"

namespace qfgan {

ReturnSeries student_t_returns(int count, int nu, double scale, std::uint64_t seed) {
  if (count < 1) raise(Errc::config_error, "count must be >= 1");
  if (nu < 1) raise(Errc::config_error, "nu must be >= 1");
  rng::Stream s = rng::Stream(seed).child("student_t");
  ReturnSeries out;
  out.values.resize(static_cast<std::size_t>(count));
  for (double& v : out.values) v = scale * s.student_t(nu);
  return out;
}

PriceSeries prices_from_returns(const ReturnSeries& returns) {
  PriceSeries ps;
  std::size_t n = returns.values.size() + 1;
  ps.prices.resize(n);
  ps.dates.resize(n);
  double log_price = std::log(100.0);
  int year = 2000, month = 1, day = 1;
  char buf[40];
  for (std::size_t i = 0; i < n; ++i) {
    ps.prices[i] = std::exp(log_price);
    if (i + 1 < n) log_price += returns.values[i];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    ps.dates[i] = buf;
    if (++day > 28) {
      day = 1;
      if (++month > 12) {
        month = 1;
        ++year;
      }
    }
  }
  return ps;
}

PriceSeries student_t_prices(int num_returns, int nu, double scale, std::uint64_t seed) {
  return prices_from_returns(student_t_returns(num_returns, nu, scale, seed));
}

}  // namespace qfgan
