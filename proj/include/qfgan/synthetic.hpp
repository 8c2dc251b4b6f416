#pragma once

#include <cstdint>

#include "qfgan/pipeline.hpp"

namespace qfgan {

// Heavy-tailed synthetic returns: scale * t_nu draws.
ReturnSeries student_t_returns(int count, int nu, double scale, std::uint64_t seed);

// Price path 100 * exp(cumsum(returns)) with synthetic increasing dates;
// produces count+1 prices so log_returns() recovers `returns` exactly.
PriceSeries prices_from_returns(const ReturnSeries& returns);

PriceSeries student_t_prices(int num_returns, int nu, double scale, std::uint64_t seed);

}  // namespace qfgan
