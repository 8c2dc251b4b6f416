#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qfgan::par {

int hardware_threads();

// Current thread cap, >= 1.
int max_threads();

// n <= 0 restores the hardware default.
void set_max_threads(int n);

// Parallel loop over [0, n). fn(i) must write only to slots owned by i, so
// scheduling can never change the result. Small n stays serial.
template <class F>
void for_index(std::ptrdiff_t n, F&& fn, std::ptrdiff_t grain = 256) {
#ifdef _OPENMP
  int t = max_threads();
  if (t > 1 && n >= 2 * grain) {
#pragma omp parallel for schedule(static) num_threads(t)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)grain;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

// Thread-count-invariant reduction: fixed 4096-element blocks are summed
// serially inside, block partials are combined in index order. The result is
// bit-identical for any thread count.
template <class F>
double block_sum(std::ptrdiff_t n, F&& fn) {
  constexpr std::ptrdiff_t kBlock = 4096;
  if (n <= kBlock) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) s += fn(i);
    return s;
  }
  std::ptrdiff_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(nb));
  for_index(
      nb,
      [&](std::ptrdiff_t b) {
        std::ptrdiff_t lo = b * kBlock;
        std::ptrdiff_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i) s += fn(i);
        partial[static_cast<std::size_t>(b)] = s;
      },
      1);
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace qfgan::par
