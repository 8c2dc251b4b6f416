#include "qfgan/par.hpp"

#include <atomic>
#include <thread>

namespace qfgan::par {

int hardware_threads() {
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  unsigned n = std::thread::hardware_concurrency();
  return n ? static_cast<int>(n) : 1;
#endif
}

namespace {
std::atomic<int> g_cap{0};  // 0 = hardware default
}

int max_threads() {
  int cap = g_cap.load(std::memory_order_relaxed);
  return cap > 0 ? cap : hardware_threads();
}

void set_max_threads(int n) { g_cap.store(n > 0 ? n : 0, std::memory_order_relaxed); }

}  // namespace qfgan::par
