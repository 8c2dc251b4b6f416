#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace qfgan::rng {

// SplitMix64 finalizer (bijective). Used both as the generator step and to
// derive substream states, so every stream is a pure function of
// (seed, labels, indices) and never of how much any sibling has consumed.
constexpr std::uint64_t sm_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// FNV-1a over the label bytes.
constexpr std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(sm_mix(seed + kGolden)) {}

  Stream child(std::string_view label) const {
    return Stream(tag{}, sm_mix(state_ ^ hash_label(label)));
  }
  Stream child(std::uint64_t index) const {
    return Stream(tag{}, sm_mix(state_ ^ (index + kGolden)));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return sm_mix(state_);
  }

  // [0, 1), 53-bit resolution.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Unbiased enough for index sampling: multiply-high reduction.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller. Consumes exactly two words per call; no spare cached, so the
  // draw at position k depends only on the call sequence.
  double gaussian() {
    double u1 = 1.0 - u01();  // (0, 1]
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Student-t via z / sqrt(chi2_nu / nu); consumes nu + 1 gaussians.
  double student_t(int nu) {
    double z = gaussian();
    double chi2 = 0.0;
    for (int i = 0; i < nu; ++i) {
      double g = gaussian();
      chi2 += g * g;
    }
    return z / std::sqrt(chi2 / static_cast<double>(nu));
  }

 private:
  struct tag {};
  Stream(tag, std::uint64_t raw_state) : state_(raw_state) {}
  std::uint64_t state_;
};

}  // namespace qfgan::rng
