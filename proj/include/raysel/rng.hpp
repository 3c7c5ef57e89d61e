// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace raysel {

/// Deterministic random source. mt19937_64 output is fully specified by the
/// standard and all value mappings are explicit here, so a given seed yields
/// the same stream on every platform.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Index drawn from the discrete distribution given by `weights`
  /// (non-negative, positive sum). One uniform draw, cumulative scan.
  int discrete(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double r = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace raysel
