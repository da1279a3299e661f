#pragma once

#include "logicscore/util.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace logicscore {

// Deterministic, platform-stable RNG (splitmix64). std::mt19937 plus the
// standard distributions would not be byte-stable across standard libraries,
// and every seeded artifact here is part of a golden output.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, n), rejection-sampled so the distribution is exact
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) return 0;
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // k distinct indices drawn uniformly from [0, n), in draw order
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

private:
  std::uint64_t state_;
};

// Every random draw in the pipeline flows from one --seed through named
// sub-streams, so adding a consumer never perturbs the others.
inline Rng derive_stream(std::uint64_t seed, std::string_view name) {
  return Rng(seed ^ fnv1a64(name));
}

} // namespace logicscore
