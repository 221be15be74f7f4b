#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace odmarl {

/// Deterministic random source. Every draw is implemented directly on top of
/// mt19937_64 output, not on std:: distributions, so streams are bit-identical
/// across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Exponential with mean 1.
  double exponential() { return -std::log1p(-uniform01()); }

  /// Uniform integer in [0, n). Rejection sampled to avoid modulo bias.
  int uniform_int(int n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t rem = (~std::uint64_t{0} % un + 1) % un;
    const std::uint64_t limit = ~std::uint64_t{0} - rem;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x > limit);
    return static_cast<int>(x % un);
  }

  /// Index drawn from (possibly unnormalized) nonnegative weights.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (target < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  /// State id drawn from a sparse (id, weight) row.
  int categorical(const std::vector<std::pair<int, double>>& row) {
    double total = 0.0;
    for (const auto& [id, w] : row) total += w;
    double target = uniform01() * total;
    double acc = 0.0;
    for (const auto& [id, w] : row) {
      acc += w;
      if (target < acc) return id;
    }
    return row.back().first;
  }

  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// One splitmix64 round; used to derive independent streams from a base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace odmarl
