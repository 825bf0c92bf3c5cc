#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>

namespace seqgen {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source.
///
/// The engine output of std::mt19937_64 is fixed by the standard; all
/// derived draws (bounded integers, reals, weighted choice) are computed
/// here rather than with <random> distributions, whose results differ
/// between standard library implementations.
class Rng {
 public:
  static constexpr std::string_view kId = "mt19937_64+splitmix64/1";

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent stream `stream` derived from `seed`; one per test case.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(seed) ^ splitmix64(stream * 0xd1b54a32d192ed03ULL + 1));
  }

  Rng split() { return Rng(next_u64()); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform in [lo, hi], both inclusive.
  std::int64_t int_in(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::int_in: empty range");
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == std::uint64_t(-1)) return static_cast<std::int64_t>(next_u64());
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool coin() { return (next_u64() >> 63) != 0; }

  std::int32_t int32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(next_u64() >> 32)); }

  /// Index chosen with probability proportional to its weight. Zero weights
  /// are never chosen. Throws if no weight is positive.
  std::size_t pick_weighted(std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w > 0 ? w : 0;
    if (!(total > 0)) throw std::invalid_argument("Rng::pick_weighted: no positive weight");
    const double target = unit() * total;
    double acc = 0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0)) continue;
      acc += weights[i];
      last = i;
      if (target < acc) return i;
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace seqgen
