#pragma once

#include <complex>
#include <cstdint>

namespace petal {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: draw i is mix64(key + i·γ) with γ the 64-bit golden ratio.
/// Any draw is addressable without replaying its predecessors, and the stream is
/// bit-identical on every platform (integer arithmetic only up to the float conversion).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;
  /// Circular complex normal, each component N(0, 1/2), from one Box-Muller pair.
  std::complex<double> complex_normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seed for the (a, b) child of a base seed: base ⊕ mix64(mix64(a) + b).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace petal
