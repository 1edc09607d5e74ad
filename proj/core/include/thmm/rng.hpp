#pragma once

#include <cstdint>
#include <initializer_list>

namespace thmm {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Combines an ordered list of words into one seed. Used to derive
/// independent streams for replicates, grid cells and optimizer offspring.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// Standard normal quantile function. Acklam's rational approximation
/// refined by one Halley step against std::erfc; |error| < 1e-15 on (0,1).
double normal_quantile(double p);

/**
 * Counter-based pseudo random generator.
 *
 * The i-th output of stream (seed, stream) is a pure function of
 * (seed, stream, i), so generators can be split and replayed without
 * shared state. Gaussian variates go through normal_quantile, never
 * through a rejection method, so the number of words consumed per
 * variate is fixed at one.
 */
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal();

  /// Output at an arbitrary position without advancing.
  std::uint64_t at(std::uint64_t counter) const noexcept;

  std::uint64_t counter() const noexcept { return counter_; }
  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace thmm
