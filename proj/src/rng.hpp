#pragma once

#include <cstdint>

namespace gdiff {

// Deterministic random stream: xoshiro256++ core seeded through SplitMix64.
// The integer sequence is bit-exact everywhere; derived doubles are exact up
// to the platform's libm rounding (identical on a given platform/libm).
//
// Split rule: a stream remembers the seed it was created with. split(key)
// returns a fresh stream seeded with mix64(seed ^ (key + 1) * GOLDEN), where
// mix64 is the SplitMix64 finalizer and GOLDEN = 0x9E3779B97F4A7C15. Splits
// depend only on (seed, key), never on how much the parent has consumed, so
// e.g. chain i can always be handed split(i) regardless of draw order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream split(std::uint64_t key) const;
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1); redraws the (prob 2^-53) exact zero.
  double uniform_pos();
  // Unbiased integer in [0, bound); bound > 0.
  std::uint64_t uniform_int(std::uint64_t bound);

  // Standard normal via the Marsaglia polar method (spare value discarded).
  double normal();

  // Gamma(shape k, scale theta) via Marsaglia-Tsang squeeze rejection.
  // k < 1 uses the boost g ~ Gamma(k+1) * U^(1/k). Requires k > 0, theta > 0.
  double gamma(double k, double theta);

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
};

}  // namespace gdiff
