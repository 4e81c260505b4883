#include "rng.hpp"

#include <cmath>
#include <stdexcept>

namespace gdiff {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  // SplitMix64 expansion of the seed into the xoshiro state.
  std::uint64_t z = seed;
  for (auto& s : s_) {
    z += kGolden;
    s = mix64(z);
  }
}

RngStream RngStream::split(std::uint64_t key) const {
  return RngStream(mix64(seed_ ^ (key + 1) * kGolden));
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

std::uint64_t RngStream::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_int: bound must be positive");
  // Rejection on the top incomplete block keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double RngStream::normal() {
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double RngStream::gamma(double k, double theta) {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("gamma: shape must be positive and finite");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("gamma: scale must be positive and finite");

  if (k < 1.0) {
    // Boost: X ~ Gamma(k+1), X * U^(1/k) ~ Gamma(k).
    const double g = gamma(k + 1.0, theta);
    return g * std::pow(uniform_pos(), 1.0 / k);
  }

  const double d = k - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * theta;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * theta;
  }
}

}  // namespace gdiff
