#include "gamma_density.hpp"

#include <cmath>
#include <stdexcept>

namespace gdiff {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLargeShapeCutoff = 1e4;
}  // namespace

double stirling_error(double n) {
  if (n <= 0.0) throw std::invalid_argument("stirling_error: n must be positive");
  if (n < 16.0) return std::lgamma(n + 1.0) - ((n + 0.5) * std::log(n) - n + 0.5 * std::log(kTwoPi));
  const double n2 = n * n;
  // 1/(12n) - 1/(360n^3) + 1/(1260n^5) - 1/(1680n^7)
  return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * n2)) / n2) / n2) / n;
}

double bd0(double n, double y) {
  if (!(n > 0.0) || !(y > 0.0)) throw std::invalid_argument("bd0: arguments must be positive");
  if (std::abs(n - y) < 0.1 * (n + y)) {
    const double v = (n - y) / (n + y);
    double s = (n - y) * v;  // (n-y)^2/(n+y)
    double ej = 2.0 * n * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2.0 * j + 1.0);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return n * std::log(n / y) + y - n;
}

double log_gamma_density(double x, double k, double theta) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma_density: x must be positive");
  if (!(k > 0.0) || !std::isfinite(k))
    throw std::invalid_argument("log_gamma_density: shape must be positive and finite");
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("log_gamma_density: scale must be positive and finite");

  const double y = x / theta;
  if (k < kLargeShapeCutoff)
    return (k - 1.0) * std::log(x) - y - std::lgamma(k) - k * std::log(theta);

  const double n = k - 1.0;
  return -stirling_error(n) - bd0(n, y) - 0.5 * std::log(kTwoPi * n) - std::log(theta);
}

}  // namespace gdiff
