#include "moments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gdiff {

Moments empirical_moments(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("empirical_moments: need at least 2 samples");
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double s2 = 0.0, s3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    s2 += d * d;
    s3 += d * d * d;
  }
  Moments m;
  m.mean = mean;
  m.variance = s2 / (n - 1.0);
  const double m2 = s2 / n;
  if (m2 == 0.0) {
    m.skewness = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.skewness = (s3 / n) / (m2 * std::sqrt(m2));
  }
  return m;
}

CentralMoments central_moments(const double* xs, std::size_t n) {
  if (n < 2) throw std::invalid_argument("central_moments: need at least 2 samples");
  CentralMoments c;
  c.n = n;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += xs[i];
  c.mean = sum / static_cast<double>(n);
  double s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = xs[i] - c.mean;
    const double d2 = d * d;
    const double d3 = d2 * d;
    s2 += d2;
    s3 += d3;
    s4 += d2 * d2;
    s5 += d2 * d3;
    s6 += d3 * d3;
  }
  const double inv = 1.0 / static_cast<double>(n);
  c.m2 = s2 * inv;
  c.m3 = s3 * inv;
  c.m4 = s4 * inv;
  c.m5 = s5 * inv;
  c.m6 = s6 * inv;
  return c;
}

CentralMoments central_moments(const std::vector<double>& xs) {
  return central_moments(xs.data(), xs.size());
}

Estimate mean_estimate(const CentralMoments& c) {
  return {c.mean, std::sqrt(c.m2 / static_cast<double>(c.n))};
}

Estimate variance_estimate(const CentralMoments& c) {
  const double n = static_cast<double>(c.n);
  const double var_of_var = std::max(c.m4 - c.m2 * c.m2, 0.0) / n;
  return {c.m2 * n / (n - 1.0), std::sqrt(var_of_var)};
}

Estimate skewness_estimate(const CentralMoments& c) {
  const double n = static_cast<double>(c.n);
  if (c.m2 <= 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  const double g1 = c.m3 / (c.m2 * std::sqrt(c.m2));
  // Delta method over the joint asymptotics of (m2, m3).
  const double var_m3 = c.m6 - c.m3 * c.m3 - 6.0 * c.m2 * c.m4 + 9.0 * c.m2 * c.m2 * c.m2;
  const double var_m2 = c.m4 - c.m2 * c.m2;
  const double cov_23 = c.m5 - 4.0 * c.m2 * c.m3;
  const double d3 = std::pow(c.m2, -1.5);
  const double d2 = -1.5 * c.m3 * std::pow(c.m2, -2.5);
  double v = d3 * d3 * var_m3 + 2.0 * d3 * d2 * cov_23 + d2 * d2 * var_m2;
  v = std::max(v, 0.0) / n;
  return {g1, std::sqrt(v)};
}

bool estimates_agree(const Estimate& a, const Estimate& b, double n_se) {
  const double se = std::sqrt(a.se * a.se + b.se * b.se);
  return std::abs(a.value - b.value) <= n_se * se;
}

bool estimate_matches(const Estimate& a, double target, double n_se) {
  return std::abs(a.value - target) <= n_se * a.se;
}

}  // namespace gdiff
