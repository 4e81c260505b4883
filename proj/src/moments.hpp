#pragma once

#include <cstddef>
#include <vector>

namespace gdiff {

// mean and unbiased variance; skewness is the third standardized central
// moment m3 / m2^(3/2) (population central moments). Skewness of a constant
// sample is NaN.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
};

Moments empirical_moments(const std::vector<double>& xs);

// Central moments m2..m6 (population, 1/n) plus mean; used for delta-method
// standard errors of Monte Carlo estimates.
struct CentralMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, m5 = 0.0, m6 = 0.0;
};

CentralMoments central_moments(const double* xs, std::size_t n);
CentralMoments central_moments(const std::vector<double>& xs);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Asymptotic SEs: mean -> sqrt(m2/n); variance -> sqrt((m4-m2^2)/n);
// skewness -> delta method over (m2, m3), reducing to sqrt(6/n) for a
// Gaussian sample.
Estimate mean_estimate(const CentralMoments& c);
Estimate variance_estimate(const CentralMoments& c);
Estimate skewness_estimate(const CentralMoments& c);

// |a.value - b.value| <= n_se * sqrt(a.se^2 + b.se^2)
bool estimates_agree(const Estimate& a, const Estimate& b, double n_se);
// |a.value - target| <= n_se * a.se
bool estimate_matches(const Estimate& a, double target, double n_se);

}  // namespace gdiff
