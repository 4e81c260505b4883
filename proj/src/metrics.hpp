#pragma once

#include <vector>

#include "tensor.hpp"

namespace gdiff {

// Standard normal CDF.
double normal_cdf(double z);

// Quantile of the two-component mixture 0.5 N(-1, 0.1^2) + 0.5 N(1, 0.1^2),
// solved by bisection. q in (0, 1).
double mixture1d_quantile(double q);

// W1 between an empirical sample and the mixture1d generating distribution,
// approximated on a midpoint quantile grid of `probes` points.
double wasserstein1_vs_mixture1d(std::vector<double> samples, int probes = 1024);

// W1 between two empirical 1-D samples via the same quantile grid.
double wasserstein1_empirical(std::vector<double> a, std::vector<double> b, int probes = 1024);

// Mean over dimensions of the per-dimension empirical W1. a, b are [n, dim]
// with a shared dim.
double wasserstein1_marginal_mean(const Tensor& a, const Tensor& b, int probes = 1024);

}  // namespace gdiff
