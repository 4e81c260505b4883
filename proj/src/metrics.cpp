#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gdiff {
namespace {

double mixture1d_cdf(double x) {
  return 0.5 * normal_cdf((x + 1.0) / 0.1) + 0.5 * normal_cdf((x - 1.0) / 0.1);
}

// Type-1 empirical quantile of a sorted sample.
double empirical_quantile(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))) - 1;
  if (idx >= n) idx = n - 1;
  return sorted[idx];
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double mixture1d_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("mixture1d_quantile: q must be in (0, 1)");
  double lo = -3.0, hi = 3.0;
  for (int i = 0; i < 200 && mixture1d_cdf(lo) > q; ++i) lo -= 1.0;
  for (int i = 0; i < 200 && mixture1d_cdf(hi) < q; ++i) hi += 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mixture1d_cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

double wasserstein1_vs_mixture1d(std::vector<double> samples, int probes) {
  if (samples.size() < 2) throw std::invalid_argument("wasserstein1: need at least 2 samples");
  if (probes < 1) throw std::invalid_argument("wasserstein1: probes must be >= 1");
  std::sort(samples.begin(), samples.end());
  double acc = 0.0;
  for (int j = 0; j < probes; ++j) {
    const double q = (j + 0.5) / probes;
    acc += std::fabs(empirical_quantile(samples, q) - mixture1d_quantile(q));
  }
  return acc / probes;
}

double wasserstein1_empirical(std::vector<double> a, std::vector<double> b, int probes) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("wasserstein1: need at least 2 samples");
  if (probes < 1) throw std::invalid_argument("wasserstein1: probes must be >= 1");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (int j = 0; j < probes; ++j) {
    const double q = (j + 0.5) / probes;
    acc += std::fabs(empirical_quantile(a, q) - empirical_quantile(b, q));
  }
  return acc / probes;
}

double wasserstein1_marginal_mean(const Tensor& a, const Tensor& b, int probes) {
  if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[1] != b.shape[1]) {
    throw std::invalid_argument("wasserstein1_marginal_mean: want [n, dim] with shared dim");
  }
  const std::int64_t dim = a.shape[1];
  const std::int64_t na = a.shape[0], nb = b.shape[0];
  double acc = 0.0;
  std::vector<double> col_a(static_cast<std::size_t>(na)), col_b(static_cast<std::size_t>(nb));
  for (std::int64_t j = 0; j < dim; ++j) {
    for (std::int64_t i = 0; i < na; ++i) col_a[static_cast<std::size_t>(i)] = a.data[static_cast<std::size_t>(i * dim + j)];
    for (std::int64_t i = 0; i < nb; ++i) col_b[static_cast<std::size_t>(i)] = b.data[static_cast<std::size_t>(i * dim + j)];
    acc += wasserstein1_empirical(col_a, col_b, probes);
  }
  return acc / static_cast<double>(dim);
}

}  // namespace gdiff
