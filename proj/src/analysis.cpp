#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gamma_density.hpp"
#include "moments.hpp"

namespace gdiff {
namespace {

constexpr double kPi = 3.14159265358979323846;

double mse_against(const Histogram& h, const FitResult& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < h.centers.size(); ++i) {
    const double d = h.density[i] - fit_pdf(f, h.centers[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(h.centers.size());
}

struct MeanSd {
  double mean = 0.0, sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  const std::size_t n = v.size();
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(n);
  if (n < 2) return r;
  double acc = 0.0;
  for (double x : v) acc += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(acc / static_cast<double>(n - 1));
  return r;
}

}  // namespace

Tensor residual_noise(const Tensor& x0, const Tensor& x_t, int t, const NoiseSchedule& sched) {
  if (!x0.same_shape(x_t)) throw std::invalid_argument("residual_noise: shape mismatch");
  if (t < 1 || static_cast<std::int64_t>(t) > sched.steps()) {
    throw std::invalid_argument("residual_noise: t out of range: " + std::to_string(t));
  }
  const double abar = sched.alpha_bar_at(t);
  const double sqrt_abar = std::sqrt(abar);
  const double inv = 1.0 / std::sqrt(1.0 - abar);
  Tensor out = x0;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = (sqrt_abar * x0.data[i] - x_t.data[i]) * inv;
  }
  return out;
}

Histogram histogram(const std::vector<double>& samples, int bins) {
  if (bins < 2) throw std::invalid_argument("histogram: bins must be >= 2, got " + std::to_string(bins));
  if (samples.size() < 10) {
    throw std::invalid_argument("histogram: need at least 10 samples, got " + std::to_string(samples.size()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw std::invalid_argument("histogram: degenerate sample range");
  Histogram h;
  h.count = static_cast<std::int64_t>(samples.size());
  h.width = (hi - lo) / bins;
  h.centers.resize(static_cast<std::size_t>(bins));
  h.density.assign(static_cast<std::size_t>(bins), 0.0);
  for (int i = 0; i < bins; ++i) h.centers[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h.width;
  for (double x : samples) {
    int idx = static_cast<int>((x - lo) / h.width);
    if (idx >= bins) idx = bins - 1;
    if (idx < 0) idx = 0;
    h.density[static_cast<std::size_t>(idx)] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(h.count) * h.width);
  for (double& d : h.density) d *= norm;
  return h;
}

HistMoments histogram_moments(const Histogram& h) {
  HistMoments m;
  double wsum = 0.0;
  for (std::size_t i = 0; i < h.centers.size(); ++i) {
    const double w = h.density[i] * h.width;
    wsum += w;
    m.mean += w * h.centers[i];
  }
  m.mean /= wsum;
  double m2 = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < h.centers.size(); ++i) {
    const double w = h.density[i] * h.width / wsum;
    const double d = h.centers[i] - m.mean;
    m2 += w * d * d;
    m3 += w * d * d * d;
  }
  m.variance = m2;
  m.skewness = (m2 > 0.0) ? m3 / std::pow(m2, 1.5) : 0.0;
  return m;
}

double fit_pdf(const FitResult& f, double x) {
  if (f.family == FitFamily::kGaussian) {
    const double z = (x - f.mean) / f.stddev;
    return std::exp(-0.5 * z * z) / (f.stddev * std::sqrt(2.0 * kPi));
  }
  const double arg = f.reflected ? (f.loc - x) : (x - f.loc);
  if (arg <= 0.0) return 0.0;
  const double lg = log_gamma_density(arg, f.shape, f.scale);
  return (lg < -700.0) ? 0.0 : std::exp(lg);
}

FitResult fit_gaussian(const Histogram& h) {
  const HistMoments m = histogram_moments(h);
  if (!(m.variance > 0.0)) throw std::invalid_argument("fit_gaussian: zero variance histogram");
  FitResult f;
  f.family = FitFamily::kGaussian;
  f.mean = m.mean;
  f.stddev = std::sqrt(m.variance);
  f.mse = mse_against(h, f);
  return f;
}

FitResult fit_gamma(const Histogram& h) {
  const HistMoments m = histogram_moments(h);
  if (!(m.variance > 0.0)) throw std::invalid_argument("fit_gamma: zero variance histogram");
  FitResult f;
  f.family = FitFamily::kGamma;
  double skew = m.skewness;
  if (std::fabs(skew) < 1e-3) {
    f.near_gaussian_fallback = true;
    f.reflected = skew < 0.0;
    f.shape = 1e6;
  } else {
    f.reflected = skew < 0.0;
    const double s = std::fabs(skew);
    f.shape = 4.0 / (s * s);
  }
  f.scale = std::sqrt(m.variance / f.shape);
  const double offset = f.shape * f.scale;
  f.loc = f.reflected ? (m.mean + offset) : (m.mean - offset);
  f.mse = mse_against(h, f);
  return f;
}

std::vector<FitCurveRow> fit_error_curve_from_residuals(
    const std::vector<int>& t_grid,
    const std::vector<std::vector<std::vector<double>>>& residuals, int bins) {
  if (t_grid.empty()) throw std::invalid_argument("fit_error_curve: empty t grid");
  if (residuals.size() != t_grid.size()) {
    throw std::invalid_argument("fit_error_curve: residual batches do not match t grid");
  }
  std::vector<FitCurveRow> rows;
  rows.reserve(t_grid.size());
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    if (residuals[ti].empty()) throw std::invalid_argument("fit_error_curve: empty residual trace");
    std::vector<double> gauss_mse, gamma_mse;
    for (const std::vector<double>& batch : residuals[ti]) {
      const Histogram h = histogram(batch, bins);
      gauss_mse.push_back(fit_gaussian(h).mse);
      gamma_mse.push_back(fit_gamma(h).mse);
    }
    const MeanSd g = mean_sd(gauss_mse);
    const MeanSd gm = mean_sd(gamma_mse);
    rows.push_back({t_grid[ti], g.mean, g.sd, gm.mean, gm.sd});
  }
  return rows;
}

std::vector<FitCurveRow> fit_error_curve_synthetic(const NoiseSchedule& sched,
                                                   const GammaParams* gp,
                                                   const std::vector<int>& t_grid, int repeats,
                                                   std::int64_t samples, int bins,
                                                   const RngStream& rng) {
  if (repeats < 1) throw std::invalid_argument("fit_error_curve: repeats must be >= 1");
  if (samples < 10) throw std::invalid_argument("fit_error_curve: need at least 10 samples per repeat");
  std::vector<std::vector<std::vector<double>>> residuals(t_grid.size());
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const int t = t_grid[ti];
    if (t < 1 || static_cast<std::int64_t>(t) > sched.steps()) {
      throw std::invalid_argument("fit_error_curve: t out of range: " + std::to_string(t));
    }
    const double inv = 1.0 / std::sqrt(1.0 - sched.alpha_bar_at(t));
    residuals[ti].resize(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
      RngStream stream = rng.split(ti * 1000003ULL + static_cast<std::uint64_t>(r));
      std::vector<double>& batch = residuals[ti][static_cast<std::size_t>(r)];
      batch.resize(static_cast<std::size_t>(samples));
      if (gp != nullptr) {
        const double kbar = gp->k_bar_at(t);
        const double theta = gp->theta_at(t);
        const double shift = kbar * theta;
        for (double& v : batch) v = -(stream.gamma(kbar, theta) - shift) * inv;
      } else {
        for (double& v : batch) v = stream.normal();
      }
    }
  }
  return fit_error_curve_from_residuals(t_grid, residuals, bins);
}

}  // namespace gdiff
