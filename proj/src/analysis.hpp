#pragma once

#include <cstdint>
#include <vector>

#include "rng.hpp"
#include "schedule.hpp"
#include "tensor.hpp"

namespace gdiff {

struct Histogram {
  std::vector<double> centers;
  std::vector<double> density;  // sums (times width) to 1
  std::int64_t count = 0;
  double width = 0.0;
};

enum class FitFamily { kGaussian, kGamma };

struct FitResult {
  FitFamily family = FitFamily::kGaussian;
  double mean = 0.0, stddev = 0.0;            // gaussian
  double shape = 0.0, scale = 0.0, loc = 0.0; // gamma: x = loc +/- Gamma(shape, scale)
  bool reflected = false;                     // gamma fitted on the negated axis
  bool near_gaussian_fallback = false;        // |skew| < 1e-3, shape clamped
  double mse = 0.0;                           // density vs fitted pdf at bin centers
};

// Implied noise at timestep t: (sqrt(abar_t) x0 - x_t) / sqrt(1 - abar_t).
// Recovers -eps for Gaussian jumps and -(g_bar - kbar theta)/sqrt(1-abar)
// for gamma jumps.
Tensor residual_noise(const Tensor& x0, const Tensor& x_t, int t, const NoiseSchedule& sched);

// Uniform bins spanning [min, max]. bins >= 2, at least 10 samples, and a
// nondegenerate range are required.
Histogram histogram(const std::vector<double>& samples, int bins);

// Weighted moments of the histogram itself (weights density*width).
struct HistMoments {
  double mean = 0.0, variance = 0.0, skewness = 0.0;
};
HistMoments histogram_moments(const Histogram& h);

FitResult fit_gaussian(const Histogram& h);

// Three-parameter moment matching: shape = 4/skew^2, scale = sqrt(var/shape),
// location = mean - shape*scale; negative skew fits the reflected axis.
// |skew| < 1e-3 clamps shape to 1e6 and flags the fallback.
FitResult fit_gamma(const Histogram& h);

// Fitted density of either family evaluated at x.
double fit_pdf(const FitResult& f, double x);

struct FitCurveRow {
  int t = 0;
  double gaussian_mse_mean = 0.0, gaussian_mse_sd = 0.0;
  double gamma_mse_mean = 0.0, gamma_mse_sd = 0.0;
};

// Fit-error comparison on synthetic residuals with known ground truth. When
// gp is non-null residuals are centered-gamma draws scaled to unit variance;
// otherwise standard normal. Per (t, repeat), `samples` residuals are
// histogrammed and both families fitted; rows aggregate mean and sd of the
// MSEs over repeats (sd 0 when repeats == 1).
std::vector<FitCurveRow> fit_error_curve_synthetic(const NoiseSchedule& sched,
                                                   const GammaParams* gp,
                                                   const std::vector<int>& t_grid, int repeats,
                                                   std::int64_t samples, int bins,
                                                   const RngStream& rng);

// Same aggregation for caller-supplied residual batches: residuals[t_index][repeat].
std::vector<FitCurveRow> fit_error_curve_from_residuals(
    const std::vector<int>& t_grid,
    const std::vector<std::vector<std::vector<double>>>& residuals, int bins);

}  // namespace gdiff
