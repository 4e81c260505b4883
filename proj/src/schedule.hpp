#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gdiff {

// Variance schedule beta_1..beta_T with the derived alpha_t = 1 - beta_t and
// alpha_bar_t = prod_{i<=t} alpha_i. Arrays are 0-indexed storage for the
// 1-based timestep t; use the *_at accessors. alpha_bar_at(0) == 1 by
// convention (the t=0 state is the data itself).
struct NoiseSchedule {
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  int steps() const { return static_cast<int>(beta.size()); }
  double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  double alpha_at(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar_at(int t) const {
    return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)];
  }
};

// Builds a schedule from raw betas, deriving and validating everything.
NoiseSchedule schedule_from_betas(std::vector<double> beta);

// Evenly interpolated betas from beta_start (exactly, at t=1) to beta_end
// (exactly, at t=T). T == 1 uses beta_start.
NoiseSchedule linear_schedule(int T, double beta_start, double beta_end);

// beta_t = beta_{t-1} + beta_{t-2}; errors if any beta reaches 1, naming the
// offending step.
NoiseSchedule fibonacci_schedule(int n, double beta1 = 1e-6, double beta2 = 1e-6);

// Per-step Gamma noise parameters: theta_t = sqrt(alpha_bar_t) * theta0,
// k_t = beta_t / (alpha_bar_t * theta0^2), k_bar_t = sum_{i<=t} k_i.
// These satisfy k_t theta_t^2 = beta_t and k_bar_t theta_t^2 = 1 - alpha_bar_t.
struct GammaParams {
  double theta0 = 0.0;
  std::vector<double> theta;
  std::vector<double> k;
  std::vector<double> k_bar;

  double theta_at(int t) const { return theta[static_cast<std::size_t>(t - 1)]; }
  double k_at(int t) const { return k[static_cast<std::size_t>(t - 1)]; }
  double k_bar_at(int t) const {
    return t == 0 ? 0.0 : k_bar[static_cast<std::size_t>(t - 1)];
  }
};

GammaParams gamma_params(const NoiseSchedule& sched, double theta0);

enum class SubsampleStrategy { kUniform, kQuadratic };

// n strictly increasing timesteps in [1, T] ending at T.
std::vector<int> subsample_timesteps(int T, int n, SubsampleStrategy strategy);

// JSON round trip: {"T":..., "beta":[...], "theta0":...} plus derived arrays
// for inspection. Loading reads T/beta/theta0 only and re-derives the rest.
std::string schedule_to_json(const NoiseSchedule& sched, double theta0);  // theta0 NaN -> omitted
struct LoadedSchedule {
  NoiseSchedule schedule;
  double theta0;  // NaN when absent
};
LoadedSchedule schedule_from_json(const std::string& text);

// FNV-1a over T and the raw beta bytes; stable identity for checkpoints.
std::string schedule_hash(const NoiseSchedule& sched);

}  // namespace gdiff
