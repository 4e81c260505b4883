#pragma once

#include <cmath>
#include <vector>

#include "schedule.hpp"
#include "tensor.hpp"

namespace gdiff {

// Scalar kernels. The tensor-level operations below map these elementwise;
// keeping them free functions lets tests drive limit cases (beta = 0, fixed
// noise) directly.
namespace kernel {

inline double forward_step_gaussian(double x_prev, double beta, double eps) {
  return std::sqrt(1.0 - beta) * x_prev + std::sqrt(beta) * eps;
}

inline double forward_jump_gaussian(double x0, double alpha_bar, double eps) {
  return std::sqrt(alpha_bar) * x0 + std::sqrt(1.0 - alpha_bar) * eps;
}

// g is a Gamma(k_t, theta_t) draw; the added noise is centered: g - k*theta.
inline double forward_step_gamma(double x_prev, double beta, double k, double theta, double g) {
  return std::sqrt(1.0 - beta) * x_prev + (g - k * theta);
}

// g_bar is a Gamma(k_bar_t, theta_t) draw.
inline double forward_jump_gamma(double x0, double alpha_bar, double k_bar, double theta,
                                 double g_bar) {
  return std::sqrt(alpha_bar) * x0 + (g_bar - k_bar * theta);
}

inline double predict_x0(double x_t, double alpha_bar, double eps_hat) {
  return (x_t - std::sqrt(1.0 - alpha_bar) * eps_hat) / std::sqrt(alpha_bar);
}

// Shared mean update of the ancestral reverse step (denominator sqrt(alpha_t)).
inline double reverse_mean(double x_t, double alpha, double alpha_bar, double eps_hat) {
  return (x_t - ((1.0 - alpha) / std::sqrt(1.0 - alpha_bar)) * eps_hat) / std::sqrt(alpha);
}

inline double ddim_update(double x_t, double alpha_bar_t, double alpha_bar_prev,
                          double eps_hat) {
  const double x0 = predict_x0(x_t, alpha_bar_t, eps_hat);
  return std::sqrt(alpha_bar_prev) * x0 + std::sqrt(1.0 - alpha_bar_prev) * eps_hat;
}

}  // namespace kernel

// Denoiser interface used by the reverse processes: predicts the noise for a
// batch of states (rows) at one timestep.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  // x: [n, dim] row-major; out: same layout.
  virtual void eval_batch(const double* x, std::int64_t n, std::int64_t dim, int t,
                          double* out) const = 0;
};

// Fixed zero prediction (useful as a smoke denoiser).
class ZeroPredictor : public NoisePredictor {
 public:
  void eval_batch(const double*, std::int64_t n, std::int64_t dim, int, double* out) const override {
    for (std::int64_t i = 0; i < n * dim; ++i) out[i] = 0.0;
  }
};

Tensor forward_step_gaussian(const Tensor& x_prev, int t, const NoiseSchedule& s, RngStream& rng);
Tensor forward_jump_gaussian(const Tensor& x0, int t, const NoiseSchedule& s, RngStream& rng);
Tensor forward_step_gamma(const Tensor& x_prev, int t, const NoiseSchedule& s,
                          const GammaParams& p, RngStream& rng);
Tensor forward_jump_gamma(const Tensor& x0, int t, const NoiseSchedule& s, const GammaParams& p,
                          RngStream& rng);

Tensor predict_x0(const Tensor& x_t, int t, const NoiseSchedule& s, const Tensor& eps_hat);

enum class SigmaMode { kSqrtBeta, kBeta, kZero };

double sigma_at(const NoiseSchedule& s, int t, SigmaMode mode);

// One ancestral reverse step. t = 1 adds no noise. For the Gamma variant the
// injected noise is z = (g - k_bar_{t-1} theta_{t-1}) / sqrt(1 - alpha_bar_t)
// with g ~ Gamma(k_bar_{t-1}, theta_{t-1}).
Tensor reverse_step_ddpm(const Tensor& x_t, int t, const NoiseSchedule& s, const Tensor& eps_hat,
                         SigmaMode mode, RngStream& rng);
Tensor reverse_step_ddgm(const Tensor& x_t, int t, const NoiseSchedule& s, const GammaParams& p,
                         const Tensor& eps_hat, SigmaMode mode, RngStream& rng);

// Deterministic DDIM update from t to t_prev (t_prev in [0, t]; equal steps
// are the identity map, alpha_bar_0 = 1).
Tensor reverse_step_ddim(const Tensor& x_t, int t, int t_prev, const NoiseSchedule& s,
                         const Tensor& eps_hat);

enum class SamplerKind { kDdpm, kDdgm, kDdim };
enum class InitialState { kGaussian, kGamma };

struct ChainConfig {
  SamplerKind sampler = SamplerKind::kDdpm;
  InitialState init = InitialState::kGaussian;
  SigmaMode sigma = SigmaMode::kSqrtBeta;
  std::vector<int> steps;  // strictly increasing, last == T
  bool record_trace = false;
  std::vector<int> trace_at;  // timestep labels to record; empty = every step
  double theta0 = 0.0;        // required for kDdgm / kGamma init
};

// Trace of intermediate states: for each recorded step, the timestep and the
// [n, dim] state after that step's update (plus the initial state at t = T).
struct SampleTrace {
  std::vector<int> t;
  std::vector<Tensor> state;
};

struct ChainResult {
  Tensor samples;  // [n, dim]
  SampleTrace trace;
};

// Runs n reverse chains of dimension dim, vectorized over one RNG stream.
// Ancestral samplers on a subsampled grid rebuild the effective schedule
// beta'_s = 1 - alpha_bar_{t_s}/alpha_bar_{t_{s-1}} (and its Gamma parameters
// at the same theta0); the denoiser is always fed the original timestep.
ChainResult sample_chain(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                         const ChainConfig& cfg, std::int64_t n, std::int64_t dim,
                         RngStream& rng);

}  // namespace gdiff
