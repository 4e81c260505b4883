#include "diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gdiff {

namespace {

void check_t(int t, const NoiseSchedule& s, const char* what) {
  if (t < 1 || t > s.steps())
    throw std::invalid_argument(std::string(what) + ": t = " + std::to_string(t) +
                                " outside [1, " + std::to_string(s.steps()) + "]");
}

}  // namespace

Tensor forward_step_gaussian(const Tensor& x_prev, int t, const NoiseSchedule& s, RngStream& rng) {
  check_t(t, s, "forward_step_gaussian");
  const double beta = s.beta_at(t);
  Tensor out = x_prev;
  for (auto& v : out.data) v = kernel::forward_step_gaussian(v, beta, rng.normal());
  return out;
}

Tensor forward_jump_gaussian(const Tensor& x0, int t, const NoiseSchedule& s, RngStream& rng) {
  check_t(t, s, "forward_jump_gaussian");
  const double abar = s.alpha_bar_at(t);
  Tensor out = x0;
  for (auto& v : out.data) v = kernel::forward_jump_gaussian(v, abar, rng.normal());
  return out;
}

Tensor forward_step_gamma(const Tensor& x_prev, int t, const NoiseSchedule& s,
                          const GammaParams& p, RngStream& rng) {
  check_t(t, s, "forward_step_gamma");
  const double beta = s.beta_at(t);
  const double k = p.k_at(t);
  const double theta = p.theta_at(t);
  Tensor out = x_prev;
  for (auto& v : out.data)
    v = kernel::forward_step_gamma(v, beta, k, theta, rng.gamma(k, theta));
  return out;
}

Tensor forward_jump_gamma(const Tensor& x0, int t, const NoiseSchedule& s, const GammaParams& p,
                          RngStream& rng) {
  check_t(t, s, "forward_jump_gamma");
  const double abar = s.alpha_bar_at(t);
  const double k_bar = p.k_bar_at(t);
  const double theta = p.theta_at(t);
  Tensor out = x0;
  for (auto& v : out.data)
    v = kernel::forward_jump_gamma(v, abar, k_bar, theta, rng.gamma(k_bar, theta));
  return out;
}

Tensor predict_x0(const Tensor& x_t, int t, const NoiseSchedule& s, const Tensor& eps_hat) {
  check_t(t, s, "predict_x0");
  if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("predict_x0: shape mismatch");
  const double abar = s.alpha_bar_at(t);
  Tensor out = x_t;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = kernel::predict_x0(x_t.data[i], abar, eps_hat.data[i]);
  return out;
}

double sigma_at(const NoiseSchedule& s, int t, SigmaMode mode) {
  if (mode == SigmaMode::kZero) return 0.0;
  const double beta = s.beta_at(t);
  return mode == SigmaMode::kSqrtBeta ? std::sqrt(beta) : beta;
}

Tensor reverse_step_ddpm(const Tensor& x_t, int t, const NoiseSchedule& s, const Tensor& eps_hat,
                         SigmaMode mode, RngStream& rng) {
  check_t(t, s, "reverse_step_ddpm");
  if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("reverse_step_ddpm: shape mismatch");
  const double alpha = s.alpha_at(t);
  const double abar = s.alpha_bar_at(t);
  Tensor out = x_t;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = kernel::reverse_mean(x_t.data[i], alpha, abar, eps_hat.data[i]);
  if (t > 1 && mode != SigmaMode::kZero) {
    const double sigma = sigma_at(s, t, mode);
    for (auto& v : out.data) v += sigma * rng.normal();
  }
  return out;
}

Tensor reverse_step_ddgm(const Tensor& x_t, int t, const NoiseSchedule& s, const GammaParams& p,
                         const Tensor& eps_hat, SigmaMode mode, RngStream& rng) {
  check_t(t, s, "reverse_step_ddgm");
  if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("reverse_step_ddgm: shape mismatch");
  const double alpha = s.alpha_at(t);
  const double abar = s.alpha_bar_at(t);
  Tensor out = x_t;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = kernel::reverse_mean(x_t.data[i], alpha, abar, eps_hat.data[i]);
  if (t > 1 && mode != SigmaMode::kZero) {
    const double sigma = sigma_at(s, t, mode);
    const double k_bar = p.k_bar_at(t - 1);
    const double theta = p.theta_at(t - 1);
    const double norm = std::sqrt(1.0 - abar);
    for (auto& v : out.data) {
      const double z = (rng.gamma(k_bar, theta) - k_bar * theta) / norm;
      v += sigma * z;
    }
  }
  return out;
}

Tensor reverse_step_ddim(const Tensor& x_t, int t, int t_prev, const NoiseSchedule& s,
                         const Tensor& eps_hat) {
  check_t(t, s, "reverse_step_ddim");
  if (t_prev < 0 || t_prev > t)
    throw std::invalid_argument("reverse_step_ddim: t_prev = " + std::to_string(t_prev) +
                                " outside [0, t]");
  if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("reverse_step_ddim: shape mismatch");
  const double abar_t = s.alpha_bar_at(t);
  const double abar_prev = s.alpha_bar_at(t_prev);
  Tensor out = x_t;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = kernel::ddim_update(x_t.data[i], abar_t, abar_prev, eps_hat.data[i]);
  return out;
}

namespace {

void validate_steps(const std::vector<int>& steps, int T) {
  if (steps.empty()) throw std::invalid_argument("sample_chain: empty step grid");
  if (steps.back() != T)
    throw std::invalid_argument("sample_chain: step grid must end at T = " + std::to_string(T));
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < 1 || steps[i] > T)
      throw std::invalid_argument("sample_chain: step outside [1, T]");
    if (i > 0 && steps[i] <= steps[i - 1])
      throw std::invalid_argument("sample_chain: step grid must be strictly increasing");
  }
}

bool want_label(const ChainConfig& cfg, int label) {
  if (!cfg.record_trace) return false;
  if (cfg.trace_at.empty()) return true;
  return std::find(cfg.trace_at.begin(), cfg.trace_at.end(), label) != cfg.trace_at.end();
}

void record(SampleTrace& trace, const ChainConfig& cfg, int label, const Tensor& state) {
  if (want_label(cfg, label)) {
    trace.t.push_back(label);
    trace.state.push_back(state);
  }
}

}  // namespace

ChainResult sample_chain(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                         const ChainConfig& cfg, std::int64_t n, std::int64_t dim,
                         RngStream& rng) {
  if (n < 1 || dim < 1) throw std::invalid_argument("sample_chain: n and dim must be positive");
  const int T = sched.steps();
  validate_steps(cfg.steps, T);
  const bool gamma_sampler = cfg.sampler == SamplerKind::kDdgm;
  const bool gamma_init = cfg.init == InitialState::kGamma;
  GammaParams params;
  if (gamma_sampler || gamma_init) {
    if (!(cfg.theta0 > 0.0))
      throw std::invalid_argument("sample_chain: theta0 required for gamma noise");
    params = gamma_params(sched, cfg.theta0);
  }

  ChainResult res;
  res.samples = Tensor::zeros({n, dim});
  auto& x = res.samples.data;

  // Initial state at t = T: unit-variance noise of the matching family.
  if (gamma_init) {
    const double k_bar = params.k_bar_at(T);
    const double theta = params.theta_at(T);
    const double scale = 1.0 / std::sqrt(k_bar * theta * theta);
    for (auto& v : x) v = (rng.gamma(k_bar, theta) - k_bar * theta) * scale;
  } else {
    for (auto& v : x) v = rng.normal();
  }
  record(res.trace, cfg, T, res.samples);

  std::vector<double> eps(x.size());
  const int nsteps = static_cast<int>(cfg.steps.size());

  if (cfg.sampler == SamplerKind::kDdim) {
    for (int j = nsteps - 1; j >= 0; --j) {
      const int t = cfg.steps[static_cast<std::size_t>(j)];
      const int t_prev = j > 0 ? cfg.steps[static_cast<std::size_t>(j - 1)] : 0;
      denoiser.eval_batch(x.data(), n, dim, t, eps.data());
      const double abar_t = sched.alpha_bar_at(t);
      const double abar_prev = sched.alpha_bar_at(t_prev);
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = kernel::ddim_update(x[i], abar_t, abar_prev, eps[i]);
      record(res.trace, cfg, t_prev, res.samples);
    }
    check_finite(res.samples, "sample_chain");
    return res;
  }

  // Ancestral (ddpm/ddgm). On a subsampled grid, run on the effective
  // schedule beta'_s = 1 - alpha_bar_{t_s} / alpha_bar_{t_{s-1}} whose
  // cumulative products recover alpha_bar at the grid points exactly.
  const bool full_grid = nsteps == T;
  NoiseSchedule sub;
  GammaParams sub_params;
  if (!full_grid) {
    std::vector<double> beta(static_cast<std::size_t>(nsteps));
    for (int s = 0; s < nsteps; ++s) {
      const int t = cfg.steps[static_cast<std::size_t>(s)];
      const int t_prev = s > 0 ? cfg.steps[static_cast<std::size_t>(s - 1)] : 0;
      beta[static_cast<std::size_t>(s)] =
          1.0 - sched.alpha_bar_at(t) / sched.alpha_bar_at(t_prev);
    }
    sub = schedule_from_betas(std::move(beta));
    if (gamma_sampler) sub_params = gamma_params(sub, cfg.theta0);
  }
  const NoiseSchedule& run = full_grid ? sched : sub;
  const GammaParams& run_params = full_grid ? params : sub_params;

  for (int s = nsteps; s >= 1; --s) {
    const int t_orig = cfg.steps[static_cast<std::size_t>(s - 1)];
    denoiser.eval_batch(x.data(), n, dim, t_orig, eps.data());
    const double alpha = run.alpha_at(s);
    const double abar = run.alpha_bar_at(s);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = kernel::reverse_mean(x[i], alpha, abar, eps[i]);
    if (s > 1 && cfg.sigma != SigmaMode::kZero) {
      const double sigma = sigma_at(run, s, cfg.sigma);
      if (gamma_sampler) {
        const double k_bar = run_params.k_bar_at(s - 1);
        const double theta = run_params.theta_at(s - 1);
        const double norm = std::sqrt(1.0 - abar);
        for (auto& v : x) v += sigma * (rng.gamma(k_bar, theta) - k_bar * theta) / norm;
      } else {
        for (auto& v : x) v += sigma * rng.normal();
      }
    }
    const int label = s > 1 ? cfg.steps[static_cast<std::size_t>(s - 2)] : 0;
    record(res.trace, cfg, label, res.samples);
  }
  check_finite(res.samples, "sample_chain");
  return res;
}

}  // namespace gdiff
