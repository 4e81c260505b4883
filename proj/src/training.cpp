#include "training.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace gdiff {
namespace {

// Fixed split keys under the run seed. Keys for per-step streams hang off
// kKeyBatch so adding a new top-level consumer never shifts existing draws.
constexpr std::uint64_t kKeyInit = 0;
constexpr std::uint64_t kKeyBatch = 1;

}  // namespace

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "gamma") return NoiseKind::kGamma;
  throw std::invalid_argument("unknown noise kind: " + name + " (expected gaussian or gamma)");
}

std::string noise_kind_to_string(NoiseKind kind) {
  return kind == NoiseKind::kGaussian ? "gaussian" : "gamma";
}

Tensor gamma_target(const Tensor& g_bar, int t, const GammaParams& gp, const NoiseSchedule& sched) {
  if (t < 1 || static_cast<std::int64_t>(t) > sched.steps()) {
    throw std::invalid_argument("gamma_target: t out of range: " + std::to_string(t));
  }
  const double shift = gp.k_bar_at(t) * gp.theta_at(t);
  const double inv = 1.0 / std::sqrt(1.0 - sched.alpha_bar_at(t));
  Tensor out = g_bar;
  for (double& v : out.data) v = (v - shift) * inv;
  return out;
}

void corrupt_and_target(RngStream& rng, NoiseKind noise, const NoiseSchedule& sched,
                        const GammaParams* gp, const double* x0, std::int64_t dim, int t,
                        double* x_t, double* target) {
  const double abar = sched.alpha_bar_at(t);
  const double sqrt_abar = std::sqrt(abar);
  const double sqrt_rem = std::sqrt(1.0 - abar);
  if (noise == NoiseKind::kGaussian) {
    for (std::int64_t i = 0; i < dim; ++i) {
      const double eps = rng.normal();
      x_t[i] = sqrt_abar * x0[i] + sqrt_rem * eps;
      target[i] = eps;
    }
    return;
  }
  if (gp == nullptr) throw std::invalid_argument("corrupt_and_target: gamma noise needs GammaParams");
  const double kbar = gp->k_bar_at(t);
  const double theta = gp->theta_at(t);
  for (std::int64_t i = 0; i < dim; ++i) {
    const double centered = rng.gamma(kbar, theta) - kbar * theta;
    x_t[i] = sqrt_abar * x0[i] + centered;
    target[i] = centered / sqrt_rem;
  }
}

std::vector<TrainRecord> train_loop(const TrainConfig& cfg, const Dataset& data,
                                    const NoiseSchedule& sched, const GammaParams* gp,
                                    ReferenceMlp& mlp) {
  if (cfg.steps < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw std::invalid_argument("train: lr must be positive");
  if (cfg.noise == NoiseKind::kGamma && gp == nullptr) {
    throw std::invalid_argument("train: gamma noise needs GammaParams");
  }
  const std::int64_t n = data.data.shape[0];
  const std::int64_t dim = data.data.shape[1];
  if (dim != mlp.data_dim()) throw std::invalid_argument("train: dataset dim does not match model");
  if (sched.steps() != mlp.steps()) throw std::invalid_argument("train: schedule length does not match model");
  const int T = static_cast<int>(sched.steps());

  const RngStream root(cfg.seed);
  const RngStream batches = root.split(kKeyBatch);

  std::vector<double> xb(static_cast<std::size_t>(cfg.batch) * dim);
  std::vector<double> tb(static_cast<std::size_t>(cfg.batch) * dim);
  std::vector<int> ts(static_cast<std::size_t>(cfg.batch));
  std::vector<double> grad;
  AdamState adam;
  std::vector<TrainRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.steps));

  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    const RngStream step_stream = batches.split(static_cast<std::uint64_t>(step));
    for (std::int64_t slot = 0; slot < cfg.batch; ++slot) {
      RngStream r = step_stream.split(static_cast<std::uint64_t>(slot));
      const std::int64_t idx = static_cast<std::int64_t>(r.uniform_int(static_cast<std::uint64_t>(n)));
      const int t = 1 + static_cast<int>(r.uniform_int(static_cast<std::uint64_t>(T)));
      ts[static_cast<std::size_t>(slot)] = t;
      const double* x0 = data.data.data.data() + idx * dim;
      corrupt_and_target(r, cfg.noise, sched, gp, x0, dim, t,
                         xb.data() + static_cast<std::size_t>(slot) * dim,
                         tb.data() + static_cast<std::size_t>(slot) * dim);
    }
    const double loss = mlp.loss_and_grad(xb.data(), ts.data(), tb.data(), cfg.batch, grad);
    if (!std::isfinite(loss)) {
      throw NumericError("train: non-finite loss at step " + std::to_string(step) + " (noise=" +
                         noise_kind_to_string(cfg.noise) + ", T=" + std::to_string(T) + ", batch=" +
                         std::to_string(cfg.batch) + ", lr=" + std::to_string(cfg.lr) + ", seed=" +
                         std::to_string(cfg.seed) + ")");
    }
    adam_step(mlp.mutable_parameters(), grad, adam, cfg.lr);
    records.push_back({step, loss});
  }
  return records;
}

TrainOutput train(const TrainConfig& cfg, const Dataset& data, const NoiseSchedule& sched) {
  const GammaParams* gp = nullptr;
  GammaParams params;
  if (cfg.noise == NoiseKind::kGamma) {
    params = gamma_params(sched, cfg.theta0);
    gp = &params;
  }
  const std::int64_t dim = data.data.shape.size() == 2 ? data.data.shape[1] : -1;
  if (dim < 1) throw std::invalid_argument("train: dataset must be [n, dim]");
  TrainOutput out{ReferenceMlp(static_cast<int>(dim), static_cast<int>(sched.steps())), {}};
  RngStream root(cfg.seed);
  RngStream init = root.split(kKeyInit);
  out.model.init_params(init);
  out.losses = train_loop(cfg, data, sched, gp, out.model);
  return out;
}

}  // namespace gdiff
