#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "datasets.hpp"
#include "mlp.hpp"
#include "schedule.hpp"

namespace gdiff {

enum class NoiseKind { kGaussian, kGamma };

NoiseKind noise_kind_from_string(const std::string& name);
std::string noise_kind_to_string(NoiseKind kind);

struct TrainConfig {
  NoiseKind noise = NoiseKind::kGaussian;
  double theta0 = 0.001;  // gamma noise only
  std::int64_t steps = 1000;
  std::int64_t batch = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

struct TrainRecord {
  std::int64_t step = 0;  // 1-based
  double loss = 0.0;
};

// (g_bar - kbar_t theta_t) / sqrt(1 - abar_t): the normalized regression
// target for gamma noise. Zero mean and unit variance for draws from
// Gamma(kbar_t, theta_t), any schedule.
Tensor gamma_target(const Tensor& g_bar, int t, const GammaParams& gp, const NoiseSchedule& sched);

// Draws one corruption of x0 at timestep t and the matching regression
// target. Gaussian: x_t = sqrt(abar) x0 + sqrt(1-abar) eps with target eps.
// Gamma: x_t = sqrt(abar) x0 + (gbar - kbar*theta) with the same draw
// reused in the target (gbar - kbar*theta) / sqrt(1-abar).
void corrupt_and_target(RngStream& rng, NoiseKind noise, const NoiseSchedule& sched,
                        const GammaParams* gp, const double* x0, std::int64_t dim, int t,
                        double* x_t, double* target);

// One optimization pass over `mlp`. Minibatches are assembled from
// per-(step, slot) RNG splits of the seed, so results do not depend on the
// row order of `data` beyond its canonical sorted content. Throws
// NumericError naming the step if the loss ever goes non-finite.
std::vector<TrainRecord> train_loop(const TrainConfig& cfg, const Dataset& data,
                                    const NoiseSchedule& sched, const GammaParams* gp,
                                    ReferenceMlp& mlp);

struct TrainOutput {
  ReferenceMlp model;
  std::vector<TrainRecord> losses;
};

// Builds a fresh ReferenceMlp for the dataset, initializes it from the seed,
// and runs train_loop.
TrainOutput train(const TrainConfig& cfg, const Dataset& data, const NoiseSchedule& sched);

}  // namespace gdiff
