#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "diffusion.hpp"
#include "moments.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "tensor.hpp"

using namespace gdiff;

namespace {

// Predicts exactly the noise that a jump from the planted x0 would imply, so
// every reverse sampler run with zero injected noise must return x0.
class PlantedOracle : public NoisePredictor {
 public:
  PlantedOracle(Tensor x0, const NoiseSchedule& s) : x0_(std::move(x0)), sched_(&s) {}

  void eval_batch(const double* x, std::int64_t n, std::int64_t dim, int t,
                  double* out) const override {
    const double ab = sched_->alpha_bar_at(t);
    for (std::int64_t i = 0; i < n * dim; ++i)
      out[i] = (x[i] - std::sqrt(ab) * x0_.data[static_cast<std::size_t>(i)]) /
               std::sqrt(1.0 - ab);
  }

 private:
  Tensor x0_;
  const NoiseSchedule* sched_;
};

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace

TEST_CASE("kernels: jump and x0 prediction invert each other") {
  const double x0 = 0.8, ab = 0.37, eps = -1.3;
  const double x_t = kernel::forward_jump_gaussian(x0, ab, eps);
  CHECK(kernel::predict_x0(x_t, ab, eps) == doctest::Approx(x0).epsilon(1e-14));

  const double k_bar = 5.0, theta = 0.2;
  const double g_bar = 1.7;
  const double y_t = kernel::forward_jump_gamma(x0, ab, k_bar, theta, g_bar);
  const double eps_equiv = (g_bar - k_bar * theta) / std::sqrt(1.0 - ab);
  CHECK(kernel::predict_x0(y_t, ab, eps_equiv) == doctest::Approx(x0).epsilon(1e-14));
}

TEST_CASE("kernels: ddim with a constant prediction composes exactly") {
  const double c = 0.3, x = 1.9;
  const double ab_t = 0.2, ab_s = 0.5, ab_r = 0.9;
  const double two_step = kernel::ddim_update(kernel::ddim_update(x, ab_t, ab_s, c), ab_s, ab_r, c);
  const double one_step = kernel::ddim_update(x, ab_t, ab_r, c);
  CHECK(std::abs(two_step - one_step) < 1e-10);
  CHECK(kernel::ddim_update(x, ab_t, ab_t, c) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("sigma modes") {
  const auto s = linear_schedule(10, 0.01, 0.1);
  CHECK(sigma_at(s, 4, SigmaMode::kZero) == 0.0);
  CHECK(sigma_at(s, 4, SigmaMode::kSqrtBeta) == doctest::Approx(std::sqrt(s.beta_at(4))));
  CHECK(sigma_at(s, 4, SigmaMode::kBeta) == doctest::Approx(s.beta_at(4)));
}

TEST_CASE("reverse steps: t = 1 is deterministic, zero sigma matches the mean") {
  const auto s = linear_schedule(10, 0.01, 0.1);
  const auto gp = gamma_params(s, 0.1);
  const Tensor x_t(Shape{4, 2}, {0.3, -0.2, 1.1, 0.0, -0.7, 0.4, 2.0, -1.5});
  const Tensor eps = Tensor::full(Shape{4, 2}, 0.25);

  RngStream r1(1), r2(999);
  const auto a = reverse_step_ddpm(x_t, 1, s, eps, SigmaMode::kSqrtBeta, r1);
  const auto b = reverse_step_ddpm(x_t, 1, s, eps, SigmaMode::kSqrtBeta, r2);
  CHECK(max_abs_diff(a, b) == 0.0);

  RngStream r3(5);
  const auto c = reverse_step_ddpm(x_t, 7, s, eps, SigmaMode::kZero, r3);
  for (std::size_t i = 0; i < c.data.size(); ++i)
    CHECK(c.data[i] ==
          doctest::Approx(kernel::reverse_mean(x_t.data[i], s.alpha_at(7), s.alpha_bar_at(7),
                                               eps.data[i]))
              .epsilon(1e-14));

  RngStream r4(6), r5(7);
  const auto d = reverse_step_ddgm(x_t, 1, s, gp, eps, SigmaMode::kSqrtBeta, r4);
  const auto e = reverse_step_ddgm(x_t, 1, s, gp, eps, SigmaMode::kSqrtBeta, r5);
  CHECK(max_abs_diff(d, e) == 0.0);
}

TEST_CASE("reverse ddgm: injected noise has the ancestral variance") {
  const auto s = linear_schedule(10, 0.02, 0.2);
  const auto gp = gamma_params(s, 0.1);
  const int t = 5;
  const std::int64_t n = 200000;
  const Tensor x_t = Tensor::zeros(Shape{n, 1});
  const Tensor eps = Tensor::zeros(Shape{n, 1});
  RngStream rng(17);
  const auto out = reverse_step_ddgm(x_t, t, s, gp, eps, SigmaMode::kSqrtBeta, rng);

  const double sigma = std::sqrt(s.beta_at(t));
  const double noise_var =
      sigma * sigma * (1.0 - s.alpha_bar_at(t - 1)) / (1.0 - s.alpha_bar_at(t));
  const auto cm = central_moments(out.data);
  CHECK(estimate_matches(mean_estimate(cm), 0.0, 4.0));
  CHECK(estimate_matches(variance_estimate(cm), noise_var, 4.0));
}

TEST_CASE("sample_chain: planted oracle is recovered by every sampler") {
  const auto s = linear_schedule(40, 1e-4, 0.02);
  RngStream data_rng(3);
  Tensor x0(Shape{8, 2}, std::vector<double>(16));
  for (auto& v : x0.data) v = 2.0 * data_rng.uniform() - 1.0;
  const PlantedOracle oracle(x0, s);

  const std::vector<int> sub{5, 20, 40};
  struct Mode {
    SamplerKind sampler;
    std::vector<int> steps;
  };
  const std::vector<Mode> modes = {
      {SamplerKind::kDdpm, {}},
      {SamplerKind::kDdpm, sub},
      {SamplerKind::kDdgm, sub},
      {SamplerKind::kDdim, sub},
  };
  for (const auto& mode : modes) {
    ChainConfig cfg;
    cfg.sampler = mode.sampler;
    cfg.sigma = SigmaMode::kZero;
    cfg.steps = mode.steps;
    if (cfg.steps.empty())
      for (int t = 1; t <= 40; ++t) cfg.steps.push_back(t);
    if (mode.sampler == SamplerKind::kDdgm) {
      cfg.init = InitialState::kGamma;
      cfg.theta0 = 0.05;
    }
    RngStream rng(11);
    const auto res = sample_chain(oracle, s, cfg, 8, 2, rng);
    CHECK(max_abs_diff(res.samples, x0) < 1e-6);
  }
}

TEST_CASE("sample_chain: identical streams give identical chains") {
  const auto s = linear_schedule(30, 1e-3, 0.05);
  const ZeroPredictor zero;
  ChainConfig cfg;
  cfg.sampler = SamplerKind::kDdgm;
  cfg.init = InitialState::kGamma;
  cfg.theta0 = 0.1;
  cfg.steps = subsample_timesteps(30, 6, SubsampleStrategy::kQuadratic);
  RngStream r1 = RngStream(4).split(9);
  RngStream r2 = RngStream(4).split(9);
  const auto a = sample_chain(zero, s, cfg, 16, 3, r1);
  const auto b = sample_chain(zero, s, cfg, 16, 3, r2);
  CHECK(a.samples.data == b.samples.data);
  CHECK(a.samples.all_finite());
}

TEST_CASE("sample_chain: trace records requested labels") {
  const auto s = linear_schedule(40, 1e-4, 0.02);
  const ZeroPredictor zero;
  ChainConfig cfg;
  cfg.steps.clear();
  for (int t = 1; t <= 40; ++t) cfg.steps.push_back(t);
  cfg.record_trace = true;
  cfg.trace_at = {40, 17, 0};
  RngStream rng(8);
  const auto res = sample_chain(zero, s, cfg, 5, 2, rng);
  REQUIRE(res.trace.t.size() == 3);
  REQUIRE(res.trace.state.size() == 3);
  CHECK(res.trace.t[0] == 40);
  CHECK(res.trace.t[1] == 17);
  CHECK(res.trace.t[2] == 0);
  for (const auto& st : res.trace.state) {
    CHECK(st.shape == (Shape{5, 2}));
    CHECK(st.all_finite());
  }
  CHECK(res.trace.state[2].data == res.samples.data);
}

TEST_CASE("sample_chain: step grid validation") {
  const auto s = linear_schedule(40, 1e-4, 0.02);
  const ZeroPredictor zero;
  ChainConfig cfg;
  RngStream rng(1);

  cfg.steps = {5, 20};  // does not end at T
  CHECK_THROWS_AS(sample_chain(zero, s, cfg, 2, 1, rng), std::invalid_argument);
  cfg.steps = {};
  CHECK_THROWS_AS(sample_chain(zero, s, cfg, 2, 1, rng), std::invalid_argument);
  cfg.steps = {20, 20, 40};
  CHECK_THROWS_AS(sample_chain(zero, s, cfg, 2, 1, rng), std::invalid_argument);
  cfg.steps = {0, 40};
  CHECK_THROWS_AS(sample_chain(zero, s, cfg, 2, 1, rng), std::invalid_argument);

  cfg.steps = {40};
  cfg.sampler = SamplerKind::kDdgm;  // gamma without theta0
  CHECK_THROWS_AS(sample_chain(zero, s, cfg, 2, 1, rng), std::invalid_argument);
}
