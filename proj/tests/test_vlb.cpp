#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gamma_density.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "tensor.hpp"
#include "vlb.hpp"

using namespace gdiff;

namespace {

struct ConsistentDraw {
  double x0 = 0.0, x_tm1 = 0.0, x_t = 0.0;
  double g_bar_tm1 = 0.0, g_t = 0.0, g_bar_t = 0.0;
};

// One forward realization through timestep t, keeping every intermediate so
// tests can compare reconstructed arguments against the raw draws.
ConsistentDraw draw_chain(RngStream& rng, int t, const GammaParams& gp,
                          const NoiseSchedule& s) {
  ConsistentDraw d;
  d.x0 = 2.0 * rng.uniform() - 1.0;
  d.g_bar_tm1 = rng.gamma(gp.k_bar_at(t - 1), gp.theta_at(t - 1));
  d.x_tm1 = std::sqrt(s.alpha_bar_at(t - 1)) * d.x0 +
            (d.g_bar_tm1 - gp.k_bar_at(t - 1) * gp.theta_at(t - 1));
  d.g_t = rng.gamma(gp.k_at(t), gp.theta_at(t));
  d.x_t = std::sqrt(1.0 - s.beta_at(t)) * d.x_tm1 + (d.g_t - gp.k_at(t) * gp.theta_at(t));
  d.g_bar_t = std::sqrt(1.0 - s.beta_at(t)) * d.g_bar_tm1 + d.g_t;
  return d;
}

}  // namespace

TEST_CASE("gamma log density: exponential special case") {
  // Gamma(1, 1) is Exp(1): log pdf at x = 1 is exactly -1.
  CHECK(log_gamma_density(1.0, 1.0, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("gamma log density: peaks at the mode") {
  const double k = 3.0, theta = 0.7;
  const double mode = (k - 1.0) * theta;
  const double at_mode = log_gamma_density(mode, k, theta);
  CHECK(at_mode > log_gamma_density(mode - 0.1, k, theta));
  CHECK(at_mode > log_gamma_density(mode + 0.1, k, theta));
}

TEST_CASE("gamma log density integrates to one") {
  const double k = 3.0, theta = 0.7;
  const double lo = 1e-9, hi = 40.0;
  const int steps = 40000;  // Simpson needs an even count
  const double h = (hi - lo) / steps;
  double acc = std::exp(log_gamma_density(lo, k, theta)) + std::exp(log_gamma_density(hi, k, theta));
  for (int i = 1; i < steps; ++i) {
    const double x = lo + h * i;
    acc += (i % 2 == 1 ? 4.0 : 2.0) * std::exp(log_gamma_density(x, k, theta));
  }
  acc *= h / 3.0;
  CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gamma log density: large-shape branch agrees with the direct formula") {
  const double theta = 0.003;
  for (double k : {2e4, 1e6}) {
    for (double frac : {0.9, 1.0, 1.1}) {
      const double x = k * theta * frac;
      // The naive formula cancels catastrophically at k = 1e6, so compare
      // absolutely at its achievable accuracy.
      const double direct = (k - 1.0) * std::log(x) - x / theta - std::lgamma(k) - k * std::log(theta);
      CHECK(std::abs(log_gamma_density(x, k, theta) - direct) < 1e-6);
    }
  }
}

TEST_CASE("reverse_terms reconstructs the raw draws") {
  const auto s = linear_schedule(100, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.1);
  RngStream rng(42);
  for (int t : {2, 50, 100}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto d = draw_chain(rng, t, gp, s);
      const auto rt = reverse_terms(d.x_tm1, d.x_t, d.x0, d.x0, t, gp, s);
      CHECK(std::abs(rt.x_t_shift - d.g_t) < 1e-12);
      CHECK(std::abs(rt.xbar_t - d.g_bar_t) < 1e-12);
      CHECK(std::abs(rt.xbar_tm1 - d.g_bar_tm1) < 1e-12);
      CHECK(rt.xhat_t == rt.xbar_t);
      CHECK(rt.xhat_tm1 == rt.xbar_tm1);
    }
  }
}

TEST_CASE("log ratio vanishes when the prediction is exact") {
  const auto s = linear_schedule(100, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.001);
  RngStream rng(7);
  const auto d = draw_chain(rng, 50, gp, s);
  CHECK(reverse_log_ratio_direct(d.x_tm1, d.x_t, d.x0, d.x0, 50, gp, s) == 0.0);
  CHECK(reverse_log_ratio_decomposed(d.x_tm1, d.x_t, d.x0, d.x0, 50, gp, s) == 0.0);
}

TEST_CASE("direct and decomposed log ratios agree") {
  const auto s = linear_schedule(500, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.001);
  RngStream rng(11);
  for (int t : {2, 50, 500}) {
    int done = 0;
    while (done < 25) {
      const auto d = draw_chain(rng, t, gp, s);
      const double offset = (rng.uniform() < 0.5 ? -0.1 : 0.1);
      const double x0_hat = d.x0 + offset;
      const auto rt = reverse_terms(d.x_tm1, d.x_t, d.x0, x0_hat, t, gp, s);
      if (!(rt.xhat_t > 0.0 && rt.xhat_tm1 > 0.0)) continue;
      const double a = reverse_log_ratio_direct(d.x_tm1, d.x_t, d.x0, x0_hat, t, gp, s);
      const double b = reverse_log_ratio_decomposed(d.x_tm1, d.x_t, d.x0, x0_hat, t, gp, s);
      CHECK(std::abs(a - b) <= 1e-10);
      ++done;
    }
  }
}

TEST_CASE("direct log ratio names a nonpositive argument") {
  const auto s = linear_schedule(100, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.1);
  RngStream rng(13);
  const int t = 2;
  const auto d = draw_chain(rng, t, gp, s);
  // Push x0_hat far enough that Xhat_t = -sqrt(abar_t) < 0.
  const double x0_hat =
      (d.x_t + gp.k_bar_at(t) * gp.theta_at(t)) / std::sqrt(s.alpha_bar_at(t)) + 1.0;
  CHECK_THROWS_AS(reverse_log_ratio_direct(d.x_tm1, d.x_t, d.x0, x0_hat, t, gp, s),
                  std::domain_error);
}

TEST_CASE("bound terms: linear parts meet their bounds with equality") {
  const auto s = linear_schedule(500, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.001);
  RngStream rng(17);
  for (int t : {2, 50, 500}) {
    int done = 0;
    while (done < 10) {
      const auto d = draw_chain(rng, t, gp, s);
      const double x0_hat = d.x0 + (rng.uniform() < 0.5 ? -0.2 : 0.2);
      const auto rt = reverse_terms(d.x_tm1, d.x_t, d.x0, x0_hat, t, gp, s);
      if (!(rt.xhat_t > 0.0 && rt.xhat_tm1 > 0.0)) continue;
      const auto rep = bound_terms(d.x_tm1, d.x_t, d.x0, x0_hat, t, gp, s);
      CHECK(std::abs(rep.linear_t.term - rep.linear_t.bound) <=
            1e-9 * std::max(1.0, rep.linear_t.bound));
      CHECK(std::abs(rep.linear_tm1.term - rep.linear_tm1.bound) <=
            1e-9 * std::max(1.0, rep.linear_tm1.bound));
      CHECK(rep.log_t.term <= rep.log_t.bound + 1e-12);
      CHECK(rep.log_tm1.term <= rep.log_tm1.bound + 1e-12);

      const double ub = l_upper_bound(d.x0, x0_hat, rep.constants);
      const double manual = (rep.constants.c1 + rep.constants.c2 +
                             rep.constants.c3 / rep.constants.g_bar_t +
                             rep.constants.c4 / rep.constants.g_bar_tm1) *
                            std::abs(d.x0 - x0_hat);
      CHECK(ub == doctest::Approx(manual).epsilon(1e-12));
      ++done;
    }
  }
}

TEST_CASE("upper bound grows with the prediction error") {
  const auto s = linear_schedule(100, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.001);
  RngStream rng(23);
  const int t = 50;
  const auto d = draw_chain(rng, t, gp, s);
  const auto small = bound_terms(d.x_tm1, d.x_t, d.x0, d.x0 + 0.05, t, gp, s);
  const auto large = bound_terms(d.x_tm1, d.x_t, d.x0, d.x0 + 0.2, t, gp, s);
  CHECK(l_upper_bound(d.x0, d.x0 + 0.2, large.constants) >
        l_upper_bound(d.x0, d.x0 + 0.05, small.constants));
}

TEST_CASE("wide-scale early timesteps do exclude some predictions") {
  const auto s = linear_schedule(100, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.1);
  RngStream rng(29);
  const int t = 2;
  int excluded = 0;
  for (int i = 0; i < 200; ++i) {
    const auto d = draw_chain(rng, t, gp, s);
    // Positive offsets shift the hatted arguments down toward the support
    // edge; negative offsets move them away, so both outcomes appear.
    const double offset = (i % 2 == 0) ? 0.3 : -0.3;
    const auto rt = reverse_terms(d.x_tm1, d.x_t, d.x0, d.x0 + offset, t, gp, s);
    if (!(rt.x_t_shift > 0.0 && rt.xbar_t > 0.0 && rt.xbar_tm1 > 0.0 && rt.xhat_t > 0.0 &&
          rt.xhat_tm1 > 0.0))
      ++excluded;
  }
  CHECK(excluded > 0);
  CHECK(excluded < 200);
}

TEST_CASE("loss identity residual is tiny") {
  const auto s = linear_schedule(1000, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.1);
  RngStream rng(31);
  for (int t : {1, 100, 1000}) {
    Tensor x0(Shape{16}, std::vector<double>(16));
    for (auto& v : x0.data) v = 6.0 * rng.uniform() - 3.0;
    const Tensor g_bar = sample_gamma(rng, gp.k_bar_at(t), gp.theta_at(t), Shape{16});
    const Tensor eps_hat = sample_normal(rng, Shape{16});
    CHECK(lemma2_identity_residual(x0, g_bar, eps_hat, t, gp, s) < 1e-10);
  }
}
