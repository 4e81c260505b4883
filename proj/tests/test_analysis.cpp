#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "analysis.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "tensor.hpp"

using namespace gdiff;

TEST_CASE("histogram: density integrates to one") {
  RngStream rng(1);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = rng.normal();
  const auto h = histogram(xs, 64);
  REQUIRE(h.centers.size() == 64);
  REQUIRE(h.density.size() == 64);
  CHECK(h.count == 5000);
  double mass = 0.0;
  for (double d : h.density) mass += d * h.width;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram: input validation") {
  std::vector<double> few{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(histogram(few, 4), std::invalid_argument);
  std::vector<double> flat(100, 5.0);
  CHECK_THROWS_AS(histogram(flat, 4), std::invalid_argument);
  std::vector<double> ok(100);
  for (std::size_t i = 0; i < ok.size(); ++i) ok[i] = static_cast<double>(i);
  CHECK_THROWS_AS(histogram(ok, 1), std::invalid_argument);
}

TEST_CASE("histogram moments on a two-spike sample") {
  // Equal spikes at -1 and 1 with two bins put all mass at centers +-0.5.
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(-1.0);
    xs.push_back(1.0);
  }
  const auto h = histogram(xs, 2);
  const auto m = histogram_moments(h);
  CHECK(m.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.variance == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(m.skewness == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("gaussian fit recovers normal parameters") {
  RngStream rng(3);
  std::vector<double> xs(200000);
  for (auto& x : xs) x = 0.5 + 2.0 * rng.normal();
  const auto h = histogram(xs, 100);
  const auto fit = fit_gaussian(h);
  CHECK(fit.family == FitFamily::kGaussian);
  CHECK(std::abs(fit.mean - 0.5) < 0.05);
  CHECK(std::abs(fit.stddev - 2.0) < 0.05);
  CHECK(fit.mse < 1e-4);
  const double pi = std::acos(-1.0);
  CHECK(fit_pdf(fit, 0.5) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * pi))).epsilon(0.05));
}

TEST_CASE("gamma fit recovers shape, scale, and orientation") {
  RngStream rng(4);
  std::vector<double> xs(200000);
  for (auto& x : xs) x = rng.gamma(4.0, 1.0);
  const auto h = histogram(xs, 100);
  const auto fit = fit_gamma(h);
  CHECK(fit.family == FitFamily::kGamma);
  CHECK_FALSE(fit.reflected);
  CHECK_FALSE(fit.near_gaussian_fallback);
  CHECK(std::abs(fit.shape - 4.0) / 4.0 < 0.1);
  CHECK(std::abs(fit.scale - 1.0) < 0.1);
  CHECK(std::abs(fit.loc) < 0.3);

  // Skewed data: the matched gamma should beat the best gaussian.
  const auto gfit = fit_gaussian(h);
  CHECK(fit.mse < gfit.mse);

  std::vector<double> neg(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) neg[i] = -xs[i];
  const auto hneg = histogram(neg, 100);
  const auto rfit = fit_gamma(hneg);
  CHECK(rfit.reflected);
  CHECK(std::abs(rfit.shape - 4.0) / 4.0 < 0.1);
  CHECK(fit_pdf(rfit, -4.0) == doctest::Approx(fit_pdf(fit, 4.0)).epsilon(0.05));
}

TEST_CASE("symmetric data falls back to the near-gaussian gamma") {
  RngStream rng(5);
  std::vector<double> xs;
  xs.reserve(100000);
  for (int i = 0; i < 50000; ++i) {
    const double v = rng.normal();
    xs.push_back(v);
    xs.push_back(-v);  // exact symmetry forces zero sample skewness
  }
  const auto h = histogram(xs, 80);
  const auto fit = fit_gamma(h);
  CHECK(fit.near_gaussian_fallback);
  const auto gfit = fit_gaussian(h);
  for (double x : {-1.0, 0.0, 1.0})
    CHECK(fit_pdf(fit, x) == doctest::Approx(fit_pdf(gfit, x)).epsilon(0.02));
}

TEST_CASE("residual noise inverts the gaussian jump") {
  const auto s = linear_schedule(100, 1e-4, 0.02);
  RngStream rng(6);
  const Tensor x0(Shape{4}, {0.3, -0.8, 1.5, 0.0});
  const Tensor eps = sample_normal(rng, Shape{4});
  Tensor x_t = Tensor::zeros(Shape{4});
  const int t = 40;
  for (std::size_t i = 0; i < 4; ++i)
    x_t.data[i] = std::sqrt(s.alpha_bar_at(t)) * x0.data[i] +
                  std::sqrt(1.0 - s.alpha_bar_at(t)) * eps.data[i];
  const Tensor res = residual_noise(x0, x_t, t, s);
  for (std::size_t i = 0; i < 4; ++i) CHECK(res.data[i] == doctest::Approx(-eps.data[i]).epsilon(1e-12));
}

TEST_CASE("mixture quantiles and W1 sanity") {
  // Between the modes the CDF is flat to ~1e-17, so the median is only
  // identifiable up to the valley; the component medians are sharp.
  CHECK(std::abs(mixture1d_quantile(0.5)) < 0.7);
  CHECK(mixture1d_quantile(0.25) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(mixture1d_quantile(0.75) == doctest::Approx(1.0).epsilon(1e-6));

  RngStream rng(7);
  std::vector<double> good(100000), bad(100000);
  for (auto& v : good) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) + 0.1 * rng.normal();
  for (auto& v : bad) v = rng.normal();
  const double w_good = wasserstein1_vs_mixture1d(good);
  const double w_bad = wasserstein1_vs_mixture1d(bad);
  CHECK(w_good < 0.02);
  CHECK(w_bad > 0.3);

  std::vector<double> a(1000);
  for (auto& v : a) v = rng.normal();
  CHECK(wasserstein1_empirical(a, a) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("marginal W1 averages per-dimension transport") {
  RngStream rng(8);
  Tensor a = sample_normal(rng, Shape{2000, 2});
  Tensor b = a;
  for (std::int64_t i = 0; i < 2000; ++i) b.data[static_cast<std::size_t>(i * 2)] += 1.0;
  // Dim 0 shifted by exactly 1, dim 1 identical: mean marginal W1 is 0.5.
  CHECK(wasserstein1_marginal_mean(a, b) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("synthetic fit curves are well formed") {
  const auto s = linear_schedule(100, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.1);
  const std::vector<int> grid{10, 50, 100};
  RngStream rng(9);
  const auto rows = fit_error_curve_synthetic(s, &gp, grid, 3, 2000, 50, rng);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].t == grid[i]);
    CHECK(std::isfinite(rows[i].gaussian_mse_mean));
    CHECK(std::isfinite(rows[i].gamma_mse_mean));
    CHECK(rows[i].gaussian_mse_mean > 0.0);
    CHECK(rows[i].gamma_mse_mean > 0.0);
    CHECK(rows[i].gaussian_mse_sd >= 0.0);
    CHECK(rows[i].gamma_mse_sd >= 0.0);
  }

  // Caller-supplied residuals, one batch per (t, repeat).
  std::vector<std::vector<std::vector<double>>> res(2);
  for (int ti = 0; ti < 2; ++ti) {
    res[static_cast<std::size_t>(ti)].resize(2);
    for (int r = 0; r < 2; ++r) {
      auto& batch = res[static_cast<std::size_t>(ti)][static_cast<std::size_t>(r)];
      batch.resize(2000);
      for (auto& v : batch) v = rng.normal();
    }
  }
  const auto rows2 = fit_error_curve_from_residuals({5, 9}, res, 40);
  REQUIRE(rows2.size() == 2);
  CHECK(rows2[0].t == 5);
  CHECK(rows2[1].t == 9);
}
