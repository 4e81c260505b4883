#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "schedule.hpp"

using namespace gdiff;

namespace {

// Independent alpha_bar: accumulate log(1 - beta) in extended precision.
double alpha_bar_oracle(const NoiseSchedule& s, int t) {
  long double acc = 0.0L;
  for (int i = 1; i <= t; ++i) acc += std::log1p(static_cast<long double>(-s.beta_at(i)));
  return static_cast<double>(std::exp(acc));
}

}  // namespace

TEST_CASE("linear schedule hits both endpoints exactly") {
  const auto s = linear_schedule(1000, 1e-4, 0.02);
  CHECK(s.steps() == 1000);
  CHECK(s.beta_at(1) == 1e-4);
  CHECK(s.beta_at(1000) == 0.02);
  for (int t = 2; t <= 1000; ++t) CHECK(s.beta_at(t) > s.beta_at(t - 1));
  for (int t = 1; t <= 1000; ++t) CHECK(s.alpha_at(t) == 1.0 - s.beta_at(t));
}

TEST_CASE("alpha_bar matches a log-space oracle") {
  const auto s = linear_schedule(1000, 1e-4, 0.02);
  CHECK(s.alpha_bar_at(0) == 1.0);
  for (int t : {1, 2, 10, 100, 500, 1000}) {
    const double oracle = alpha_bar_oracle(s, t);
    CHECK(std::abs(s.alpha_bar_at(t) - oracle) <= 1e-12 * oracle);
  }
}

TEST_CASE("fibonacci schedule grows by addition") {
  const auto s = fibonacci_schedule(25);
  CHECK(s.steps() == 25);
  CHECK(s.beta_at(1) == 1e-6);
  CHECK(s.beta_at(2) == 1e-6);
  for (int t = 3; t <= 25; ++t)
    CHECK(s.beta_at(t) == doctest::Approx(s.beta_at(t - 1) + s.beta_at(t - 2)).epsilon(1e-15));
  // The 25th Fibonacci number is 75025.
  CHECK(s.beta_at(25) == doctest::Approx(75025e-6).epsilon(1e-9));
}

TEST_CASE("fibonacci schedule refuses beta >= 1") {
  CHECK_NOTHROW(fibonacci_schedule(30));  // F(30) = 832040 -> beta 0.83
  CHECK_THROWS_AS(fibonacci_schedule(31), std::invalid_argument);
}

TEST_CASE("schedule rejects invalid betas") {
  CHECK_THROWS_AS(linear_schedule(0, 1e-4, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(linear_schedule(10, 0.02, 1e-4), std::invalid_argument);
  CHECK_THROWS_AS(schedule_from_betas({0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(schedule_from_betas({0.0}), std::invalid_argument);
  CHECK_THROWS_AS(schedule_from_betas({-0.1}), std::invalid_argument);
}

TEST_CASE("gamma params: first-step shape at theta0 = 0.001") {
  const auto s = linear_schedule(1000, 1e-4, 0.02);
  const auto gp = gamma_params(s, 0.001);
  // k_1 = beta_1 / (alpha_bar_1 * theta0^2) = 1e-4 / (0.9999 * 1e-6)
  CHECK(gp.k_at(1) == doctest::Approx(1e-4 / (0.9999 * 1e-6)).epsilon(1e-12));
  CHECK(gp.theta_at(1) == doctest::Approx(std::sqrt(0.9999) * 0.001).epsilon(1e-12));
  CHECK(gp.k_bar_at(0) == 0.0);
  CHECK(gp.k_bar_at(1) == gp.k_at(1));
  CHECK(gp.theta0 == 0.001);
}

TEST_CASE("gamma params: variance identities hold at tight tolerance") {
  const auto s = linear_schedule(1000, 1e-4, 0.02);
  for (double theta0 : {0.001, 0.1}) {
    const auto gp = gamma_params(s, theta0);
    for (int t = 1; t <= 1000; ++t) {
      const double th2 = gp.theta_at(t) * gp.theta_at(t);
      const double step = gp.k_at(t) * th2;
      const double cum = gp.k_bar_at(t) * th2;
      CHECK(std::abs(step - s.beta_at(t)) <= 1e-9 * s.beta_at(t));
      CHECK(std::abs(cum - (1.0 - s.alpha_bar_at(t))) <= 1e-9 * (1.0 - s.alpha_bar_at(t)));
    }
  }
}

TEST_CASE("gamma params: k_bar accumulates k") {
  const auto s = linear_schedule(50, 1e-3, 0.05);
  const auto gp = gamma_params(s, 0.2);
  double acc = 0.0;
  for (int t = 1; t <= 50; ++t) {
    acc += gp.k_at(t);
    CHECK(gp.k_bar_at(t) == doctest::Approx(acc).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gamma_params(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_params(s, -1.0), std::invalid_argument);
}

TEST_CASE("subsample grids are valid and anchored at T") {
  for (auto strat : {SubsampleStrategy::kUniform, SubsampleStrategy::kQuadratic}) {
    const auto grid = subsample_timesteps(1000, 10, strat);
    REQUIRE(grid.size() == 10);
    CHECK(grid.back() == 1000);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(grid[i] >= 1);
      CHECK(grid[i] <= 1000);
      if (i > 0) CHECK(grid[i] > grid[i - 1]);
    }
  }
  const auto full = subsample_timesteps(10, 10, SubsampleStrategy::kUniform);
  const std::vector<int> expect{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(full == expect);
  CHECK(subsample_timesteps(1000, 1, SubsampleStrategy::kUniform) == std::vector<int>{1000});
  CHECK_THROWS_AS(subsample_timesteps(10, 11, SubsampleStrategy::kUniform),
                  std::invalid_argument);
  CHECK_THROWS_AS(subsample_timesteps(10, 0, SubsampleStrategy::kUniform),
                  std::invalid_argument);
}

TEST_CASE("schedule json round trip preserves betas and theta0") {
  const auto s = linear_schedule(7, 0.01, 0.02);
  const auto text = schedule_to_json(s, 0.05);
  const auto loaded = schedule_from_json(text);
  REQUIRE(loaded.schedule.steps() == 7);
  for (int t = 1; t <= 7; ++t) CHECK(loaded.schedule.beta_at(t) == s.beta_at(t));
  CHECK(loaded.theta0 == 0.05);

  const auto bare = schedule_from_json(schedule_to_json(s, std::nan("")));
  CHECK(std::isnan(bare.theta0));
  CHECK_THROWS_AS(schedule_from_json("{\"T\": 3}"), std::invalid_argument);
}

TEST_CASE("schedule hash separates schedules") {
  const auto a = linear_schedule(100, 1e-4, 0.02);
  const auto b = linear_schedule(100, 1e-4, 0.021);
  const auto c = linear_schedule(101, 1e-4, 0.02);
  const auto ha = schedule_hash(a);
  CHECK(ha.size() == 16);
  CHECK(ha.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(ha == schedule_hash(linear_schedule(100, 1e-4, 0.02)));
  CHECK(ha != schedule_hash(b));
  CHECK(ha != schedule_hash(c));
}
