#include "schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace gdiff {

NoiseSchedule schedule_from_betas(std::vector<double> beta) {
  if (beta.empty()) throw std::invalid_argument("schedule: needs at least one step");
  NoiseSchedule s;
  s.beta = std::move(beta);
  s.alpha.resize(s.beta.size());
  s.alpha_bar.resize(s.beta.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < s.beta.size(); ++i) {
    const double b = s.beta[i];
    if (!std::isfinite(b) || b <= 0.0 || b >= 1.0)
      throw std::invalid_argument("schedule: beta_" + std::to_string(i + 1) + " = " +
                                  std::to_string(b) + " outside (0, 1)");
    s.alpha[i] = 1.0 - b;
    prod *= s.alpha[i];
    if (prod <= 0.0)
      throw std::invalid_argument("schedule: alpha_bar underflows to zero at step " +
                                  std::to_string(i + 1));
    s.alpha_bar[i] = prod;
  }
  return s;
}

NoiseSchedule linear_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw std::invalid_argument("linear_schedule: T must be >= 1");
  if (beta_start > beta_end)
    throw std::invalid_argument("linear_schedule: beta_start must not exceed beta_end");
  std::vector<double> beta(static_cast<std::size_t>(T));
  if (T == 1) {
    beta[0] = beta_start;
  } else {
    const double step = (beta_end - beta_start) / static_cast<double>(T - 1);
    for (int t = 0; t < T; ++t) beta[static_cast<std::size_t>(t)] = beta_start + step * t;
    // Endpoints are part of the contract; kill any accumulated rounding.
    beta.front() = beta_start;
    beta.back() = beta_end;
  }
  return schedule_from_betas(std::move(beta));
}

NoiseSchedule fibonacci_schedule(int n, double beta1, double beta2) {
  if (n < 2) throw std::invalid_argument("fibonacci_schedule: n must be >= 2");
  std::vector<double> beta(static_cast<std::size_t>(n));
  beta[0] = beta1;
  beta[1] = beta2;
  for (int t = 2; t < n; ++t) {
    beta[static_cast<std::size_t>(t)] =
        beta[static_cast<std::size_t>(t - 1)] + beta[static_cast<std::size_t>(t - 2)];
    if (beta[static_cast<std::size_t>(t)] >= 1.0)
      throw std::invalid_argument("fibonacci_schedule: beta reaches " +
                                  std::to_string(beta[static_cast<std::size_t>(t)]) +
                                  " >= 1 at step " + std::to_string(t + 1));
  }
  return schedule_from_betas(std::move(beta));
}

GammaParams gamma_params(const NoiseSchedule& sched, double theta0) {
  if (!(theta0 > 0.0) || !std::isfinite(theta0))
    throw std::invalid_argument("gamma_params: theta0 must be positive and finite");
  GammaParams p;
  p.theta0 = theta0;
  const int T = sched.steps();
  p.theta.resize(static_cast<std::size_t>(T));
  p.k.resize(static_cast<std::size_t>(T));
  p.k_bar.resize(static_cast<std::size_t>(T));
  const double th2 = theta0 * theta0;
  double acc = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double abar = sched.alpha_bar_at(t);
    const double theta_t = std::sqrt(abar) * theta0;
    const double k_t = sched.beta_at(t) / (abar * th2);
    if (!std::isfinite(k_t) || !(theta_t > 0.0))
      throw std::invalid_argument("gamma_params: degenerate parameters at step " +
                                  std::to_string(t));
    acc += k_t;
    p.theta[static_cast<std::size_t>(t - 1)] = theta_t;
    p.k[static_cast<std::size_t>(t - 1)] = k_t;
    p.k_bar[static_cast<std::size_t>(t - 1)] = acc;
  }
  return p;
}

std::vector<int> subsample_timesteps(int T, int n, SubsampleStrategy strategy) {
  if (T < 1) throw std::invalid_argument("subsample_timesteps: T must be >= 1");
  if (n < 1 || n > T)
    throw std::invalid_argument("subsample_timesteps: n must be in [1, T], got n = " +
                                std::to_string(n) + ", T = " + std::to_string(T));
  std::vector<int> ts(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    double frac = static_cast<double>(j) / static_cast<double>(n);
    if (strategy == SubsampleStrategy::kQuadratic) frac *= frac;
    int t = static_cast<int>(std::llround(frac * static_cast<double>(T)));
    ts[static_cast<std::size_t>(j - 1)] = std::max(t, 1);
  }
  ts.back() = T;
  // Enforce strict increase from the back; n <= T guarantees room.
  for (int j = n - 2; j >= 0; --j)
    ts[static_cast<std::size_t>(j)] =
        std::min(ts[static_cast<std::size_t>(j)], ts[static_cast<std::size_t>(j + 1)] - 1);
  if (ts.front() < 1) throw std::logic_error("subsample_timesteps: grid underflow");
  return ts;
}

std::string schedule_to_json(const NoiseSchedule& sched, double theta0) {
  nlohmann::json j;
  j["T"] = sched.steps();
  j["beta"] = sched.beta;
  j["alpha"] = sched.alpha;
  j["alpha_bar"] = sched.alpha_bar;
  if (std::isfinite(theta0)) {
    j["theta0"] = theta0;
    const GammaParams p = gamma_params(sched, theta0);
    j["gamma"] = {{"theta", p.theta}, {"k", p.k}, {"k_bar", p.k_bar}};
  }
  return j.dump(2);
}

LoadedSchedule schedule_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("T") || !j.contains("beta"))
    throw std::invalid_argument("schedule JSON: missing T or beta");
  const int T = j.at("T").get<int>();
  std::vector<double> beta = j.at("beta").get<std::vector<double>>();
  if (T != static_cast<int>(beta.size()))
    throw std::invalid_argument("schedule JSON: T does not match beta length");
  LoadedSchedule out;
  out.schedule = schedule_from_betas(std::move(beta));
  out.theta0 = j.contains("theta0") ? j.at("theta0").get<double>()
                                    : std::numeric_limits<double>::quiet_NaN();
  if (j.contains("theta0")) gamma_params(out.schedule, out.theta0);  // validate
  return out;
}

std::string schedule_hash(const NoiseSchedule& sched) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001B3ULL;
    }
  };
  const std::int64_t T = sched.steps();
  mix(reinterpret_cast<const unsigned char*>(&T), sizeof(T));
  mix(reinterpret_cast<const unsigned char*>(sched.beta.data()),
      sched.beta.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace gdiff
