#include "vlb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "diffusion.hpp"
#include "gamma_density.hpp"

namespace gdiff {
namespace {

void check_t(int t, const NoiseSchedule& sched) {
  if (t < 2 || static_cast<std::int64_t>(t) > sched.steps()) {
    throw std::invalid_argument("reverse ratio: t must be in [2, T], got " + std::to_string(t));
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    throw std::domain_error(std::string("reverse ratio: ") + name +
                            " is outside the Gamma support (value " + std::to_string(v) + ")");
  }
}

}  // namespace

ReverseTerms reverse_terms(double x_tm1, double x_t, double x0, double x0_hat, int t,
                           const GammaParams& gp, const NoiseSchedule& sched) {
  check_t(t, sched);
  const double beta_t = sched.beta_at(t);
  const double abar_t = sched.alpha_bar_at(t);
  const double abar_tm1 = sched.alpha_bar_at(t - 1);
  ReverseTerms r;
  r.x_t_shift = x_t - std::sqrt(1.0 - beta_t) * x_tm1 + gp.k_at(t) * gp.theta_at(t);
  const double shift_t = gp.k_bar_at(t) * gp.theta_at(t);
  const double shift_tm1 = gp.k_bar_at(t - 1) * gp.theta_at(t - 1);
  r.xbar_t = x_t - std::sqrt(abar_t) * x0 + shift_t;
  r.xhat_t = x_t - std::sqrt(abar_t) * x0_hat + shift_t;
  r.xbar_tm1 = x_tm1 - std::sqrt(abar_tm1) * x0 + shift_tm1;
  r.xhat_tm1 = x_tm1 - std::sqrt(abar_tm1) * x0_hat + shift_tm1;
  return r;
}

double reverse_log_ratio_direct(double x_tm1, double x_t, double x0, double x0_hat, int t,
                                const GammaParams& gp, const NoiseSchedule& sched) {
  const ReverseTerms r = reverse_terms(x_tm1, x_t, x0, x0_hat, t, gp, sched);
  require_positive(r.x_t_shift, "X_t");
  require_positive(r.xbar_tm1, "Xbar_{t-1}");
  require_positive(r.xbar_t, "Xbar_t");
  require_positive(r.xhat_tm1, "Xhat_{t-1}");
  require_positive(r.xhat_t, "Xhat_t");

  const double k_t = gp.k_at(t);
  const double theta_t = gp.theta_at(t);
  const double theta_tm1 = gp.theta_at(t - 1);
  const double kbar_t = gp.k_bar_at(t);
  const double kbar_tm1 = gp.k_bar_at(t - 1);

  const double trans = log_gamma_density(r.x_t_shift, k_t, theta_t);
  const double lhs = trans + log_gamma_density(r.xbar_tm1, kbar_tm1, theta_tm1) -
                     log_gamma_density(r.xbar_t, kbar_t, theta_t);
  const double rhs = trans + log_gamma_density(r.xhat_tm1, kbar_tm1, theta_tm1) -
                     log_gamma_density(r.xhat_t, kbar_t, theta_t);
  return lhs - rhs;
}

double reverse_log_ratio_decomposed(double x_tm1, double x_t, double x0, double x0_hat, int t,
                                    const GammaParams& gp, const NoiseSchedule& sched) {
  const ReverseTerms r = reverse_terms(x_tm1, x_t, x0, x0_hat, t, gp, sched);
  require_positive(r.x_t_shift, "X_t");
  require_positive(r.xbar_tm1, "Xbar_{t-1}");
  require_positive(r.xbar_t, "Xbar_t");
  require_positive(r.xhat_tm1, "Xhat_{t-1}");
  require_positive(r.xhat_t, "Xhat_t");

  const double d = x0_hat - x0;
  const double abar_t = sched.alpha_bar_at(t);
  const double abar_tm1 = sched.alpha_bar_at(t - 1);
  const double delta_t = std::sqrt(abar_t) * d;      // Xbar_t - Xhat_t
  const double delta_tm1 = std::sqrt(abar_tm1) * d;  // Xbar_{t-1} - Xhat_{t-1}

  const double bracket_tm1 = (gp.k_bar_at(t - 1) - 1.0) * std::log1p(delta_tm1 / r.xhat_tm1) -
                             delta_tm1 / gp.theta_at(t - 1);
  const double bracket_t = (gp.k_bar_at(t) - 1.0) * std::log1p(delta_t / r.xhat_t) -
                           delta_t / gp.theta_at(t);
  return bracket_tm1 - bracket_t;
}

BoundReport bound_terms(double x_tm1, double x_t, double x0, double x0_hat, int t,
                        const GammaParams& gp, const NoiseSchedule& sched) {
  const ReverseTerms r = reverse_terms(x_tm1, x_t, x0, x0_hat, t, gp, sched);
  require_positive(r.xbar_tm1, "Xbar_{t-1}");
  require_positive(r.xbar_t, "Xbar_t");
  require_positive(r.xhat_tm1, "Xhat_{t-1}");
  require_positive(r.xhat_t, "Xhat_t");

  const double d = x0_hat - x0;
  const double abs_d = std::fabs(d);
  const double abar_t = sched.alpha_bar_at(t);
  const double abar_tm1 = sched.alpha_bar_at(t - 1);
  const double sa_t = std::sqrt(abar_t);
  const double sa_tm1 = std::sqrt(abar_tm1);
  const double delta_t = sa_t * d;
  const double delta_tm1 = sa_tm1 * d;

  BoundReport rep;
  rep.constants.c1 = sa_tm1 / gp.theta_at(t - 1);
  rep.constants.c2 = sa_t / gp.theta_at(t);
  rep.constants.g_bar_t = r.xbar_t;
  rep.constants.g_bar_tm1 = r.xbar_tm1;
  rep.constants.c3 = sa_t * r.xbar_t / r.xhat_t;
  rep.constants.c4 = sa_tm1 * r.xbar_tm1 / r.xhat_tm1;

  rep.linear_tm1.term = std::fabs(delta_tm1) / gp.theta_at(t - 1);
  rep.linear_tm1.bound = rep.constants.c1 * abs_d;
  rep.linear_t.term = std::fabs(delta_t) / gp.theta_at(t);
  rep.linear_t.bound = rep.constants.c2 * abs_d;
  rep.log_t.term = std::log1p(delta_t / r.xhat_t);
  rep.log_t.bound = rep.constants.c3 / rep.constants.g_bar_t * abs_d;
  rep.log_tm1.term = std::log1p(delta_tm1 / r.xhat_tm1);
  rep.log_tm1.bound = rep.constants.c4 / rep.constants.g_bar_tm1 * abs_d;
  return rep;
}

double l_upper_bound(double x0, double x0_hat, const BoundConstants& c) {
  return (c.c1 + c.c2 + c.c3 / c.g_bar_t + c.c4 / c.g_bar_tm1) * std::fabs(x0 - x0_hat);
}

double lemma2_identity_residual(const Tensor& x0, const Tensor& g_bar, const Tensor& eps_hat,
                                int t, const GammaParams& gp, const NoiseSchedule& sched) {
  if (!x0.same_shape(g_bar) || !x0.same_shape(eps_hat)) {
    throw std::invalid_argument("lemma2_identity_residual: shape mismatch");
  }
  if (t < 1 || static_cast<std::int64_t>(t) > sched.steps()) {
    throw std::invalid_argument("lemma2_identity_residual: t out of range");
  }
  const double abar = sched.alpha_bar_at(t);
  const double sqrt_abar = std::sqrt(abar);
  const double sqrt_rem = std::sqrt(1.0 - abar);
  const double shift = gp.k_bar_at(t) * gp.theta_at(t);
  double worst = 0.0;
  for (std::size_t i = 0; i < x0.data.size(); ++i) {
    const double centered = g_bar.data[i] - shift;
    const double x_t = sqrt_abar * x0.data[i] + centered;
    const double x0_hat = kernel::predict_x0(x_t, abar, eps_hat.data[i]);
    const double target = centered / sqrt_rem;
    const double lhs = std::fabs(x0.data[i] - x0_hat);
    const double rhs = (sqrt_rem / sqrt_abar) * std::fabs(target - eps_hat.data[i]);
    worst = std::max(worst, std::fabs(lhs - rhs));
  }
  return worst;
}

}  // namespace gdiff
