#pragma once

#include <cstdint>

#include "schedule.hpp"
#include "tensor.hpp"

namespace gdiff {

// Shifted density arguments for one reverse-process ratio at timestep t >= 2.
// Hatted members substitute x0_hat for x0. Each is the argument of a Gamma
// density and must be strictly positive before evaluation; reverse_terms
// itself does not enforce that.
struct ReverseTerms {
  double x_t_shift = 0.0;  // x_t - sqrt(1-beta_t) x_{t-1} + k_t theta_t
  double xbar_t = 0.0;     // x_t - sqrt(abar_t) x0 + kbar_t theta_t
  double xbar_tm1 = 0.0;
  double xhat_t = 0.0;
  double xhat_tm1 = 0.0;
};

ReverseTerms reverse_terms(double x_tm1, double x_t, double x0, double x0_hat, int t,
                           const GammaParams& gp, const NoiseSchedule& sched);

// log q(x_{t-1}|x0, x_t) - log q(x_{t-1}|x0_hat, x_t), each side assembled
// from its three full log-densities (transition, marginal at t-1, marginal at
// t). The transition term is identical on both sides and cancels exactly.
// Throws std::domain_error naming the first nonpositive argument.
double reverse_log_ratio_direct(double x_tm1, double x_t, double x0, double x0_hat, int t,
                                const GammaParams& gp, const NoiseSchedule& sched);

// The same quantity via the four-term expansion
//   (kbar_{t-1}-1) log(Xbar_{t-1}/Xhat_{t-1}) - (Xbar_{t-1}-Xhat_{t-1})/theta_{t-1}
// - (kbar_t-1)    log(Xbar_t/Xhat_t)         + (Xbar_t-Xhat_t)/theta_t.
// Differences are formed as sqrt(abar)(x0_hat - x0) and the logs as log1p of
// a small ratio, so the huge kbar*theta shifts never cancel in subtraction.
double reverse_log_ratio_decomposed(double x_tm1, double x_t, double x0, double x0_hat, int t,
                                    const GammaParams& gp, const NoiseSchedule& sched);

struct BoundConstants {
  double c1 = 0.0;  // sqrt(abar_{t-1}) / theta_{t-1}
  double c2 = 0.0;  // sqrt(abar_t) / theta_t
  double c3 = 0.0;  // sqrt(abar_t) * g_bar_t / Xhat_t
  double c4 = 0.0;  // sqrt(abar_{t-1}) * g_bar_{t-1} / Xhat_{t-1}
  double g_bar_t = 0.0;    // realized accumulated noise, equals Xbar_t
  double g_bar_tm1 = 0.0;
};

struct TermBound {
  double term = 0.0;
  double bound = 0.0;
};

// The four per-term L1 bounds. Linear terms are reported as absolute values
// and meet their bounds with equality; log terms are the signed unweighted
// logs, bounded through log x <= x - 1.
struct BoundReport {
  BoundConstants constants;
  TermBound linear_tm1;  // |Xbar_{t-1}-Xhat_{t-1}|/theta_{t-1} <= C1 |x0-x0_hat|
  TermBound linear_t;    // |Xbar_t-Xhat_t|/theta_t             <= C2 |x0-x0_hat|
  TermBound log_t;       // log(Xbar_t/Xhat_t)       <= (C3/g_bar_t)    |x0-x0_hat|
  TermBound log_tm1;     // log(Xbar_{t-1}/Xhat_{t-1}) <= (C4/g_bar_{t-1}) |x0-x0_hat|
};

BoundReport bound_terms(double x_tm1, double x_t, double x0, double x0_hat, int t,
                        const GammaParams& gp, const NoiseSchedule& sched);

// (C1 + C2 + C3/g_bar_t + C4/g_bar_{t-1}) * |x0 - x0_hat|.
double l_upper_bound(double x0, double x0_hat, const BoundConstants& c);

// Max over elements of | |x0 - x0_hat| - (sqrt(1-abar)/sqrt(abar)) |target - eps_hat| |
// where x_t is the gamma jump from x0 with accumulated draw g_bar, x0_hat is
// recovered from eps_hat, and target = (g_bar - kbar theta)/sqrt(1-abar).
double lemma2_identity_residual(const Tensor& x0, const Tensor& g_bar, const Tensor& eps_hat,
                                int t, const GammaParams& gp, const NoiseSchedule& sched);

}  // namespace gdiff
