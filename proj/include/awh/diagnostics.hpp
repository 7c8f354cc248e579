#pragma once

#include <span>
#include <vector>

#include "awh/awh.hpp"
#include "awh/ergodic.hpp"
#include "awh/kernel.hpp"
#include "awh/model.hpp"

namespace awh {

// Per-block drift observation:
// h(theta,xi)(lambda) = 1 - sum_k p_{Lambda|X,Theta}(lambda|xi(k),theta) / (N_I rho(lambda)).
// Each coordinate is bounded by 1 + 1/rho(lambda).
std::vector<double> h_of(const EnergyModel& model, std::span<const double> theta,
                         const ChainBlock& block, const TargetDistribution& rho);

// Extended variant over L_0 = L + one zeta coordinate (stored last):
// the extra coordinate is Phi(xi,theta) - zeta, bounded by 2C.
std::vector<double> extended_h(const EnergyModel& model,
                               std::span<const double> theta, double zeta,
                               const ChainBlock& block,
                               const TargetDistribution& rho,
                               const Observable& phi, int target_j);

struct MeanFieldValue {
  std::vector<double> gbar;
};

// gbar(theta)(lambda) = 1 - p_{Lambda|Theta}(lambda|theta)/rho(lambda);
// its rho-weighted mean is 0.
MeanFieldValue gbar_of(const EnergyModel& model, std::span<const double> theta,
                       const TargetDistribution& rho);

// Over L_0; the zeta coordinate is
// sum_x phi(x) p_{X,Lambda|Theta}(x,lambda|theta) - zeta.
std::vector<double> extended_gbar(const EnergyModel& model,
                                  std::span<const double> theta, double zeta,
                                  const TargetDistribution& rho,
                                  const Observable& phi, int target_j);

// E[h(theta,xi_1) | theta_0 = theta] by exact enumeration of all
// length-N_I paths, X_0 ~ p_{X|Theta}(.|theta). Feasible only for
// |X| <= 6, |L| <= 3, N_I <= 3; otherwise throws instance_too_large.
std::vector<double> bruteforce_mean_h(const EnergyModel& model,
                                      const TransitionKernel& kernel,
                                      std::span<const double> theta,
                                      const TargetDistribution& rho,
                                      int inner_steps);

struct LyapunovValue {
  double value = 0.0;
  std::vector<double> gradient;
};

// V(theta) = sum_sigma rho(sigma) gbar(sigma)^2 with its closed-form gradient.
LyapunovValue lyapunov_V(const EnergyModel& model, std::span<const double> theta,
                         const TargetDistribution& rho);

// <grad V, gbar>; equals -2 Var_{p(.|theta)}(gbar), always <= 0.
double descent_inner_product(const EnergyModel& model,
                             std::span<const double> theta,
                             const TargetDistribution& rho);

// Var_{p(.|theta)}(gbar), computed independently of the inner product.
double gbar_variance(const EnergyModel& model, std::span<const double> theta,
                     const TargetDistribution& rho);

// V_delta(theta,zeta) = V(theta) + delta (zeta_* - zeta)^2, gradient over
// L_0 (zeta coordinate last).
LyapunovValue lyapunov_V_delta(const EnergyModel& model,
                               std::span<const double> theta, double zeta,
                               const TargetDistribution& rho,
                               const Observable& phi, int target_j,
                               double delta);

// m = inf over the box and sigma of p_{Lambda|Theta}(sigma|theta); exact
// via coordinatewise monotonicity (minimizing vertex per sigma).
double exact_m(const EnergyModel& model, const HyperRectangle& box);

// delta = m^2 / (2 C^2)
double lemma_delta(const EnergyModel& model, const HyperRectangle& box,
                   const Observable& phi);

struct JensenReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

// (sum x_i p_i)^2 - sum x_i^2 p_i against the telescoping
// prefix-variance expansion; both sides computed independently.
JensenReport jensen_difference_check(std::span<const double> xs,
                                     std::span<const double> ps);

// g(theta,xi) = sum_eta h(theta,eta) p(xi,eta|theta) by literal path
// enumeration (tiny instances only).
std::vector<double> g_of(const EnergyModel& model, const TransitionKernel& kernel,
                         std::span<const double> theta, const ChainBlock& from,
                         const TargetDistribution& rho, int inner_steps);

// Same quantity via the marginalized distribution recursion; works at
// any size and serves as the dual route in tests.
std::vector<double> g_of_marginalized(const EnergyModel& model,
                                      const TransitionKernel& kernel,
                                      std::span<const double> theta,
                                      const ChainBlock& from,
                                      const TargetDistribution& rho,
                                      int inner_steps);

// delta M_n = h(theta, xi_{n+1}) - g(theta, xi_n)
std::vector<double> delta_M(const EnergyModel& model, const TransitionKernel& kernel,
                            std::span<const double> theta,
                            const ChainBlock& block_next,
                            const ChainBlock& block_current,
                            const TargetDistribution& rho);

}  // namespace awh
