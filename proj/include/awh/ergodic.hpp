#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "awh/awh.hpp"
#include "awh/model.hpp"
#include "awh/numeric.hpp"

namespace awh {

// Bounded observable phi over the state space; the bound C = max |phi|
// is computed exactly at construction.
struct Observable {
  std::string name;
  std::vector<double> values;  // phi(x) per state
  double bound = 0.0;          // C

  static Observable from_function(const std::string& name, int num_states,
                                  const std::function<double(int)>& phi);
  static Observable coordinate(int num_states);
  static Observable indicator(const std::string& name, int num_states,
                              std::span<const int> states);
  static Observable constant(int num_states, double c);

  double operator()(int x) const { return values[std::size_t(x)]; }
};

// Phi(xi, theta) = (1/N_I) sum_k phi(xi(k)) p_{Lambda|X,Theta}(lambda|xi(k), theta)
double block_average_phi(const EnergyModel& model, const ChainBlock& block,
                         std::span<const double> theta, int target_j,
                         const Observable& phi);

// zeta_{n+1} = zeta_n + (1/(n+1)) (Phi - zeta_n), clamped to [-bound, bound]
double update_zeta(double zeta, double phi_value, long n, double bound);

// zeta_* = rho(lambda) sum_x phi(x) p_{X|Lambda}(x|lambda)
double optimal_zeta(const EnergyModel& model, const TargetDistribution& rho,
                    int target_j, const Observable& phi);

// Streaming accumulators for the adaptive ergodic average at one
// (observable, target lambda) pair; O(1) memory, fed block by block.
class ErgodicAccumulator {
 public:
  ErgodicAccumulator(const Observable& phi, int target_j);

  void absorb_block(const EnergyModel& model, const ChainBlock& block,
                    std::span<const double> theta);

  // ratio estimator psi-hat / 1-hat; throws empty_run without samples
  double estimate() const;
  double zeta() const { return zeta_; }
  long samples() const { return samples_; }
  const Observable& observable() const { return *phi_; }
  int target() const { return target_j_; }

 private:
  const Observable* phi_;
  int target_j_;
  Kahan numerator_, denominator_;
  long samples_ = 0;
  long blocks_ = 0;
  double zeta_ = 0.0;
};

// Ratio estimator recomputed from retained blocks; used to cross-check
// the streaming path.
double adaptive_expectation(const EnergyModel& model, const AwhTrajectory& traj,
                            int target_j, const Observable& psi);

}  // namespace awh
