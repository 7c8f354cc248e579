#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace awh {

// Target distribution rho on the parameter grid. Entries are strictly
// positive and sum to 1 within 1e-12.
class TargetDistribution {
 public:
  explicit TargetDistribution(std::vector<double> p);
  static TargetDistribution uniform(int n);
  static TargetDistribution from_weights(std::vector<double> w);

  int size() const { return int(p_.size()); }
  double operator[](int i) const { return p_[std::size_t(i)]; }
  double log(int i) const { return logp_[std::size_t(i)]; }
  std::span<const double> values() const { return p_; }

 private:
  std::vector<double> p_;
  std::vector<double> logp_;
};

// A Gibbs family over a finite state space and a finite parameter grid:
// p(x|lambda) = exp{-E(x,lambda) + F(lambda)}. The energy table is
// materialized at construction and all free energies are computed once
// by stabilized direct summation; every probability this class returns
// is exact up to rounding. Immutable and safe to share across threads.
class EnergyModel {
 public:
  EnergyModel(int num_states, std::vector<double> labels,
              const std::function<double(int, int)>& energy);
  EnergyModel(int num_states, std::vector<double> labels,
              std::vector<double> energy_table);  // row-major [x][j]

  int num_states() const { return num_states_; }
  int num_lambdas() const { return int(labels_.size()); }
  double label(int j) const { return labels_[std::size_t(j)]; }
  std::span<const double> labels() const { return labels_; }
  double energy(int x, int j) const {
    return energy_[std::size_t(x) * labels_.size() + std::size_t(j)];
  }

  // F(lambda_j) = -log sum_x exp{-E(x,lambda_j)}
  double free_energy(int j) const { return free_energy_[std::size_t(j)]; }

  // p_{X|Lambda}(x|lambda_j)
  double gibbs_density(int x, int j) const;
  std::vector<double> gibbs_distribution(int j) const;

  // p_{Lambda|Theta}(.|theta) = softmax(theta - F)
  std::vector<double> marginal_lambda(std::span<const double> theta) const;

  // p_{Lambda|X,Theta}(.|x,theta) = softmax(-E(x,.) + theta)
  std::vector<double> conditional_lambda(int x,
                                         std::span<const double> theta) const;
  void conditional_lambda_into(int x, std::span<const double> theta,
                               std::span<double> out) const;

  // p_{X,Lambda|Theta}, row-major [x][j]; entries sum to 1.
  std::vector<double> joint_density(std::span<const double> theta) const;

  // p_{X|Theta}(x|theta) = sum_j joint(x,j)
  std::vector<double> x_marginal(std::span<const double> theta) const;

  // theta_*(lambda) = F(lambda) + log rho(lambda), additive constant 0.
  std::vector<double> optimal_theta(const TargetDistribution& rho) const;

  // sum_x phi(x) p_{X|Lambda}(x|lambda_j)
  double expectation(std::span<const double> phi, int j) const;

  void export_energy_csv(std::ostream& out) const;
  static EnergyModel import_energy_csv(std::istream& in,
                                       std::vector<double> labels = {});

 private:
  int num_states_;
  std::vector<double> labels_;
  std::vector<double> energy_;       // [x * |L| + j]
  std::vector<double> free_energy_;  // per j
};

std::vector<double> equispaced_ladder(double lo, double hi, int count);

// Bundled fixtures. double_well: 32-site lattice, E(x,lambda) =
// lambda * E0(x) with a tilted two-minimum profile; ising_chain:
// periodic chain of L spins, E(x,beta) = beta * H(x).
EnergyModel make_double_well(int num_states = 32,
                             std::vector<double> ladder = {});
EnergyModel make_ising_chain(int length, std::vector<double> ladder = {});

}  // namespace awh
