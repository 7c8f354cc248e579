#include "awh/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace awh {

Observable Observable::from_function(const std::string& name, int num_states,
                                     const std::function<double(int)>& phi) {
  Observable o;
  o.name = name;
  o.values.resize(std::size_t(num_states));
  for (int x = 0; x < num_states; ++x) {
    const double v = phi(x);
    if (!std::isfinite(v))
      throw std::invalid_argument("observable: values must be finite");
    o.values[std::size_t(x)] = v;
    o.bound = std::max(o.bound, std::abs(v));
  }
  return o;
}

Observable Observable::coordinate(int num_states) {
  return from_function("coordinate", num_states, [](int x) { return double(x); });
}

Observable Observable::indicator(const std::string& name, int num_states,
                                 std::span<const int> states) {
  std::vector<char> in(std::size_t(num_states), 0);
  for (int s : states) {
    if (s < 0 || s >= num_states)
      throw std::invalid_argument("observable: indicator state out of range");
    in[std::size_t(s)] = 1;
  }
  return from_function(name, num_states, [&](int x) { return double(in[std::size_t(x)]); });
}

Observable Observable::constant(int num_states, double c) {
  return from_function("constant", num_states, [c](int) { return c; });
}

double block_average_phi(const EnergyModel& model, const ChainBlock& block,
                         std::span<const double> theta, int target_j,
                         const Observable& phi) {
  const int nl = model.num_lambdas();
  std::vector<double> cond(std::size_t(nl), 0.0);
  Kahan acc;
  for (int x : block.xs) {
    model.conditional_lambda_into(x, theta, cond);
    acc.add(phi(x) * cond[std::size_t(target_j)]);
  }
  return acc.value() / double(block.size());
}

double update_zeta(double zeta, double phi_value, long n, double bound) {
  const double next = zeta + (1.0 / double(n + 1)) * (phi_value - zeta);
  return std::clamp(next, -bound, bound);
}

double optimal_zeta(const EnergyModel& model, const TargetDistribution& rho,
                    int target_j, const Observable& phi) {
  return rho[target_j] * model.expectation(phi.values, target_j);
}

ErgodicAccumulator::ErgodicAccumulator(const Observable& phi, int target_j)
    : phi_(&phi), target_j_(target_j) {}

void ErgodicAccumulator::absorb_block(const EnergyModel& model,
                                      const ChainBlock& block,
                                      std::span<const double> theta) {
  const int nl = model.num_lambdas();
  std::vector<double> cond(std::size_t(nl), 0.0);
  for (int x : block.xs) {
    model.conditional_lambda_into(x, theta, cond);
    const double w = cond[std::size_t(target_j_)];
    numerator_.add((*phi_)(x)*w);
    denominator_.add(w);
    ++samples_;
  }
  zeta_ = update_zeta(zeta_, block_average_phi(model, block, theta, target_j_, *phi_),
                      blocks_, phi_->bound);
  ++blocks_;
}

double ErgodicAccumulator::estimate() const {
  if (samples_ == 0) throw std::runtime_error("empty_run");
  return numerator_.value() / denominator_.value();
}

double adaptive_expectation(const EnergyModel& model, const AwhTrajectory& traj,
                            int target_j, const Observable& psi) {
  if (traj.blocks.empty()) throw std::runtime_error("empty_run");
  const int nl = model.num_lambdas();
  std::vector<double> cond(std::size_t(nl), 0.0);
  Kahan num, den;
  for (std::size_t n = 0; n < traj.blocks.size(); ++n) {
    const auto& theta = traj.thetas[n];  // theta_n drove block n
    for (int x : traj.blocks[n].xs) {
      model.conditional_lambda_into(x, theta, cond);
      num.add(psi(x) * cond[std::size_t(target_j)]);
      den.add(cond[std::size_t(target_j)]);
    }
  }
  return num.value() / den.value();
}

}  // namespace awh
