#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "awh/awh.hpp"
#include "awh/kernel.hpp"
#include "awh/model.hpp"

namespace awh::test {

// 3-state, 2-point grid instance small enough for exact path enumeration
inline EnergyModel tiny_model() {
  return EnergyModel(3, {0.5, 1.5},
                     std::vector<double>{0.3, 1.1, 0.0, 0.4, 0.7, 0.2});
}

inline HyperRectangle default_box(const EnergyModel& m, const TargetDistribution& rho) {
  double b = 0.0;
  for (double t : m.optimal_theta(rho)) b = std::max(b, std::abs(t));
  return HyperRectangle::symmetric(m.num_lambdas(), std::max(1.0, 2.0 * b));
}

inline AwhConfig fixture_config(const EnergyModel& model, const TransitionKernel& kernel,
                                const TargetDistribution& rho, const HyperRectangle& box,
                                long n, int n_inner, std::uint64_t seed) {
  AwhConfig cfg(rho, box);
  cfg.model = &model;
  cfg.kernel = &kernel;
  cfg.num_iterations = n;
  cfg.inner_steps = n_inner;
  cfg.theta0.assign(std::size_t(model.num_lambdas()), 0.0);
  cfg.seed = seed;
  return cfg;
}

}  // namespace awh::test
