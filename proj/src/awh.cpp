#include "awh/awh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace awh {

HyperRectangle::HyperRectangle(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty())
    throw std::invalid_argument("dimension_mismatch: box bounds");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i]))
      throw std::invalid_argument("box: lower must be < upper coordinatewise");
    if (lower_[i] > 0.0 || upper_[i] < 0.0)
      throw std::invalid_argument("box: must contain the origin");
  }
}

HyperRectangle HyperRectangle::symmetric(int dim, double bound) {
  return HyperRectangle(std::vector<double>(std::size_t(dim), -bound),
                        std::vector<double>(std::size_t(dim), bound));
}

bool HyperRectangle::contains(std::span<const double> v) const {
  if (int(v.size()) != dim()) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < lower_[i] || v[i] > upper_[i]) return false;
  return true;
}

std::vector<double> HyperRectangle::clamp(std::span<double> v) const {
  if (int(v.size()) != dim())
    throw std::invalid_argument("dimension_mismatch: clamp");
  std::vector<double> disp(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = std::clamp(v[i], lower_[i], upper_[i]);
    disp[i] = c - v[i];
    v[i] = c;
  }
  return disp;
}

HyperRectangle HyperRectangle::extended(double bound) const {
  auto lo = lower_;
  auto hi = upper_;
  lo.push_back(-bound);
  hi.push_back(bound);
  return HyperRectangle(std::move(lo), std::move(hi));
}

HyperRectangle HyperRectangle::truncated(int dim) const {
  return HyperRectangle(std::vector<double>(lower_.begin(), lower_.begin() + dim),
                        std::vector<double>(upper_.begin(), upper_.begin() + dim));
}

void AwhConfig::validate() const {
  if (!model || !kernel) throw std::invalid_argument("config: model and kernel required");
  if (num_iterations < 0) throw std::invalid_argument("config: N must be >= 0");
  if (inner_steps < 1) throw std::invalid_argument("config: N_I must be >= 1");
  if (rho.size() != model->num_lambdas())
    throw std::invalid_argument("dimension_mismatch: rho vs grid");
  if (int(theta0.size()) != model->num_lambdas())
    throw std::invalid_argument("dimension_mismatch: theta0 vs grid");
  if (box.dim() != model->num_lambdas())
    throw std::invalid_argument("dimension_mismatch: box vs grid");
  if (!box.contains(theta0))
    throw std::invalid_argument("config: theta0 must lie in the box");
  if (start.x < 0 || start.x >= model->num_states())
    throw std::invalid_argument("config: x0 out of range");
  if (start.lambda < 0 || start.lambda >= model->num_lambdas())
    throw std::invalid_argument("config: lambda0 out of range");
}

ChainBlock inner_loop(const EnergyModel& model, const TransitionKernel& kernel,
                      GibbsState& state, std::span<const double> theta,
                      int inner_steps, SplitMix64& rng, WeightHistogram& hist) {
  const int nl = model.num_lambdas();
  ChainBlock block;
  block.xs.reserve(std::size_t(inner_steps));
  block.lambdas.reserve(std::size_t(inner_steps));
  std::vector<double> cond(std::size_t(nl), 0.0);
  for (int k = 0; k < inner_steps; ++k) {
    state.x = kernel.step(rng, state.x, state.lambda);
    model.conditional_lambda_into(state.x, theta, cond);
    state.lambda = sample_categorical(cond, rng);
    for (int j = 0; j < nl; ++j) hist.w[std::size_t(j)] += cond[std::size_t(j)];
    block.xs.push_back(state.x);
    block.lambdas.push_back(state.lambda);
  }
  return block;
}

std::pair<DesignParameter, std::vector<double>> update_theta(
    std::span<const double> theta, const WeightHistogram& hist, long n,
    const TargetDistribution& rho, const HyperRectangle& box, UpdateMode mode,
    int inner_steps) {
  const int nl = int(theta.size());
  DesignParameter next(theta.begin(), theta.end());
  const double denom = double(n + 1) * double(inner_steps);
  for (int j = 0; j < nl; ++j) {
    const double w = hist.w[std::size_t(j)];
    if (mode == UpdateMode::kLog) {
      if (!(w > 0.0)) throw std::runtime_error("histogram_nonpositive");
      next[std::size_t(j)] -= std::log(w / (denom * rho[j]));
    } else {
      // block-accumulated part: W_{n,N_I} - W_{n,0} with W_{n,0} = n N_I rho
      const double s = w - double(n) * double(inner_steps) * rho[j];
      next[std::size_t(j)] +=
          (1.0 / double(n + 1)) * (1.0 - s / (double(inner_steps) * rho[j]));
    }
  }
  auto disp = box.clamp(next);
  return {std::move(next), std::move(disp)};
}

WeightHistogram reset_histogram(long n, const TargetDistribution& rho,
                                int inner_steps) {
  WeightHistogram h;
  h.w.resize(std::size_t(rho.size()));
  for (int j = 0; j < rho.size(); ++j)
    h.w[std::size_t(j)] = double(n + 1) * double(inner_steps) * rho[j];
  return h;
}

AwhTrajectory run(const AwhConfig& config, const BlockObserver& observer) {
  config.validate();
  const EnergyModel& model = *config.model;
  const TransitionKernel& kernel = *config.kernel;
  SplitMix64 rng(config.seed);

  AwhTrajectory traj;
  traj.thetas.reserve(std::size_t(config.num_iterations) + 1);
  traj.thetas.push_back(config.theta0);
  GibbsState state = config.start;

  DesignParameter theta = config.theta0;
  WeightHistogram hist;
  hist.w.assign(std::size_t(config.rho.size()), 0.0);  // W_{0,0} = 0

  for (long n = 0; n < config.num_iterations; ++n) {
    ChainBlock block = inner_loop(model, kernel, state, theta,
                                  config.inner_steps, rng, hist);
    if (observer) observer(n, block, theta);
    auto [next, disp] = update_theta(theta, hist, n, config.rho, config.box,
                                     config.mode, config.inner_steps);
    theta = std::move(next);
    traj.thetas.push_back(theta);
    traj.clamp_displacements.push_back(std::move(disp));
    if (config.keep_histograms) traj.histograms.push_back(hist);
    if (config.keep_blocks) traj.blocks.push_back(std::move(block));
    hist = reset_histogram(n, config.rho, config.inner_steps);
  }
  traj.end_state = state;
  return traj;
}

double free_energy_difference(std::span<const double> theta, int i, int j,
                              const TargetDistribution& rho) {
  return theta[std::size_t(i)] - theta[std::size_t(j)] - rho.log(i) + rho.log(j);
}

std::vector<double> sample_point(const HyperRectangle& box, SplitMix64& rng) {
  std::vector<double> v(std::size_t(box.dim()), 0.0);
  for (int i = 0; i < box.dim(); ++i)
    v[std::size_t(i)] = box.lower(i) + (box.upper(i) - box.lower(i)) * rng.next_double();
  return v;
}

}  // namespace awh
