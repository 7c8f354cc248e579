#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "awh/kernel.hpp"
#include "awh/model.hpp"
#include "awh/rng.hpp"

namespace awh {

using DesignParameter = std::vector<double>;

// Coordinatewise box constraint containing the origin. Clamping to it
// is the Euclidean projection and realizes the reflection term of the
// projected recursion.
class HyperRectangle {
 public:
  HyperRectangle(std::vector<double> lower, std::vector<double> upper);
  static HyperRectangle symmetric(int dim, double bound);

  int dim() const { return int(lower_.size()); }
  double lower(int i) const { return lower_[std::size_t(i)]; }
  double upper(int i) const { return upper_[std::size_t(i)]; }
  bool contains(std::span<const double> v) const;

  // clamps v in place; returns per-coordinate displacement (clamped - raw)
  std::vector<double> clamp(std::span<double> v) const;

  // box extended by one zeta coordinate in [-bound, bound]
  HyperRectangle extended(double bound) const;
  // theta-part of an extended box
  HyperRectangle truncated(int dim) const;

 private:
  std::vector<double> lower_, upper_;
};

struct WeightHistogram {
  std::vector<double> w;
};

// One outer iteration's trajectory: X_1..X_{N_I}, Lambda_1..Lambda_{N_I}.
struct ChainBlock {
  std::vector<int> xs;
  std::vector<int> lambdas;
  int size() const { return int(xs.size()); }
};

enum class UpdateMode { kLog, kLinear };

struct GibbsState {
  int x = 0;
  int lambda = 0;
};

struct AwhConfig {
  AwhConfig(TargetDistribution rho_, HyperRectangle box_)
      : rho(std::move(rho_)), box(std::move(box_)) {}

  const EnergyModel* model = nullptr;
  const TransitionKernel* kernel = nullptr;
  TargetDistribution rho;
  HyperRectangle box;
  long num_iterations = 0;  // N
  int inner_steps = 1;      // N_I
  DesignParameter theta0;
  GibbsState start;
  std::uint64_t seed = 1;
  UpdateMode mode = UpdateMode::kLog;
  bool keep_histograms = false;
  bool keep_blocks = false;

  void validate() const;
};

struct AwhTrajectory {
  std::vector<DesignParameter> thetas;                 // theta_0 .. theta_N
  std::vector<std::vector<double>> clamp_displacements;  // per iteration
  std::vector<WeightHistogram> histograms;             // optional W_{n,N_I}
  std::vector<ChainBlock> blocks;                      // optional
  GibbsState end_state;
};

// Runs N_I Gibbs steps from `state`, accumulating conditional weights
// into `hist`; returns the sampled block. Draw order per step:
// X from q(.|Lambda_prev), then Lambda from p_{Lambda|X,Theta}.
ChainBlock inner_loop(const EnergyModel& model, const TransitionKernel& kernel,
                      GibbsState& state, std::span<const double> theta,
                      int inner_steps, SplitMix64& rng, WeightHistogram& hist);

// theta_{n+1} from W_{n,N_I}; log mode matches the histogram against
// (n+1) N_I rho, linear mode adds (1/(n+1)) (1 - S/(N_I rho)) where S is
// the block-accumulated part of W. Both clamp to the box; the returned
// second element is the clamp displacement.
std::pair<DesignParameter, std::vector<double>> update_theta(
    std::span<const double> theta, const WeightHistogram& hist, long n,
    const TargetDistribution& rho, const HyperRectangle& box, UpdateMode mode,
    int inner_steps);

// W_{n+1,0} = (n+1) N_I rho, exactly.
WeightHistogram reset_histogram(long n, const TargetDistribution& rho,
                                int inner_steps);

using BlockObserver =
    std::function<void(long n, const ChainBlock&, const DesignParameter&)>;

AwhTrajectory run(const AwhConfig& config, const BlockObserver& observer = {});

// F(lambda_i) - F(lambda_j) estimated from a design parameter.
double free_energy_difference(std::span<const double> theta, int i, int j,
                              const TargetDistribution& rho);

// Uniform draw from a box; one uniform per coordinate.
std::vector<double> sample_point(const HyperRectangle& box, SplitMix64& rng);

}  // namespace awh
