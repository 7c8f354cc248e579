#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "awh/model.hpp"
#include "awh/rng.hpp"

namespace awh {

// Symmetric proposal: per-state list of (target, probability). Entries
// may include the state itself (e.g. reflected lattice moves). The
// constructor rejects proposals with q0(x,y) != q0(y,x).
class SymmetricProposal {
 public:
  explicit SymmetricProposal(std::vector<std::vector<std::pair<int, double>>> targets);

  int num_states() const { return int(targets_.size()); }
  const std::vector<std::pair<int, double>>& row(int x) const {
    return targets_[std::size_t(x)];
  }
  // one uniform
  int sample(int x, SplitMix64& rng) const;

 private:
  std::vector<std::vector<std::pair<int, double>>> targets_;
};

// +-1 move with the out-of-range half proposed as the state itself.
SymmetricProposal single_site_proposal(int num_states);
// uniform single spin flip on a chain of `length` spins
SymmetricProposal spin_flip_proposal(int length);

// Within-state transition kernel q(x,y|lambda) leaving p_{X|Lambda}
// invariant. Either Metropolis over a symmetric proposal, or an
// explicit per-lambda stochastic matrix (tests, degenerate kernels).
// Immutable; callers own the RNG, so one kernel serves many threads.
class TransitionKernel {
 public:
  TransitionKernel(const EnergyModel& model, SymmetricProposal proposal);
  static TransitionKernel from_matrices(const EnergyModel& model,
                                        std::vector<std::vector<double>> per_lambda);

  const EnergyModel& model() const { return *model_; }

  // Metropolis consumes exactly two uniforms (proposal pick, acceptance
  // test); a matrix kernel consumes one.
  int step(SplitMix64& rng, int x, int j) const;

  // Dense matrices are available when |X| <= 4096 (or explicit).
  bool has_dense() const;
  std::vector<double> dense_matrix(int j) const;  // row-major |X| x |X|

  static constexpr int kDenseLimit = 4096;

 private:
  explicit TransitionKernel(const EnergyModel& model) : model_(&model) {}

  const EnergyModel* model_;
  std::optional<SymmetricProposal> proposal_;
  std::vector<std::vector<double>> matrices_;  // empty unless explicit
};

struct InvarianceReport {
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// max_y |sum_x q(x,y|lambda) p(x|lambda) - p(y|lambda)| vs tol
InvarianceReport verify_invariance(const TransitionKernel& kernel, int j, double tol);

struct ErgodicityReport {
  bool irreducible = false;
  bool aperiodic = false;
  int period = 0;  // meaningful when irreducible
  bool pass() const { return irreducible && aperiodic; }
};

ErgodicityReport verify_irreducible_aperiodic(const TransitionKernel& kernel, int j);

// Matrix-level checkers (also used for negative controls).
double invariance_residual(std::span<const double> matrix,
                           std::span<const double> pi, int n);
bool matrix_irreducible(std::span<const double> matrix, int n);
int matrix_period(std::span<const double> matrix, int n);

}  // namespace awh
