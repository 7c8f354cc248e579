#include "awh/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "awh/numeric.hpp"
#include "awh/parallel.hpp"

namespace awh {

SymmetricProposal::SymmetricProposal(
    std::vector<std::vector<std::pair<int, double>>> targets)
    : targets_(std::move(targets)) {
  const int n = int(targets_.size());
  std::map<std::pair<int, int>, double> mass;
  for (int x = 0; x < n; ++x) {
    double rowsum = 0.0;
    for (const auto& [y, p] : targets_[std::size_t(x)]) {
      if (y < 0 || y >= n || !(p >= 0.0))
        throw std::invalid_argument("asymmetric_proposal: malformed row");
      mass[{x, y}] += p;
      rowsum += p;
    }
    if (std::abs(rowsum - 1.0) > 1e-12)
      throw std::invalid_argument("asymmetric_proposal: row does not sum to 1");
  }
  for (const auto& [xy, p] : mass) {
    const auto it = mass.find({xy.second, xy.first});
    const double back = it == mass.end() ? 0.0 : it->second;
    if (std::abs(p - back) > 1e-12)
      throw std::invalid_argument("asymmetric_proposal: q0(x,y) != q0(y,x)");
  }
}

int SymmetricProposal::sample(int x, SplitMix64& rng) const {
  const auto& row = targets_[std::size_t(x)];
  const double u = rng.next_double();
  double cum = 0.0;
  for (const auto& [y, p] : row) {
    cum += p;
    if (u <= cum) return y;
  }
  return row.back().first;
}

SymmetricProposal single_site_proposal(int num_states) {
  std::vector<std::vector<std::pair<int, double>>> t;
  t.resize(std::size_t(num_states));
  for (int x = 0; x < num_states; ++x) {
    for (int d : {-1, +1}) {
      const int y = x + d;
      t[std::size_t(x)].push_back({(y < 0 || y >= num_states) ? x : y, 0.5});
    }
  }
  return SymmetricProposal(std::move(t));
}

SymmetricProposal spin_flip_proposal(int length) {
  const int n = 1 << length;
  std::vector<std::vector<std::pair<int, double>>> t;
  t.resize(std::size_t(n));
  for (int x = 0; x < n; ++x)
    for (int i = 0; i < length; ++i)
      t[std::size_t(x)].push_back({x ^ (1 << i), 1.0 / length});
  return SymmetricProposal(std::move(t));
}

TransitionKernel::TransitionKernel(const EnergyModel& model, SymmetricProposal proposal)
    : model_(&model), proposal_(std::move(proposal)) {
  if (proposal_->num_states() != model.num_states())
    throw std::invalid_argument("dimension_mismatch: proposal vs state space");
}

TransitionKernel TransitionKernel::from_matrices(
    const EnergyModel& model, std::vector<std::vector<double>> per_lambda) {
  if (int(per_lambda.size()) != model.num_lambdas())
    throw std::invalid_argument("dimension_mismatch: one matrix per grid point");
  const std::size_t n = std::size_t(model.num_states());
  for (const auto& m : per_lambda) {
    if (m.size() != n * n)
      throw std::invalid_argument("dimension_mismatch: matrix size");
    for (std::size_t x = 0; x < n; ++x) {
      Kahan row;
      for (std::size_t y = 0; y < n; ++y) {
        if (!(m[x * n + y] >= 0.0))
          throw std::invalid_argument("kernel: negative matrix entry");
        row.add(m[x * n + y]);
      }
      if (std::abs(row.value() - 1.0) > 1e-12)
        throw std::invalid_argument("kernel: matrix row does not sum to 1");
    }
  }
  TransitionKernel k(model);
  k.matrices_ = std::move(per_lambda);
  return k;
}

int TransitionKernel::step(SplitMix64& rng, int x, int j) const {
  if (!matrices_.empty()) {
    const std::size_t n = std::size_t(model_->num_states());
    const double* row = matrices_[std::size_t(j)].data() + std::size_t(x) * n;
    return sample_categorical(std::span<const double>(row, n), rng);
  }
  const int y = proposal_->sample(x, rng);
  const double u = rng.next_double();  // always consumed: fixed draw count
  if (y == x) return x;
  const double de = model_->energy(y, j) - model_->energy(x, j);
  if (de <= 0.0) return y;
  return u < std::exp(-de) ? y : x;
}

bool TransitionKernel::has_dense() const {
  return !matrices_.empty() || model_->num_states() <= kDenseLimit;
}

std::vector<double> TransitionKernel::dense_matrix(int j) const {
  if (!has_dense()) throw std::runtime_error("no_dense_matrix");
  if (!matrices_.empty()) return matrices_[std::size_t(j)];
  const int n = model_->num_states();
  std::vector<double> q(std::size_t(n) * std::size_t(n), 0.0);
  par::for_index(n, [&](std::int64_t xi) {
    const int x = int(xi);
    double* row = q.data() + std::size_t(x) * std::size_t(n);
    for (const auto& [y, p] : proposal_->row(x)) {
      if (y == x) {
        row[std::size_t(x)] += p;
        continue;
      }
      const double de = model_->energy(y, j) - model_->energy(x, j);
      const double acc = de <= 0.0 ? 1.0 : std::exp(-de);
      row[std::size_t(y)] += p * acc;
      row[std::size_t(x)] += p * (1.0 - acc);
    }
  });
  return q;
}

double invariance_residual(std::span<const double> matrix,
                           std::span<const double> pi, int n) {
  std::vector<double> out(std::size_t(n), 0.0);
  par::for_index(n, [&](std::int64_t y) {
    Kahan acc;
    for (int x = 0; x < n; ++x)
      acc.add(matrix[std::size_t(x) * std::size_t(n) + std::size_t(y)] * pi[std::size_t(x)]);
    out[std::size_t(y)] = std::abs(acc.value() - pi[std::size_t(y)]);
  });
  return *std::max_element(out.begin(), out.end());
}

namespace {

std::vector<std::vector<int>> positive_adjacency(std::span<const double> m, int n,
                                                 bool transpose) {
  std::vector<std::vector<int>> adj;
  adj.resize(std::size_t(n));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (m[std::size_t(x) * std::size_t(n) + std::size_t(y)] > 0.0)
        adj[std::size_t(transpose ? y : x)].push_back(transpose ? x : y);
  return adj;
}

std::vector<int> bfs_levels(const std::vector<std::vector<int>>& adj, int src) {
  std::vector<int> level(adj.size(), -1);
  std::queue<int> q;
  level[std::size_t(src)] = 0;
  q.push(src);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[std::size_t(u)])
      if (level[std::size_t(v)] < 0) {
        level[std::size_t(v)] = level[std::size_t(u)] + 1;
        q.push(v);
      }
  }
  return level;
}

}  // namespace

bool matrix_irreducible(std::span<const double> matrix, int n) {
  // strong connectivity: everything reachable from 0 in both the graph
  // and its transpose
  const auto fwd = bfs_levels(positive_adjacency(matrix, n, false), 0);
  const auto bwd = bfs_levels(positive_adjacency(matrix, n, true), 0);
  for (int v = 0; v < n; ++v)
    if (fwd[std::size_t(v)] < 0 || bwd[std::size_t(v)] < 0) return false;
  return true;
}

int matrix_period(std::span<const double> matrix, int n) {
  // gcd of (level(u) + 1 - level(v)) over edges of the strongly
  // connected positive-entry digraph; 1 means aperiodic
  const auto adj = positive_adjacency(matrix, n, false);
  const auto level = bfs_levels(adj, 0);
  int g = 0;
  for (int u = 0; u < n; ++u)
    for (int v : adj[std::size_t(u)])
      g = std::gcd(g, std::abs(level[std::size_t(u)] + 1 - level[std::size_t(v)]));
  return g == 0 ? 1 : g;
}

InvarianceReport verify_invariance(const TransitionKernel& kernel, int j, double tol) {
  if (!kernel.has_dense()) throw std::runtime_error("no_dense_matrix");
  const auto q = kernel.dense_matrix(j);
  const auto pi = kernel.model().gibbs_distribution(j);
  InvarianceReport r;
  r.residual = invariance_residual(q, pi, kernel.model().num_states());
  r.tol = tol;
  r.pass = r.residual <= tol;
  return r;
}

ErgodicityReport verify_irreducible_aperiodic(const TransitionKernel& kernel, int j) {
  if (!kernel.has_dense()) throw std::runtime_error("no_dense_matrix");
  const auto q = kernel.dense_matrix(j);
  const int n = kernel.model().num_states();
  ErgodicityReport r;
  r.irreducible = matrix_irreducible(q, n);
  r.period = r.irreducible ? matrix_period(q, n) : 0;
  r.aperiodic = r.irreducible && r.period == 1;
  return r;
}

}  // namespace awh
