#include "awh/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "awh/csv.hpp"
#include "awh/numeric.hpp"
#include "awh/parallel.hpp"

namespace awh {

TargetDistribution::TargetDistribution(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 2) throw std::invalid_argument("invalid_probability: need at least 2 entries");
  Kahan sum;
  for (double x : p_) {
    if (!(x > 0.0)) throw std::invalid_argument("invalid_probability: entries must be > 0");
    sum.add(x);
  }
  if (std::abs(sum.value() - 1.0) > 1e-12)
    throw std::invalid_argument("invalid_probability: entries must sum to 1 within 1e-12");
  logp_.resize(p_.size());
  for (std::size_t i = 0; i < p_.size(); ++i) logp_[i] = std::log(p_[i]);
}

TargetDistribution TargetDistribution::uniform(int n) {
  return TargetDistribution(std::vector<double>(std::size_t(n), 1.0 / n));
}

TargetDistribution TargetDistribution::from_weights(std::vector<double> w) {
  Kahan sum;
  for (double x : w) sum.add(x);
  const double s = sum.value();
  for (double& x : w) x /= s;
  return TargetDistribution(std::move(w));
}

namespace {

void validate_shape(int num_states, const std::vector<double>& labels) {
  if (num_states < 2) throw std::invalid_argument("model: need at least 2 states");
  if (labels.size() < 2) throw std::invalid_argument("model: need at least 2 grid points");
  std::set<double> uniq(labels.begin(), labels.end());
  if (uniq.size() != labels.size())
    throw std::invalid_argument("model: grid labels must be unique");
}

std::vector<double> compute_free_energies(int num_states,
                                          const std::vector<double>& energy,
                                          int num_lambdas) {
  // Stabilized log-sum-exp column by column; the sum over states is the
  // deterministic chunked reduction so large |X| parallelizes.
  std::vector<double> f(std::size_t(num_lambdas), 0.0);
  for (int j = 0; j < num_lambdas; ++j) {
    const double m = par::max(num_states, [&](std::int64_t x) {
      return -energy[std::size_t(x) * std::size_t(num_lambdas) + std::size_t(j)];
    });
    const double s = par::sum(num_states, [&](std::int64_t x) {
      return std::exp(-energy[std::size_t(x) * std::size_t(num_lambdas) + std::size_t(j)] - m);
    });
    f[std::size_t(j)] = -(m + std::log(s));
  }
  return f;
}

}  // namespace

EnergyModel::EnergyModel(int num_states, std::vector<double> labels,
                         const std::function<double(int, int)>& energy)
    : num_states_(num_states), labels_(std::move(labels)) {
  validate_shape(num_states_, labels_);
  const int nl = int(labels_.size());
  energy_.resize(std::size_t(num_states_) * std::size_t(nl));
  par::for_index(num_states_, [&](std::int64_t x) {
    for (int j = 0; j < nl; ++j)
      energy_[std::size_t(x) * std::size_t(nl) + std::size_t(j)] = energy(int(x), j);
  });
  for (double e : energy_)
    if (!std::isfinite(e)) throw std::invalid_argument("model: energies must be finite");
  free_energy_ = compute_free_energies(num_states_, energy_, nl);
}

EnergyModel::EnergyModel(int num_states, std::vector<double> labels,
                         std::vector<double> energy_table)
    : num_states_(num_states),
      labels_(std::move(labels)),
      energy_(std::move(energy_table)) {
  validate_shape(num_states_, labels_);
  if (energy_.size() != std::size_t(num_states_) * labels_.size())
    throw std::invalid_argument("model: energy table size mismatch");
  for (double e : energy_)
    if (!std::isfinite(e)) throw std::invalid_argument("model: energies must be finite");
  free_energy_ = compute_free_energies(num_states_, energy_, int(labels_.size()));
}

double EnergyModel::gibbs_density(int x, int j) const {
  return std::exp(-energy(x, j) + free_energy(j));
}

std::vector<double> EnergyModel::gibbs_distribution(int j) const {
  std::vector<double> p(std::size_t(num_states_), 0.0);
  par::for_index(num_states_, [&](std::int64_t x) {
    p[std::size_t(x)] = std::exp(-energy(int(x), j) + free_energy(j));
  });
  return p;
}

std::vector<double> EnergyModel::marginal_lambda(std::span<const double> theta) const {
  const int nl = num_lambdas();
  std::vector<double> a(std::size_t(nl), 0.0);
  for (int j = 0; j < nl; ++j) a[std::size_t(j)] = theta[std::size_t(j)] - free_energy(j);
  return softmax(a);
}

void EnergyModel::conditional_lambda_into(int x, std::span<const double> theta,
                                          std::span<double> out) const {
  const int nl = num_lambdas();
  for (int j = 0; j < nl; ++j) out[std::size_t(j)] = -energy(x, j) + theta[std::size_t(j)];
  softmax_into(std::span<const double>(out.data(), out.size()), out);
}

std::vector<double> EnergyModel::conditional_lambda(int x,
                                                    std::span<const double> theta) const {
  std::vector<double> out(std::size_t(num_lambdas()), 0.0);
  conditional_lambda_into(x, theta, out);
  return out;
}

std::vector<double> EnergyModel::joint_density(std::span<const double> theta) const {
  const int nl = num_lambdas();
  std::vector<double> logw(std::size_t(num_states_) * std::size_t(nl));
  par::for_index(num_states_, [&](std::int64_t x) {
    for (int j = 0; j < nl; ++j)
      logw[std::size_t(x) * std::size_t(nl) + std::size_t(j)] =
          -energy(int(x), j) + theta[std::size_t(j)];
  });
  const std::int64_t total = std::int64_t(logw.size());
  const double m = par::max(total, [&](std::int64_t i) { return logw[std::size_t(i)]; });
  std::vector<double> w(logw.size());
  par::for_index(total, [&](std::int64_t i) {
    w[std::size_t(i)] = std::exp(logw[std::size_t(i)] - m);
  });
  const double z = par::sum(total, [&](std::int64_t i) { return w[std::size_t(i)]; });
  par::for_index(total, [&](std::int64_t i) { w[std::size_t(i)] /= z; });
  return w;
}

std::vector<double> EnergyModel::x_marginal(std::span<const double> theta) const {
  const auto joint = joint_density(theta);
  const int nl = num_lambdas();
  std::vector<double> p(std::size_t(num_states_), 0.0);
  par::for_index(num_states_, [&](std::int64_t x) {
    Kahan acc;
    for (int j = 0; j < nl; ++j) acc.add(joint[std::size_t(x) * std::size_t(nl) + std::size_t(j)]);
    p[std::size_t(x)] = acc.value();
  });
  return p;
}

std::vector<double> EnergyModel::optimal_theta(const TargetDistribution& rho) const {
  if (rho.size() != num_lambdas())
    throw std::invalid_argument("dimension_mismatch: rho vs grid");
  std::vector<double> t(std::size_t(num_lambdas()), 0.0);
  for (int j = 0; j < num_lambdas(); ++j) t[std::size_t(j)] = free_energy(j) + rho.log(j);
  return t;
}

double EnergyModel::expectation(std::span<const double> phi, int j) const {
  if (int(phi.size()) != num_states_)
    throw std::invalid_argument("dimension_mismatch: phi vs state space");
  return par::sum(num_states_, [&](std::int64_t x) {
    return phi[std::size_t(x)] * std::exp(-energy(int(x), j) + free_energy(j));
  });
}

void EnergyModel::export_energy_csv(std::ostream& out) const {
  out << "state_index,grid_index,energy\n";
  for (int x = 0; x < num_states_; ++x)
    for (int j = 0; j < num_lambdas(); ++j)
      out << x << ',' << j << ',' << fmt_g17(energy(x, j)) << '\n';
}

EnergyModel EnergyModel::import_energy_csv(std::istream& in,
                                           std::vector<double> labels) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("state_index", 0) != 0)
    throw std::invalid_argument("model: energy CSV missing header");
  std::map<std::pair<int, int>, double> cells;
  int max_x = -1, max_j = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string sx, sj, se;
    if (!std::getline(ss, sx, ',') || !std::getline(ss, sj, ',') || !std::getline(ss, se))
      throw std::invalid_argument("model: malformed energy CSV row: " + line);
    const int x = std::stoi(sx);
    const int j = std::stoi(sj);
    cells[{x, j}] = std::stod(se);
    max_x = std::max(max_x, x);
    max_j = std::max(max_j, j);
  }
  const int nx = max_x + 1, nl = max_j + 1;
  if (cells.size() != std::size_t(nx) * std::size_t(nl))
    throw std::invalid_argument("model: energy CSV is not a dense table");
  if (labels.empty())
    for (int j = 0; j < nl; ++j) labels.push_back(double(j));
  if (int(labels.size()) != nl)
    throw std::invalid_argument("model: label count does not match energy CSV");
  std::vector<double> table(std::size_t(nx) * std::size_t(nl));
  for (const auto& [key, e] : cells)
    table[std::size_t(key.first) * std::size_t(nl) + std::size_t(key.second)] = e;
  return EnergyModel(nx, std::move(labels), std::move(table));
}

std::vector<double> equispaced_ladder(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("model: ladder needs at least 2 points");
  std::vector<double> v(std::size_t(count), 0.0);
  for (int i = 0; i < count; ++i)
    v[std::size_t(i)] = lo + (hi - lo) * double(i) / double(count - 1);
  return v;
}

namespace {
// Tilted quartic over s in [-1,1]: wells near s = +-0.55, unit barrier
// at the midpoint, steep edges. Calibrated so runs at N=2000, N_I=50
// resolve all pairwise free-energy differences on the 8-point ladder.
double double_well_profile(int x, int num_states) {
  const double s = -1.0 + 2.0 * double(x) / double(num_states - 1);
  const double a2 = 0.3025;
  return (s * s - a2) * (s * s - a2) / (a2 * a2) + 0.3 * s;
}
}  // namespace

EnergyModel make_double_well(int num_states, std::vector<double> ladder) {
  if (ladder.empty()) ladder = equispaced_ladder(0.2, 2.0, 8);
  const std::vector<double> lams = ladder;
  return EnergyModel(num_states, std::move(ladder), [num_states, lams](int x, int j) {
    return lams[std::size_t(j)] * double_well_profile(x, num_states);
  });
}

namespace {
int ising_bond_sum(unsigned state, int length) {
  int h = 0;
  for (int i = 0; i < length; ++i) {
    const int si = (state >> i) & 1u ? 1 : -1;
    const int sj = (state >> ((i + 1) % length)) & 1u ? 1 : -1;
    h += si * sj;
  }
  return h;
}
}  // namespace

EnergyModel make_ising_chain(int length, std::vector<double> ladder) {
  if (length < 2 || length > 12)
    throw std::invalid_argument("model: ising chain length must be in [2,12]");
  if (ladder.empty()) ladder = equispaced_ladder(0.1, 1.0, 8);
  const int n = 1 << length;
  const std::vector<double> betas = ladder;
  std::vector<double> h(std::size_t(n), 0.0);
  for (int x = 0; x < n; ++x) h[std::size_t(x)] = -double(ising_bond_sum(unsigned(x), length));
  return EnergyModel(n, std::move(ladder), [h, betas](int x, int j) {
    return betas[std::size_t(j)] * h[std::size_t(x)];
  });
}

}  // namespace awh
