#include "awh/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "awh/numeric.hpp"

namespace awh {

std::vector<double> h_of(const EnergyModel& model, std::span<const double> theta,
                         const ChainBlock& block, const TargetDistribution& rho) {
  const int nl = model.num_lambdas();
  std::vector<double> cond(std::size_t(nl), 0.0);
  std::vector<Kahan> acc{std::size_t(nl), Kahan{}};
  for (int x : block.xs) {
    model.conditional_lambda_into(x, theta, cond);
    for (int j = 0; j < nl; ++j) acc[std::size_t(j)].add(cond[std::size_t(j)]);
  }
  std::vector<double> h(std::size_t(nl), 0.0);
  for (int j = 0; j < nl; ++j)
    h[std::size_t(j)] =
        1.0 - acc[std::size_t(j)].value() / (double(block.size()) * rho[j]);
  return h;
}

std::vector<double> extended_h(const EnergyModel& model,
                               std::span<const double> theta, double zeta,
                               const ChainBlock& block,
                               const TargetDistribution& rho,
                               const Observable& phi, int target_j) {
  auto h = h_of(model, theta, block, rho);
  h.push_back(block_average_phi(model, block, theta, target_j, phi) - zeta);
  return h;
}

MeanFieldValue gbar_of(const EnergyModel& model, std::span<const double> theta,
                       const TargetDistribution& rho) {
  const auto p = model.marginal_lambda(theta);
  MeanFieldValue g;
  g.gbar.resize(p.size());
  for (int j = 0; j < int(p.size()); ++j)
    g.gbar[std::size_t(j)] = 1.0 - p[std::size_t(j)] / rho[j];
  return g;
}

std::vector<double> extended_gbar(const EnergyModel& model,
                                  std::span<const double> theta, double zeta,
                                  const TargetDistribution& rho,
                                  const Observable& phi, int target_j) {
  auto g = gbar_of(model, theta, rho).gbar;
  const auto p = model.marginal_lambda(theta);
  g.push_back(p[std::size_t(target_j)] * model.expectation(phi.values, target_j) -
              zeta);
  return g;
}

namespace {

void require_tiny(const EnergyModel& model, int inner_steps) {
  if (model.num_states() > 6 || model.num_lambdas() > 3 || inner_steps > 3)
    throw std::runtime_error(
        "instance_too_large: path enumeration needs |X|<=6, |L|<=3, N_I<=3");
}

struct PathContext {
  const EnergyModel* model;
  int nl = 0, nx = 0, steps = 0;
  std::vector<std::vector<double>> q;     // per lambda, row-major
  std::vector<std::vector<double>> cond;  // conditional_lambda per x
  const TargetDistribution* rho;
  std::vector<Kahan>* acc;  // per lambda accumulation of w * h
  std::vector<double> cond_sum;  // running sum_k cond(.|x_k) along the path
};

// DFS over (x_k, lambda_k), k = 1..N_I, accumulating the Eq.-style path
// weight; at the leaf adds w * h(block) to the per-coordinate sums.
void enumerate_paths(PathContext& ctx, int depth, int prev_x, int prev_lambda,
                     double weight) {
  if (depth == ctx.steps) {
    for (int t = 0; t < ctx.nl; ++t) {
      const double h =
          1.0 - ctx.cond_sum[std::size_t(t)] / (double(ctx.steps) * (*ctx.rho)[t]);
      (*ctx.acc)[std::size_t(t)].add(weight * h);
    }
    return;
  }
  for (int x = 0; x < ctx.nx; ++x) {
    const double qstep =
        ctx.q[std::size_t(prev_lambda)][std::size_t(prev_x) * std::size_t(ctx.nx) +
                                        std::size_t(x)];
    if (qstep == 0.0) continue;
    for (int t = 0; t < ctx.nl; ++t)
      ctx.cond_sum[std::size_t(t)] += ctx.cond[std::size_t(x)][std::size_t(t)];
    for (int lam = 0; lam < ctx.nl; ++lam) {
      const double w =
          weight * qstep * ctx.cond[std::size_t(x)][std::size_t(lam)];
      enumerate_paths(ctx, depth + 1, x, lam, w);
    }
    for (int t = 0; t < ctx.nl; ++t)
      ctx.cond_sum[std::size_t(t)] -= ctx.cond[std::size_t(x)][std::size_t(t)];
  }
}

PathContext make_context(const EnergyModel& model, const TransitionKernel& kernel,
                         std::span<const double> theta,
                         const TargetDistribution& rho, int inner_steps,
                         std::vector<Kahan>* acc) {
  PathContext ctx;
  ctx.model = &model;
  ctx.nl = model.num_lambdas();
  ctx.nx = model.num_states();
  ctx.steps = inner_steps;
  ctx.rho = &rho;
  ctx.acc = acc;
  ctx.cond_sum.assign(std::size_t(ctx.nl), 0.0);
  for (int j = 0; j < ctx.nl; ++j) ctx.q.push_back(kernel.dense_matrix(j));
  for (int x = 0; x < ctx.nx; ++x) ctx.cond.push_back(model.conditional_lambda(x, theta));
  return ctx;
}

}  // namespace

std::vector<double> bruteforce_mean_h(const EnergyModel& model,
                                      const TransitionKernel& kernel,
                                      std::span<const double> theta,
                                      const TargetDistribution& rho,
                                      int inner_steps) {
  require_tiny(model, inner_steps);
  std::vector<Kahan> acc(std::size_t(model.num_lambdas()));
  PathContext ctx = make_context(model, kernel, theta, rho, inner_steps, &acc);
  const auto marginal = model.marginal_lambda(theta);
  // initial law: p_{X|Lambda}(x0|lambda0) p_{Lambda|Theta}(lambda0|theta)
  for (int lam0 = 0; lam0 < ctx.nl; ++lam0) {
    const auto gibbs = model.gibbs_distribution(lam0);
    for (int x0 = 0; x0 < ctx.nx; ++x0) {
      const double w0 = gibbs[std::size_t(x0)] * marginal[std::size_t(lam0)];
      enumerate_paths(ctx, 0, x0, lam0, w0);
    }
  }
  std::vector<double> out(std::size_t(ctx.nl));
  for (int t = 0; t < ctx.nl; ++t) out[std::size_t(t)] = acc[std::size_t(t)].value();
  return out;
}

std::vector<double> g_of(const EnergyModel& model, const TransitionKernel& kernel,
                         std::span<const double> theta, const ChainBlock& from,
                         const TargetDistribution& rho, int inner_steps) {
  require_tiny(model, inner_steps);
  std::vector<Kahan> acc(std::size_t(model.num_lambdas()));
  PathContext ctx = make_context(model, kernel, theta, rho, inner_steps, &acc);
  // boundary convention: eta(0) = xi(N_I), eta_hat(N_I) = xi(2 N_I)
  enumerate_paths(ctx, 0, from.xs.back(), from.lambdas.back(), 1.0);
  std::vector<double> out(std::size_t(ctx.nl));
  for (int t = 0; t < ctx.nl; ++t) out[std::size_t(t)] = acc[std::size_t(t)].value();
  return out;
}

std::vector<double> g_of_marginalized(const EnergyModel& model,
                                      const TransitionKernel& kernel,
                                      std::span<const double> theta,
                                      const ChainBlock& from,
                                      const TargetDistribution& rho,
                                      int inner_steps) {
  const int nx = model.num_states();
  const int nl = model.num_lambdas();
  std::vector<std::vector<double>> q;
  for (int j = 0; j < nl; ++j) q.push_back(kernel.dense_matrix(j));
  std::vector<std::vector<double>> cond;
  for (int x = 0; x < nx; ++x) cond.push_back(model.conditional_lambda(x, theta));

  // joint law of (X_k, Lambda_k) given the endpoint of `from`
  std::vector<double> dist(std::size_t(nx) * std::size_t(nl), 0.0);
  dist[std::size_t(from.xs.back()) * std::size_t(nl) +
       std::size_t(from.lambdas.back())] = 1.0;
  std::vector<Kahan> mean_cond{std::size_t(nl), Kahan{}};
  for (int k = 0; k < inner_steps; ++k) {
    std::vector<double> next(std::size_t(nx) * std::size_t(nl), 0.0);
    for (int x = 0; x < nx; ++x)
      for (int lam = 0; lam < nl; ++lam) {
        const double w = dist[std::size_t(x) * std::size_t(nl) + std::size_t(lam)];
        if (w == 0.0) continue;
        for (int y = 0; y < nx; ++y) {
          const double qstep =
              q[std::size_t(lam)][std::size_t(x) * std::size_t(nx) + std::size_t(y)];
          if (qstep == 0.0) continue;
          for (int mu = 0; mu < nl; ++mu)
            next[std::size_t(y) * std::size_t(nl) + std::size_t(mu)] +=
                w * qstep * cond[std::size_t(y)][std::size_t(mu)];
        }
      }
    dist = std::move(next);
    for (int y = 0; y < nx; ++y) {
      Kahan xmass;
      for (int mu = 0; mu < nl; ++mu)
        xmass.add(dist[std::size_t(y) * std::size_t(nl) + std::size_t(mu)]);
      for (int t = 0; t < nl; ++t)
        mean_cond[std::size_t(t)].add(xmass.value() * cond[std::size_t(y)][std::size_t(t)]);
    }
  }
  std::vector<double> out(std::size_t(nl), 0.0);
  for (int t = 0; t < nl; ++t)
    out[std::size_t(t)] =
        1.0 - mean_cond[std::size_t(t)].value() / (double(inner_steps) * rho[t]);
  return out;
}

std::vector<double> delta_M(const EnergyModel& model, const TransitionKernel& kernel,
                            std::span<const double> theta,
                            const ChainBlock& block_next,
                            const ChainBlock& block_current,
                            const TargetDistribution& rho) {
  const auto h = h_of(model, theta, block_next, rho);
  const auto g = g_of(model, kernel, theta, block_current, rho, block_next.size());
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i] - g[i];
  return out;
}

LyapunovValue lyapunov_V(const EnergyModel& model, std::span<const double> theta,
                         const TargetDistribution& rho) {
  const auto p = model.marginal_lambda(theta);
  const auto g = gbar_of(model, theta, rho).gbar;
  const int nl = int(p.size());
  LyapunovValue v;
  Kahan value, cross;
  for (int j = 0; j < nl; ++j) {
    value.add(rho[j] * g[std::size_t(j)] * g[std::size_t(j)]);
    cross.add(g[std::size_t(j)] * p[std::size_t(j)]);
  }
  v.value = value.value();
  const double s = cross.value();
  v.gradient.resize(std::size_t(nl));
  for (int j = 0; j < nl; ++j)
    v.gradient[std::size_t(j)] = 2.0 * p[std::size_t(j)] * (s - g[std::size_t(j)]);
  return v;
}

double descent_inner_product(const EnergyModel& model,
                             std::span<const double> theta,
                             const TargetDistribution& rho) {
  const auto v = lyapunov_V(model, theta, rho);
  const auto g = gbar_of(model, theta, rho).gbar;
  return dot(v.gradient, g);
}

double gbar_variance(const EnergyModel& model, std::span<const double> theta,
                     const TargetDistribution& rho) {
  const auto p = model.marginal_lambda(theta);
  const auto g = gbar_of(model, theta, rho).gbar;
  return weighted_variance(p, g);
}

LyapunovValue lyapunov_V_delta(const EnergyModel& model,
                               std::span<const double> theta, double zeta,
                               const TargetDistribution& rho,
                               const Observable& phi, int target_j,
                               double delta) {
  LyapunovValue v = lyapunov_V(model, theta, rho);
  const double zstar = optimal_zeta(model, rho, target_j, phi);
  v.value += delta * (zstar - zeta) * (zstar - zeta);
  v.gradient.push_back(-2.0 * delta * (zstar - zeta));
  return v;
}

double exact_m(const EnergyModel& model, const HyperRectangle& box) {
  const int nl = model.num_lambdas();
  if (box.dim() != nl) throw std::invalid_argument("dimension_mismatch: box vs grid");
  double m = std::numeric_limits<double>::infinity();
  // p(sigma|theta) is increasing in theta(sigma) and decreasing in every
  // other coordinate, so the per-sigma infimum sits at one vertex.
  std::vector<double> vertex(std::size_t(nl), 0.0);
  for (int sigma = 0; sigma < nl; ++sigma) {
    for (int t = 0; t < nl; ++t)
      vertex[std::size_t(t)] = t == sigma ? box.lower(t) : box.upper(t);
    const auto p = model.marginal_lambda(vertex);
    m = std::min(m, p[std::size_t(sigma)]);
  }
  return m;
}

double lemma_delta(const EnergyModel& model, const HyperRectangle& box,
                   const Observable& phi) {
  if (phi.bound == 0.0)
    throw std::invalid_argument("observable: zero bound, delta undefined");
  const double m = exact_m(model, box);
  return m * m / (2.0 * phi.bound * phi.bound);
}

JensenReport jensen_difference_check(std::span<const double> xs,
                                     std::span<const double> ps) {
  const int n = int(xs.size());
  if (n < 2 || int(ps.size()) != n)
    throw std::invalid_argument("invalid_probability: need n >= 2 matching vectors");
  Kahan total;
  for (double p : ps) {
    if (!(p > 0.0))
      throw std::invalid_argument("invalid_probability: entries must be > 0");
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > 1e-12)
    throw std::invalid_argument("invalid_probability: entries must sum to 1");

  JensenReport r;
  Kahan mean, second;
  for (int i = 0; i < n; ++i) {
    mean.add(xs[std::size_t(i)] * ps[std::size_t(i)]);
    second.add(xs[std::size_t(i)] * xs[std::size_t(i)] * ps[std::size_t(i)]);
  }
  r.lhs = mean.value() * mean.value() - second.value();

  Kahan rhs;
  Kahan prefix_mass, prefix_mean_num;
  prefix_mass.add(ps[0]);
  prefix_mean_num.add(xs[0] * ps[0]);
  for (int j = 1; j < n; ++j) {
    const double pj = ps[std::size_t(j)];
    const double before = prefix_mass.value();
    const double mean_before = prefix_mean_num.value() / before;
    const double d = xs[std::size_t(j)] - mean_before;
    rhs.add(-pj * before / (before + pj) * d * d);
    prefix_mass.add(pj);
    prefix_mean_num.add(xs[std::size_t(j)] * pj);
  }
  r.rhs = rhs.value();
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace awh
