#include "awh/ode.hpp"

#include <cmath>
#include <stdexcept>

#include "awh/diagnostics.hpp"

namespace awh {

void OdeConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("ode: step must be > 0");
  if (!(t_end > 0.0)) throw std::invalid_argument("ode: t_end must be > 0");
  if (int(theta0.size()) != box.dim())
    throw std::invalid_argument("dimension_mismatch: theta0 vs box");
  if (!box.contains(theta0))
    throw std::invalid_argument("ode: theta0 must lie in the box");
}

OdeTrajectory integrate(const EnergyModel& model, const TargetDistribution& rho,
                        const OdeConfig& config) {
  config.validate();
  if (model.num_lambdas() != int(config.theta0.size()))
    throw std::invalid_argument("dimension_mismatch: theta0 vs grid");
  const long steps = long(std::llround(config.t_end / config.step));
  OdeTrajectory traj;
  traj.times.reserve(std::size_t(steps) + 1);
  traj.thetas.reserve(std::size_t(steps) + 1);
  traj.lyapunov.reserve(std::size_t(steps) + 1);
  traj.clamped_coords.reserve(std::size_t(steps) + 1);

  DesignParameter theta = config.theta0;
  traj.times.push_back(0.0);
  traj.thetas.push_back(theta);
  traj.lyapunov.push_back(lyapunov_V(model, theta, rho).value);
  traj.clamped_coords.push_back(0);

  for (long s = 1; s <= steps; ++s) {
    const auto g = gbar_of(model, theta, rho).gbar;
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += config.step * g[j];
    const auto disp = config.box.clamp(theta);
    int clamped = 0;
    for (double d : disp)
      if (d != 0.0) ++clamped;
    traj.times.push_back(double(s) * config.step);
    traj.thetas.push_back(theta);
    traj.lyapunov.push_back(lyapunov_V(model, theta, rho).value);
    traj.clamped_coords.push_back(clamped);
  }
  return traj;
}

DescentReport check_monotone_descent(const OdeTrajectory& traj) {
  DescentReport r;
  for (std::size_t s = 1; s < traj.lyapunov.size(); ++s) {
    const double prev = traj.lyapunov[s - 1];
    const double cur = traj.lyapunov[s];
    const double slack = 1e-10 * (1.0 + prev);
    if (cur > prev + slack) {
      r.ok = false;
      r.first_violation = long(s);
      r.worst_increase = std::max(r.worst_increase, cur - prev);
    }
  }
  return r;
}

double step_halving_ratio(const EnergyModel& model, const TargetDistribution& rho,
                          const OdeConfig& config, double probe_time) {
  auto v_at = [&](double h) {
    OdeConfig c = config;
    c.step = h;
    c.t_end = probe_time;
    const auto traj = integrate(model, rho, c);
    return traj.lyapunov.back();
  };
  const double v0 = v_at(config.step);
  const double v1 = v_at(config.step / 2.0);
  const double v2 = v_at(config.step / 4.0);
  const double d0 = std::abs(v0 - v1);
  const double d1 = std::abs(v1 - v2);
  if (d1 == 0.0) throw std::runtime_error("ode: probe differences vanished");
  return d0 / d1;
}

std::vector<OverlayPoint> sa_vs_ode_overlay(const EnergyModel& model,
                                            const TargetDistribution& rho,
                                            const AwhTrajectory& sa,
                                            const OdeTrajectory& ode) {
  if (sa.thetas.empty() || ode.thetas.empty())
    throw std::invalid_argument("dimension_mismatch: empty trajectory");
  if (sa.thetas.front().size() != ode.thetas.front().size())
    throw std::invalid_argument("dimension_mismatch: SA vs ODE grids");
  std::vector<OverlayPoint> out;
  out.reserve(sa.thetas.size());
  double t = 0.0;
  std::size_t k = 0;
  for (std::size_t n = 0; n < sa.thetas.size(); ++n) {
    OverlayPoint pt;
    pt.t = t;
    pt.v_sa = lyapunov_V(model, sa.thetas[n], rho).value;
    while (k + 1 < ode.times.size() && ode.times[k + 1] <= t) ++k;
    pt.v_ode = ode.lyapunov[k];
    out.push_back(pt);
    t += 1.0 / double(n + 1);  // epsilon_n schedule
  }
  return out;
}

}  // namespace awh
