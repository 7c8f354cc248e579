#pragma once

#include <span>
#include <vector>

#include "awh/awh.hpp"
#include "awh/model.hpp"

namespace awh {

// Projected Euler discretization of theta-dot = gbar(theta) + z on a
// hyper-rectangle; the clamp displacement divided by the step realizes
// the reflection term.
struct OdeConfig {
  DesignParameter theta0;
  double step = 0.01;
  double t_end = 200.0;
  HyperRectangle box;

  OdeConfig(DesignParameter theta0_, HyperRectangle box_)
      : theta0(std::move(theta0_)), box(std::move(box_)) {}
  void validate() const;
};

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<DesignParameter> thetas;
  std::vector<double> lyapunov;     // V along the trajectory
  std::vector<int> clamped_coords;  // count of clamped coordinates per step
};

OdeTrajectory integrate(const EnergyModel& model, const TargetDistribution& rho,
                        const OdeConfig& config);

struct DescentReport {
  bool ok = true;
  long first_violation = -1;
  double worst_increase = 0.0;
};

// V must be non-increasing up to per-step slack 1e-10 (1 + V).
DescentReport check_monotone_descent(const OdeTrajectory& traj);

// |V_h(t) - V_{h/2}(t)| / |V_{h/2}(t) - V_{h/4}(t)| at a probe time
// where the flow is still moving; ~2 for a first-order scheme.
double step_halving_ratio(const EnergyModel& model, const TargetDistribution& rho,
                          const OdeConfig& config, double probe_time);

struct OverlayPoint {
  double t = 0.0;
  double v_sa = 0.0;
  double v_ode = 0.0;
};

// Pairs the SA iterates (on the timescale t_n = sum_{i<n} 1/(i+1)) with
// the ODE trajectory for side-by-side output.
std::vector<OverlayPoint> sa_vs_ode_overlay(const EnergyModel& model,
                                            const TargetDistribution& rho,
                                            const AwhTrajectory& sa,
                                            const OdeTrajectory& ode);

}  // namespace awh
