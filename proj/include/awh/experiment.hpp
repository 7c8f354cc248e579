#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "awh/awh.hpp"
#include "awh/config.hpp"
#include "awh/ergodic.hpp"
#include "awh/kernel.hpp"
#include "awh/model.hpp"
#include "awh/ode.hpp"

namespace awh {

// A fully resolved experiment: model, kernel, target, constraint box,
// run parameters, observables. Move-only so the kernel's model pointer
// stays stable.
struct Experiment {
  std::unique_ptr<EnergyModel> model;
  std::unique_ptr<TransitionKernel> kernel;
  TargetDistribution rho;
  HyperRectangle box;
  long num_iterations = 0;
  int inner_steps = 1;
  DesignParameter theta0;
  GibbsState start;
  std::uint64_t seed = 1;
  UpdateMode mode = UpdateMode::kLog;
  bool keep_histograms = false;
  std::vector<Observable> observables;
  std::vector<int> targets;
  bool oracle = true;
  double ode_step = 0.01;
  double ode_t_end = 200.0;
  KeyValueConfig resolved;

  AwhConfig awh_config() const;

  Experiment() : rho({0.5, 0.5}), box(HyperRectangle::symmetric(2, 1.0)) {}
  Experiment(Experiment&&) = default;
  Experiment& operator=(Experiment&&) = default;
};

struct CliOptions {
  std::string out_dir;               // empty: resolve from config/env
  std::optional<std::uint64_t> seed; // overrides config
  int replicas = 1;
  bool quiet = false;
  long diagnose_samples = 1000;
  bool corrupt_gradient = false;     // negative-control hook
};

Experiment resolve_experiment(const KeyValueConfig& cfg, const CliOptions& opts);

// exit statuses: 0 ok, 1 check failure (2/3 are mapped by the CLI from
// ConfigError / other exceptions)
int cmd_run(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log);
int cmd_oracle(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log);
int cmd_diagnose(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log);
int cmd_ode(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log);

std::string resolve_out_dir(const KeyValueConfig& cfg, const CliOptions& opts,
                            const std::string& config_path);

}  // namespace awh
