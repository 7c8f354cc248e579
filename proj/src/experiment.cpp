#include "awh/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "awh/csv.hpp"
#include "awh/diagnostics.hpp"
#include "awh/parallel.hpp"

namespace fs = std::filesystem;

namespace awh {

namespace {

std::unique_ptr<EnergyModel> build_model(const KeyValueConfig& cfg) {
  const std::string name = cfg.get_string_or("model.name", "double_well");
  std::vector<double> ladder;
  if (cfg.has("model.ladder")) {
    ladder = cfg.get_doubles("model.ladder");
  } else if (cfg.has("model.ladder.min") || cfg.has("model.ladder.max") ||
             cfg.has("model.ladder.count")) {
    ladder = equispaced_ladder(cfg.get_double_or("model.ladder.min", 0.2),
                               cfg.get_double_or("model.ladder.max", 2.0),
                               int(cfg.get_int_or("model.ladder.count", 8)));
  }
  if (name == "double_well") {
    return std::make_unique<EnergyModel>(
        make_double_well(int(cfg.get_int_or("model.states", 32)), ladder));
  }
  if (name == "ising_chain") {
    return std::make_unique<EnergyModel>(
        make_ising_chain(int(cfg.get_int_or("model.length", 6)), ladder));
  }
  if (name == "csv") {
    const std::string path = cfg.get_string("model.csv_path");
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open energy CSV " + path);
    std::vector<double> labels;
    if (cfg.has("model.labels")) labels = cfg.get_doubles("model.labels");
    return std::make_unique<EnergyModel>(EnergyModel::import_energy_csv(in, labels));
  }
  cfg.fail("model.name", "expected double_well | ising_chain | csv");
}

std::unique_ptr<TransitionKernel> build_kernel(const KeyValueConfig& cfg,
                                               const EnergyModel& model) {
  std::string name = cfg.get_string_or("kernel.name", "auto");
  if (name == "auto") {
    const int n = model.num_states();
    name = (n > 2 && (n & (n - 1)) == 0 &&
            cfg.get_string_or("model.name", "double_well") == "ising_chain")
               ? "spin_flip"
               : "single_site";
  }
  if (name == "single_site")
    return std::make_unique<TransitionKernel>(model,
                                              single_site_proposal(model.num_states()));
  if (name == "spin_flip") {
    int length = 0;
    for (int n = model.num_states(); n > 1; n >>= 1) ++length;
    if ((1 << length) != model.num_states())
      cfg.fail("kernel.name", "spin_flip needs a power-of-two state count");
    return std::make_unique<TransitionKernel>(model, spin_flip_proposal(length));
  }
  cfg.fail("kernel.name", "expected auto | single_site | spin_flip");
}

TargetDistribution build_rho(const KeyValueConfig& cfg, int num_lambdas) {
  const std::string kind = cfg.get_string_or("rho.kind", "uniform");
  if (kind == "uniform") return TargetDistribution::uniform(num_lambdas);
  if (kind == "explicit") {
    auto v = cfg.get_doubles("rho.values");
    if (int(v.size()) != num_lambdas)
      cfg.fail("rho.values", "need one entry per grid point");
    return TargetDistribution::from_weights(std::move(v));
  }
  cfg.fail("rho.kind", "expected uniform | explicit");
}

HyperRectangle build_box(const KeyValueConfig& cfg, const EnergyModel& model,
                         const TargetDistribution& rho) {
  const std::string kind = cfg.get_string_or("box.kind", "auto");
  if (kind == "auto") {
    // B = 2 max |F + log rho|, floored at 1 so the box never degenerates
    double b = 0.0;
    const auto tstar = model.optimal_theta(rho);
    for (double t : tstar) b = std::max(b, std::abs(t));
    return HyperRectangle::symmetric(model.num_lambdas(), std::max(1.0, 2.0 * b));
  }
  if (kind == "explicit") {
    if (cfg.has("box.bound"))
      return HyperRectangle::symmetric(model.num_lambdas(), cfg.get_double("box.bound"));
    auto lo = cfg.get_doubles("box.lower");
    auto hi = cfg.get_doubles("box.upper");
    if (int(lo.size()) != model.num_lambdas() || int(hi.size()) != model.num_lambdas())
      cfg.fail("box.lower", "need one bound per grid point");
    return HyperRectangle(std::move(lo), std::move(hi));
  }
  cfg.fail("box.kind", "expected auto | explicit");
}

std::vector<Observable> build_observables(const KeyValueConfig& cfg,
                                          const EnergyModel& model) {
  std::vector<Observable> out;
  if (!cfg.has("observables")) return out;
  for (const auto& name : cfg.get_list("observables")) {
    const std::string prefix = "observable." + name + ".";
    const std::string kind = cfg.get_string_or(prefix + "kind", "coordinate");
    if (kind == "coordinate") {
      auto o = Observable::coordinate(model.num_states());
      o.name = name;
      out.push_back(std::move(o));
    } else if (kind == "indicator") {
      auto states = cfg.get_ints(prefix + "states");
      out.push_back(Observable::indicator(name, model.num_states(), states));
    } else if (kind == "constant") {
      auto o = Observable::constant(model.num_states(),
                                    cfg.get_double_or(prefix + "value", 1.0));
      o.name = name;
      out.push_back(std::move(o));
    } else {
      cfg.fail(prefix + "kind", "expected coordinate | indicator | constant");
    }
  }
  return out;
}

void echo_resolved(const Experiment& exp, const std::string& dir) {
  std::ofstream out(fs::path(dir) / "resolved.cfg", std::ios::binary);
  out << exp.resolved.serialize();
}

void write_trajectory_csv(const Experiment& exp, const AwhTrajectory& traj,
                          const std::string& dir) {
  const int nl = exp.model->num_lambdas();
  std::vector<std::string> header{"iter"};
  for (int j = 0; j < nl; ++j) header.push_back("theta_" + std::to_string(j));
  header.push_back("V");
  header.push_back("clamped_coords");
  CsvWriter csv((fs::path(dir) / "trajectory.csv").string(), header);
  for (std::size_t n = 0; n < traj.thetas.size(); ++n) {
    csv.cell((long long)n);
    for (int j = 0; j < nl; ++j) csv.cell(traj.thetas[n][std::size_t(j)]);
    csv.cell(lyapunov_V(*exp.model, traj.thetas[n], exp.rho).value);
    int clamped = 0;
    if (n > 0)
      for (double d : traj.clamp_displacements[n - 1])
        if (d != 0.0) ++clamped;
    csv.cell((long long)clamped);
    csv.end_row();
  }
}

void write_fed_csv(const Experiment& exp, const DesignParameter& theta,
                   const std::string& dir) {
  std::vector<std::string> header{"i", "j", "lambda_i", "lambda_j", "estimate"};
  if (exp.oracle) {
    header.push_back("oracle");
    header.push_back("abs_error");
  }
  CsvWriter csv((fs::path(dir) / "free_energy_differences.csv").string(), header);
  const int nl = exp.model->num_lambdas();
  for (int i = 0; i < nl; ++i)
    for (int j = 0; j < nl; ++j) {
      if (i == j) continue;
      const double est = free_energy_difference(theta, i, j, exp.rho);
      csv.cell(i).cell(j).cell(exp.model->label(i)).cell(exp.model->label(j)).cell(est);
      if (exp.oracle) {
        const double truth = exp.model->free_energy(i) - exp.model->free_energy(j);
        csv.cell(truth).cell(std::abs(est - truth));
      }
      csv.end_row();
    }
}

void write_histograms_csv(const Experiment& exp, const AwhTrajectory& traj,
                          const std::string& dir) {
  const int nl = exp.model->num_lambdas();
  std::vector<std::string> header{"iter"};
  for (int j = 0; j < nl; ++j) header.push_back("w_" + std::to_string(j));
  CsvWriter csv((fs::path(dir) / "histograms.csv").string(), header);
  for (std::size_t n = 0; n < traj.histograms.size(); ++n) {
    csv.cell((long long)n);
    for (int j = 0; j < nl; ++j) csv.cell(traj.histograms[n].w[std::size_t(j)]);
    csv.end_row();
  }
}

int run_single(const Experiment& exp, const std::string& dir, std::ostream& log,
               bool quiet) {
  fs::create_directories(dir);
  echo_resolved(exp, dir);

  std::vector<ErgodicAccumulator> accs;
  for (const auto& obs : exp.observables)
    for (int target : exp.targets) accs.emplace_back(obs, target);

  AwhConfig cfg = exp.awh_config();
  BlockObserver observer;
  if (!accs.empty())
    observer = [&](long, const ChainBlock& block, const DesignParameter& theta) {
      for (auto& acc : accs) acc.absorb_block(*exp.model, block, theta);
    };
  const AwhTrajectory traj = run(cfg, observer);

  write_trajectory_csv(exp, traj, dir);
  write_fed_csv(exp, traj.thetas.back(), dir);
  if (exp.keep_histograms) write_histograms_csv(exp, traj, dir);

  if (!accs.empty()) {
    std::vector<std::string> header{"observable_name", "lambda_label", "estimate"};
    if (exp.oracle) {
      header.push_back("oracle_value");
      header.push_back("abs_error");
    }
    CsvWriter csv((fs::path(dir) / "ergodic_report.csv").string(), header);
    for (const auto& acc : accs) {
      const double est = acc.estimate();
      csv.cell(acc.observable().name).cell(exp.model->label(acc.target())).cell(est);
      if (exp.oracle) {
        const double truth =
            exp.model->expectation(acc.observable().values, acc.target());
        csv.cell(truth).cell(std::abs(est - truth));
      }
      csv.end_row();
    }
  }
  if (!quiet) {
    log << "run: N=" << exp.num_iterations << " N_I=" << exp.inner_steps
        << " seed=" << exp.seed << " -> " << dir << "\n";
    log << "final V = "
        << fmt_g17(lyapunov_V(*exp.model, traj.thetas.back(), exp.rho).value) << "\n";
  }
  return 0;
}

}  // namespace

AwhConfig Experiment::awh_config() const {
  AwhConfig cfg(rho, box);
  cfg.model = model.get();
  cfg.kernel = kernel.get();
  cfg.num_iterations = num_iterations;
  cfg.inner_steps = inner_steps;
  cfg.theta0 = theta0;
  cfg.start = start;
  cfg.seed = seed;
  cfg.mode = mode;
  cfg.keep_histograms = keep_histograms;
  return cfg;
}

Experiment resolve_experiment(const KeyValueConfig& cfg, const CliOptions& opts) {
  Experiment exp;
  exp.model = build_model(cfg);
  exp.kernel = build_kernel(cfg, *exp.model);
  exp.rho = build_rho(cfg, exp.model->num_lambdas());
  exp.box = build_box(cfg, *exp.model, exp.rho);
  exp.num_iterations = cfg.get_int_or("awh.N", 2000);
  exp.inner_steps = int(cfg.get_int_or("awh.N_I", 50));
  exp.seed = opts.seed.value_or(cfg.get_u64_or("awh.seed", 1));
  const std::string mode = cfg.get_string_or("awh.update_mode", "log");
  if (mode == "log")
    exp.mode = UpdateMode::kLog;
  else if (mode == "linear")
    exp.mode = UpdateMode::kLinear;
  else
    cfg.fail("awh.update_mode", "expected log | linear");
  exp.start.x = int(cfg.get_int_or("awh.x0", 0));
  exp.start.lambda = int(cfg.get_int_or("awh.lambda0", 0));
  exp.keep_histograms = cfg.get_bool_or("awh.keep_histograms", false);
  if (cfg.has("awh.theta0") && cfg.get_string("awh.theta0") != "zero") {
    exp.theta0 = cfg.get_doubles("awh.theta0");
    if (int(exp.theta0.size()) != exp.model->num_lambdas())
      cfg.fail("awh.theta0", "need one entry per grid point");
  } else {
    exp.theta0.assign(std::size_t(exp.model->num_lambdas()), 0.0);
  }
  exp.observables = build_observables(cfg, *exp.model);
  if (cfg.has("targets")) {
    exp.targets = cfg.get_ints("targets");
    for (int t : exp.targets)
      if (t < 0 || t >= exp.model->num_lambdas())
        cfg.fail("targets", "grid index out of range");
  } else {
    exp.targets = {exp.model->num_lambdas() / 2};
  }
  exp.oracle = cfg.get_bool_or("oracle", true);
  exp.ode_step = cfg.get_double_or("ode.step", 0.01);
  exp.ode_t_end = cfg.get_double_or("ode.t_end", 200.0);
  cfg.get_string_or("out", "");  // consumed by resolve_out_dir

  const auto unknown = cfg.unconsumed();
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  // echo with every default applied
  KeyValueConfig r = cfg;
  r.set("model.name", cfg.get_string_or("model.name", "double_well"));
  r.set("awh.N", std::to_string(exp.num_iterations));
  r.set("awh.N_I", std::to_string(exp.inner_steps));
  r.set("awh.seed", std::to_string(exp.seed));
  r.set("awh.update_mode", exp.mode == UpdateMode::kLog ? "log" : "linear");
  r.set("awh.x0", std::to_string(exp.start.x));
  r.set("awh.lambda0", std::to_string(exp.start.lambda));
  r.set("rho.kind", cfg.get_string_or("rho.kind", "uniform"));
  r.set("box.kind", cfg.get_string_or("box.kind", "auto"));
  {
    std::string lo, hi;
    for (int i = 0; i < exp.box.dim(); ++i) {
      if (i) {
        lo += ", ";
        hi += ", ";
      }
      lo += fmt_g17(exp.box.lower(i));
      hi += fmt_g17(exp.box.upper(i));
    }
    r.set("box.lower", lo);
    r.set("box.upper", hi);
  }
  std::string targets;
  for (std::size_t i = 0; i < exp.targets.size(); ++i)
    targets += (i ? ", " : "") + std::to_string(exp.targets[std::size_t(i)]);
  r.set("targets", targets);
  r.set("oracle", exp.oracle ? "on" : "off");
  r.set("ode.step", fmt_g17(exp.ode_step));
  r.set("ode.t_end", fmt_g17(exp.ode_t_end));
  exp.resolved = std::move(r);
  return exp;
}

std::string resolve_out_dir(const KeyValueConfig& cfg, const CliOptions& opts,
                            const std::string& config_path) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  const std::string from_cfg = cfg.get_string_or("out", "");
  if (!from_cfg.empty()) return from_cfg;
  const char* root = std::getenv("AWH_LAB_OUT");
  const std::string stem = fs::path(config_path).stem().string();
  return (fs::path(root ? root : ".") / (stem + "_out")).string();
}

int cmd_run(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log) {
  Experiment exp = resolve_experiment(cfg, opts);
  const std::string dir = opts.out_dir;
  if (opts.replicas <= 1) return run_single(exp, dir, log, opts.quiet);

  // independent replicas: stream r uses seed + r, outputs land per replica
  std::vector<int> status(std::size_t(opts.replicas), 0);
  std::vector<std::string> errors(std::size_t(opts.replicas));
  par::for_index(opts.replicas, [&](std::int64_t r) {
    try {
      CliOptions sub = opts;
      sub.seed = exp.seed + std::uint64_t(r);
      Experiment rep = resolve_experiment(cfg, sub);
      char name[32];
      std::snprintf(name, sizeof(name), "replica_%03d", int(r));
      std::ostringstream sink;
      status[std::size_t(r)] =
          run_single(rep, (fs::path(dir) / name).string(), sink, true);
    } catch (const std::exception& e) {
      status[std::size_t(r)] = 3;
      errors[std::size_t(r)] = e.what();
    }
  });
  for (int r = 0; r < opts.replicas; ++r) {
    if (status[std::size_t(r)] != 0)
      throw std::runtime_error("replica " + std::to_string(r) + ": " +
                               errors[std::size_t(r)]);
    if (!opts.quiet) log << "replica " << r << " done\n";
  }
  return 0;
}

int cmd_oracle(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log) {
  Experiment exp = resolve_experiment(cfg, opts);
  const std::string dir = opts.out_dir;
  fs::create_directories(dir);
  echo_resolved(exp, dir);
  const int nl = exp.model->num_lambdas();

  {
    CsvWriter csv((fs::path(dir) / "free_energy.csv").string(),
                  {"grid_index", "lambda", "F"});
    for (int j = 0; j < nl; ++j) {
      csv.cell(j).cell(exp.model->label(j)).cell(exp.model->free_energy(j));
      csv.end_row();
    }
  }
  {
    const auto tstar = exp.model->optimal_theta(exp.rho);
    CsvWriter csv((fs::path(dir) / "theta_star.csv").string(),
                  {"grid_index", "lambda", "theta_star"});
    for (int j = 0; j < nl; ++j) {
      csv.cell(j).cell(exp.model->label(j)).cell(tstar[std::size_t(j)]);
      csv.end_row();
    }
  }
  if (!exp.observables.empty()) {
    CsvWriter csv((fs::path(dir) / "expectations.csv").string(),
                  {"observable_name", "lambda_label", "expectation", "zeta_star"});
    for (const auto& obs : exp.observables)
      for (int t : exp.targets) {
        csv.cell(obs.name)
            .cell(exp.model->label(t))
            .cell(exp.model->expectation(obs.values, t))
            .cell(optimal_zeta(*exp.model, exp.rho, t, obs));
        csv.end_row();
      }
  }
  {
    std::ofstream out(fs::path(dir) / "energy_table.csv", std::ios::binary);
    exp.model->export_energy_csv(out);
  }
  if (!opts.quiet) log << "oracle tables -> " << dir << "\n";
  return 0;
}

int cmd_diagnose(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log) {
  Experiment exp = resolve_experiment(cfg, opts);
  const std::string dir = opts.out_dir;
  fs::create_directories(dir);
  echo_resolved(exp, dir);
  const long K = opts.diagnose_samples;

  // deterministic battery: sample points drawn serially, rows evaluated
  // in parallel into their own slots
  SplitMix64 rng(exp.seed);
  std::vector<DesignParameter> thetas;
  thetas.reserve(std::size_t(K));
  thetas.push_back(exp.model->optimal_theta(exp.rho));  // exact row first
  for (long k = 1; k < K; ++k) thetas.push_back(sample_point(exp.box, rng));

  struct Row {
    double v, inner, variance, identity_residual, grad_rel_err;
    bool pass;
  };
  std::vector<Row> rows;
  rows.resize(std::size_t(K));
  const Observable* phi = exp.observables.empty() ? nullptr : &exp.observables[0];
  const int target = exp.targets[0];
  const double delta = phi ? lemma_delta(*exp.model, exp.box, *phi) : 0.0;
  std::vector<double> vdelta_inner(std::size_t(K), 0.0);
  SplitMix64 zeta_rng(exp.seed ^ 0x5eedULL);
  std::vector<double> zetas(std::size_t(K), 0.0);
  if (phi)
    for (long k = 0; k < K; ++k)
      zetas[std::size_t(k)] =
          k == 0 ? optimal_zeta(*exp.model, exp.rho, target, *phi)
                 : phi->bound * (2.0 * zeta_rng.next_double() - 1.0);

  par::for_index(K, [&](std::int64_t k) {
    const auto& theta = thetas[std::size_t(k)];
    Row& row = rows[std::size_t(k)];
    auto lv = lyapunov_V(*exp.model, theta, exp.rho);
    const auto g = gbar_of(*exp.model, theta, exp.rho).gbar;
    if (opts.corrupt_gradient && !lv.gradient.empty()) lv.gradient[0] += 1e-3;
    row.v = lv.value;
    row.inner = dot(lv.gradient, g);
    row.variance = gbar_variance(*exp.model, theta, exp.rho);
    row.identity_residual = std::abs(row.inner + 2.0 * row.variance);
    // central differences, step 1e-5
    double worst = 0.0;
    const double h = 1e-5;
    DesignParameter probe = theta;
    double gnorm = 0.0;
    for (double gc : lv.gradient) gnorm = std::max(gnorm, std::abs(gc));
    for (std::size_t j = 0; j < theta.size(); ++j) {
      probe[j] = theta[j] + h;
      const double up = lyapunov_V(*exp.model, probe, exp.rho).value;
      probe[j] = theta[j] - h;
      const double dn = lyapunov_V(*exp.model, probe, exp.rho).value;
      probe[j] = theta[j];
      const double fd = (up - dn) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - lv.gradient[j]));
    }
    row.grad_rel_err = worst / std::max(gnorm, 1e-12);
    row.pass = row.identity_residual <= 1e-12 && row.inner <= 1e-14 &&
               row.grad_rel_err <= 1e-6;
    if (phi) {
      const auto vd = lyapunov_V_delta(*exp.model, theta, zetas[std::size_t(k)],
                                       exp.rho, *phi, target, delta);
      const auto ge = extended_gbar(*exp.model, theta, zetas[std::size_t(k)],
                                    exp.rho, *phi, target);
      vdelta_inner[std::size_t(k)] = dot(vd.gradient, ge);
      row.pass = row.pass && vdelta_inner[std::size_t(k)] <= 1e-12;
    }
  });

  {
    std::vector<std::string> header{"sample",   "V",
                                    "inner_product", "variance",
                                    "identity_residual", "grad_rel_err"};
    if (phi) header.push_back("vdelta_inner");
    header.push_back("pass");
    CsvWriter csv((fs::path(dir) / "diagnostics.csv").string(), header);
    for (long k = 0; k < K; ++k) {
      const Row& row = rows[std::size_t(k)];
      csv.cell(k).cell(row.v).cell(row.inner).cell(row.variance);
      csv.cell(row.identity_residual).cell(row.grad_rel_err);
      if (phi) csv.cell(vdelta_inner[std::size_t(k)]);
      csv.cell((long long)(row.pass ? 1 : 0));
      csv.end_row();
    }
  }

  // Jensen identity battery on random instances
  double jensen_worst = 0.0;
  {
    SplitMix64 jrng(exp.seed ^ 0x6a656eULL);
    for (int it = 0; it < 1000; ++it) {
      const int n = 2 + int(jrng.next_u64() % 7);  // 2..8
      std::vector<double> xs(std::size_t(n), 0.0), ps(std::size_t(n), 0.0);
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        xs[std::size_t(i)] = 2.0 * jrng.next_double() - 1.0;
        ps[std::size_t(i)] = 0.05 + jrng.next_double();
        total += ps[std::size_t(i)];
      }
      for (int i = 0; i < n; ++i) ps[std::size_t(i)] /= total;
      jensen_worst = std::max(jensen_worst, jensen_difference_check(xs, ps).residual);
    }
  }

  // Lemma 1 brute force when the instance permits it
  double lemma1_worst = -1.0;
  if (exp.model->num_states() <= 6 && exp.model->num_lambdas() <= 3 &&
      exp.inner_steps <= 3) {
    SplitMix64 lrng(exp.seed ^ 0x11ULL);
    lemma1_worst = 0.0;
    for (int it = 0; it < 50; ++it) {
      const auto theta = sample_point(exp.box, lrng);
      const auto bf = bruteforce_mean_h(*exp.model, *exp.kernel, theta, exp.rho,
                                        exp.inner_steps);
      const auto g = gbar_of(*exp.model, theta, exp.rho).gbar;
      for (std::size_t j = 0; j < g.size(); ++j)
        lemma1_worst = std::max(lemma1_worst, std::abs(bf[j] - g[j]));
    }
  }

  const double m = exact_m(*exp.model, exp.box);
  bool all_pass = jensen_worst <= 1e-12;
  double identity_worst = 0.0, inner_worst = -1.0, grad_worst = 0.0,
         vdelta_worst = -1.0;
  for (const Row& row : rows) {
    identity_worst = std::max(identity_worst, row.identity_residual);
    inner_worst = std::max(inner_worst, row.inner);
    grad_worst = std::max(grad_worst, row.grad_rel_err);
    all_pass = all_pass && row.pass;
  }
  for (double v : vdelta_inner) vdelta_worst = std::max(vdelta_worst, v);
  if (lemma1_worst > 1e-12) all_pass = false;

  {
    CsvWriter csv((fs::path(dir) / "summary.csv").string(),
                  {"check", "value", "threshold", "pass"});
    auto line = [&](const std::string& name, double value, double thr, bool ok) {
      csv.cell(name).cell(value).cell(thr).cell((long long)(ok ? 1 : 0));
      csv.end_row();
    };
    line("descent_identity_max_residual", identity_worst, 1e-12,
         identity_worst <= 1e-12);
    line("descent_inner_product_max", inner_worst, 1e-14, inner_worst <= 1e-14);
    line("grad_rel_err_max", grad_worst, 1e-6, grad_worst <= 1e-6);
    line("jensen_max_residual", jensen_worst, 1e-12, jensen_worst <= 1e-12);
    if (phi)
      line("vdelta_inner_max", vdelta_worst, 1e-12, vdelta_worst <= 1e-12);
    if (lemma1_worst >= 0.0)
      line("lemma1_max_gap", lemma1_worst, 1e-12, lemma1_worst <= 1e-12);
    line("exact_m", m, 0.0, m > 0.0);
    if (phi) line("delta", delta, 0.0, delta > 0.0);
  }
  if (!opts.quiet)
    log << "diagnose: K=" << K << " all_pass=" << (all_pass ? 1 : 0) << " -> " << dir
        << "\n";
  return all_pass ? 0 : 1;
}

int cmd_ode(const KeyValueConfig& cfg, const CliOptions& opts, std::ostream& log) {
  Experiment exp = resolve_experiment(cfg, opts);
  const std::string dir = opts.out_dir;
  fs::create_directories(dir);
  echo_resolved(exp, dir);

  OdeConfig ocfg(exp.theta0, exp.box);
  ocfg.step = exp.ode_step;
  ocfg.t_end = exp.ode_t_end;
  const auto traj = integrate(*exp.model, exp.rho, ocfg);

  {
    const int nl = exp.model->num_lambdas();
    std::vector<std::string> header{"t"};
    for (int j = 0; j < nl; ++j) header.push_back("theta_" + std::to_string(j));
    header.push_back("V");
    header.push_back("clamped_coords");
    CsvWriter csv((fs::path(dir) / "ode_trajectory.csv").string(), header);
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
      csv.cell(traj.times[s]);
      for (int j = 0; j < nl; ++j) csv.cell(traj.thetas[s][std::size_t(j)]);
      csv.cell(traj.lyapunov[s]).cell((long long)traj.clamped_coords[s]);
      csv.end_row();
    }
  }

  const auto descent = check_monotone_descent(traj);

  // overlay against an AWH run with the same configuration
  const AwhTrajectory sa = run(exp.awh_config());
  const auto overlay = sa_vs_ode_overlay(*exp.model, exp.rho, sa, traj);
  {
    CsvWriter csv((fs::path(dir) / "overlay.csv").string(), {"t", "V_sa", "V_ode"});
    for (const auto& pt : overlay) {
      csv.cell(pt.t).cell(pt.v_sa).cell(pt.v_ode);
      csv.end_row();
    }
  }
  if (!opts.quiet) {
    log << "ode: V(t_end) = " << fmt_g17(traj.lyapunov.back())
        << " descent_ok=" << (descent.ok ? 1 : 0);
    if (!descent.ok) log << " first_violation=" << descent.first_violation;
    log << " -> " << dir << "\n";
  }
  return descent.ok ? 0 : 1;
}

}  // namespace awh
