// awh_lab: configuration-driven runner for extended-ensemble free-energy
// experiments. Subcommands: run | oracle | diagnose | ode.
// Exit codes: 0 ok, 1 check failure, 2 config error, 3 runtime error.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "awh/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"accelerated weight histogram laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  awh::CliOptions opts;
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", seed_override, "seed override")
        ->each([&](const std::string&) { have_seed = true; });
    sub->add_option("--replicas", opts.replicas, "independent replicas")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", opts.quiet, "suppress progress output");
  };

  CLI::App* c_run = app.add_subcommand("run", "run the AWH algorithm");
  add_common(c_run);
  CLI::App* c_oracle = app.add_subcommand("oracle", "exact reference tables");
  add_common(c_oracle);
  CLI::App* c_diag = app.add_subcommand("diagnose", "mean-field and Lyapunov checks");
  add_common(c_diag);
  c_diag->add_option("--samples", opts.diagnose_samples, "sampled design parameters")
      ->check(CLI::PositiveNumber);
  c_diag->add_flag("--corrupt-gradient", opts.corrupt_gradient)->group("");
  CLI::App* c_ode = app.add_subcommand("ode", "integrate the projected limit ODE");
  add_common(c_ode);

  CLI11_PARSE(app, argc, argv);
  if (have_seed) opts.seed = seed_override;

  try {
    const awh::KeyValueConfig cfg = awh::KeyValueConfig::parse_file(config_path);
    opts.out_dir = awh::resolve_out_dir(cfg, opts, config_path);
    if (c_run->parsed()) return awh::cmd_run(cfg, opts, std::cout);
    if (c_oracle->parsed()) return awh::cmd_oracle(cfg, opts, std::cout);
    if (c_diag->parsed()) return awh::cmd_diagnose(cfg, opts, std::cout);
    if (c_ode->parsed()) return awh::cmd_ode(cfg, opts, std::cout);
    return 2;
  } catch (const awh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
