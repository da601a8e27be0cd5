#include <iostream>

#include "CLI11.hpp"
#include "rome/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Response-based optimal memory encoding for noisy reservoirs"};
  app.require_subcommand(1);

  rome::CommandOptions opt;
  std::string out, probe, encoder;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "experiment config (TOML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* probe_cmd = app.add_subcommand("probe", "measure fluctuations and linear response");
  add_common(probe_cmd);
  probe_cmd->add_flag("--analytic", opt.analytic, "closed-form probe (linear model)");

  auto* optimize_cmd = app.add_subcommand("optimize", "build the memory operator and encoder");
  add_common(optimize_cmd);
  optimize_cmd->add_option("--probe", probe, "probe artifact (default <out>/probe.json)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "memory function and task scores of an encoder");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--encoder", encoder, "encoder file (default <out>/encoder.json)");

  auto* sweep_cmd = app.add_subcommand("sweep", "input-power sweep, or direction-plane scan with --plane");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--probe", probe, "probe artifact (default <out>/probe.json)");
  sweep_cmd->add_flag("--plane", opt.plane, "scan the objective over the (ROME, task) direction plane");

  auto* ascent_cmd = app.add_subcommand("ascent", "projected gradient ascent against the ROME encoder");
  add_common(ascent_cmd);
  ascent_cmd->add_option("--probe", probe, "probe artifact (default <out>/probe.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rome::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (!out.empty()) opt.out_dir = out;
  if (!probe.empty()) opt.probe_path = probe;
  if (!encoder.empty()) opt.encoder_path = encoder;
  if (sub->count("--seed") > 0) opt.seed = seed;
  return rome::run_command(sub->get_name(), opt);
}
