// Command line front end. Subcommands share one configuration schema; every
// run echoes its resolved configuration and a manifest into the output
// directory so results are reproducible from the artifacts alone.
//
// Exit codes: 0 pass, 1 internal error, 2 configuration problem,
// 3 statistical failure, 4 blowups beyond one percent of paths.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rolling/config.hpp"
#include "rolling/errors.hpp"
#include "rolling/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  int paths = 0;
  int steps = 0;
  std::string out;
  int threads = 0;

  CLI::Option* config_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* paths_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void attach_common_flags(CLI::App* cmd, CommonFlags& flags) {
  flags.config_opt =
      cmd->add_option("--config", flags.config_path,
                      "JSON configuration file (defaults apply when absent)")
          ->check(CLI::ExistingFile);
  flags.seed_opt =
      cmd->add_option("--seed", flags.seed, "Base seed for the path sampler");
  flags.paths_opt =
      cmd->add_option("--paths", flags.paths, "Number of Monte Carlo paths");
  flags.steps_opt =
      cmd->add_option("--steps", flags.steps,
                      "Grid resolution (power of two, at least 2)");
  flags.out_opt = cmd->add_option("--out", flags.out, "Output directory");
  flags.threads_opt = cmd->add_option(
      "--threads", flags.threads,
      "Worker threads (0: ROLLING_LAB_THREADS, then hardware concurrency)");
}

rolling::ExperimentConfig build_config(const CommonFlags& flags) {
  rolling::ExperimentConfig config =
      flags.config_opt->count() > 0
          ? rolling::load_config_file(flags.config_path)
          : rolling::ExperimentConfig{};
  rolling::ConfigOverrides overrides;
  if (flags.seed_opt->count() > 0) overrides.seed = flags.seed;
  if (flags.paths_opt->count() > 0) overrides.paths = flags.paths;
  if (flags.steps_opt->count() > 0) overrides.n_steps = flags.steps;
  if (flags.out_opt->count() > 0) overrides.out = flags.out;
  if (flags.threads_opt->count() > 0) overrides.threads = flags.threads;
  rolling::apply_overrides(config, overrides);
  rolling::finalize_config(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Monte Carlo laboratory for noise-driven flows on nilpotent groups"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const rolling::ExperimentConfig&);
  };
  const std::vector<Entry> entries = {
      {"simulate", "Integrate paths and write driving noise and trajectories",
       rolling::cmd_simulate},
      {"verify-derivative",
       "Compare the variation-based derivative against difference quotients",
       rolling::cmd_verify_derivative},
      {"cutoff-study",
       "Paired convergence study of the truncated coefficients",
       rolling::cmd_cutoff_study},
      {"ibp", "Monte Carlo check of the directional-derivative duality",
       rolling::cmd_ibp},
      {"adjoint-crosscheck",
       "Rate fit for the two adjoint-process integration routes",
       rolling::cmd_adjoint_crosscheck},
  };

  std::vector<CommonFlags> flags(entries.size());
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(entries[i].name, entries[i].help);
    attach_common_flags(cmd, flags[i]);
    commands.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!commands[i]->parsed()) continue;
      const rolling::ExperimentConfig config = build_config(flags[i]);
      return entries[i].run(config);
    }
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const rolling::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rolling::BlowupError& e) {
    std::fprintf(stderr, "blowup: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
