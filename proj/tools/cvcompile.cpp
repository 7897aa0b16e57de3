// Command-line front end: seeded, reproducible experiment runs with CSV
// output. Exit codes: 0 success, 2 configuration error, 3 resource refusal.

#include <CLI11.hpp>
#include <iostream>

#include "cvc/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset_name;
  std::string out;
  std::int64_t seed = -1;
  int threads = 0;
  long long shots = -1;
  int cutoff = 0;
  bool allow_large = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "configuration file (key = value lines)");
  cmd->add_option("--preset", flags.preset_name, "named experiment preset");
  cmd->add_option("--seed", flags.seed, "random seed (mandatory for stochastic runs)");
  cmd->add_option("--out", flags.out, "output CSV path (default: stdout)");
  cmd->add_option("--threads", flags.threads, "worker threads (results are thread-count independent)");
  cmd->add_option("--shots", flags.shots, "simulate finite measurement shots per probability");
  cmd->add_option("--cutoff", flags.cutoff, "override the Fock cutoff");
  cmd->add_flag("--allow-large", flags.allow_large, "lift the 2^24-amplitude resource guard");
}

cvc::ExperimentConfig assemble(const CommonFlags& flags, cvc::Command command) {
  cvc::ExperimentConfig config;
  bool have_base = false;
  if (!flags.preset_name.empty()) {
    config = cvc::preset(flags.preset_name);
    have_base = true;
  }
  if (!flags.config_path.empty()) {
    config = cvc::parse_config_file(flags.config_path);
    have_base = true;
  }
  if (!have_base) config.command = command;
  if (config.command != command)
    throw std::invalid_argument("config/preset command does not match the subcommand");
  if (flags.seed >= 0) config.seed = std::uint64_t(flags.seed);
  if (!flags.out.empty()) config.out = flags.out;
  if (flags.threads > 0) config.threads = flags.threads;
  if (flags.shots >= 0) config.shots = flags.shots;
  if (flags.cutoff > 0) config.cutoff = flags.cutoff;
  if (flags.allow_large) config.allow_large = true;
  return config;
}

int run_command(const CommonFlags& flags, cvc::Command command) {
  cvc::ExperimentConfig config;
  try {
    config = assemble(flags, command);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    cvc::ExperimentRecord record = cvc::run(config);
    if (config.out.empty())
      record.write(std::cout);
    else
      record.write_file(config.out);
    return 0;
  } catch (const cvc::resource_refusal& e) {
    std::cerr << "resource refusal: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cvcompile: continuous-variable compiling experiments and "
               "no-free-lunch verification"};
  app.require_subcommand(0, 1);

  CommonFlags compile_flags, nfl_flags, landscape_flags, verify_flags;
  CLI::App* compile = app.add_subcommand("compile", "train an ansatz against a target unitary");
  add_common(compile, compile_flags);
  CLI::App* nfl = app.add_subcommand("nfl", "Monte Carlo risk grids for the no-free-lunch bounds");
  add_common(nfl, nfl_flags);
  CLI::App* landscape = app.add_subcommand("landscape", "cost landscape scans and gradient statistics");
  add_common(landscape, landscape_flags);
  CLI::App* verify = app.add_subcommand("verify", "closed-form verification suite");
  add_common(verify, verify_flags);

  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "print available presets and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list_presets) {
    for (const auto& name : cvc::preset_names()) std::cout << name << "\n";
    return 0;
  }

  if (compile->parsed()) return run_command(compile_flags, cvc::Command::Compile);
  if (nfl->parsed()) return run_command(nfl_flags, cvc::Command::Nfl);
  if (landscape->parsed()) return run_command(landscape_flags, cvc::Command::Landscape);
  if (verify->parsed()) return run_command(verify_flags, cvc::Command::Verify);
  std::cerr << app.help();
  return 2;
}
