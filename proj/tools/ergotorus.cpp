#include <CLI11.hpp>

#include <iostream>

#include "ergotorus/commands.hpp"
#include "ergotorus/config.hpp"
#include "ergotorus/parallel.hpp"

namespace {

std::string command_list() {
  std::string s;
  for (const auto& c : ergotorus::command_names()) s += (s.empty() ? "" : ", ") + c;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ergotorus;
  CLI::App app{"Random walks on the torus by SL_d(Z) matrices: experiments and checks"};
  app.set_version_flag("--version", version_string());

  std::string config_pos, command_pos, config_opt, command_opt, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool check = false, emit = false;
  app.add_option("CONFIG", config_pos, "Experiment config (TOML)");
  app.add_option("COMMAND", command_pos, "Command: " + command_list());
  app.add_option("--config", config_opt, "Experiment config (TOML)");
  app.add_option("--command", command_opt, "Command: " + command_list());
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker threads (default: ERGOTORUS_THREADS or 1)");
  app.add_flag("--check", check, "Exit 4 if any acceptance threshold fails");
  auto* out_opt = app.add_option("--out-dir", out_dir, "Override the output directory");
  app.add_flag("--emit-config", emit, "Print the canonical form of the config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  std::string config_path = !config_opt.empty() ? config_opt : config_pos;
  std::string command = !command_opt.empty() ? command_opt : command_pos;
  if (config_path.empty()) {
    std::cerr << "error: config: no config file given\n";
    return kExitValidation;
  }
  if (*threads_opt) set_thread_count(threads);

  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (emit) {
    std::cout << emit_config(config);
    return kExitOk;
  }
  if (command.empty()) {
    std::cerr << "error: command: expected one of " << command_list() << "\n";
    return kExitValidation;
  }
  if (*threads_opt) config.budgets.threads = threads;

  RunOptions opts;
  opts.command = command;
  opts.check = check;
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out_dir = out_dir;
  return run(config, opts, std::cout, std::cerr);
}
