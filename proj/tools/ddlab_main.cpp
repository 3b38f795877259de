#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ddlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ddlab: drawdown-modulated betting strategy laboratory"};

  std::string config_path;
  ddlab::RunOptions opts;
  std::optional<std::uint64_t> seed;
  int threads = -1;

  app.add_option("--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", opts.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = all cores)")
      ->check(CLI::Range(0, 4096));
  app.add_option("--seed", seed, "override the config seed");

  CLI11_PARSE(app, argc, argv);

  opts.threads = threads;
  opts.seed = seed;

  const ddlab::RunOutcome outcome = ddlab::run_experiment_file(config_path, opts);
  if (outcome.exit_code != 0) {
    std::cerr << ddlab::error_json(outcome) << '\n';
    return outcome.exit_code;
  }
  for (const std::string& f : outcome.files_written) {
    std::cout << "wrote " << f << '\n';
  }
  return 0;
}
