#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ddlab {

// Flag overrides applied on top of the config file. Worker count and output
// directory never appear in the provenance block, so re-running the same
// config with different values of either yields byte-identical files.
struct RunOptions {
  std::string out_dir = ".";
  int threads = -1;  // -1: use the config's estimator.threads (default 0 = auto)
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int exit_code = 0;        // 0 ok, 2 config, 3 verification, 4 runtime
  std::string error_kind;   // "config" | "verification" | "runtime", empty on success
  std::string message;      // empty on success
  std::vector<std::string> files_written;
};

// Dispatches on config["mode"]: simulate, sweep_markowitz, frontier, certify
// or verify_n2. Writes result files under opts.out_dir, each embedding the
// resolved config. Exceptions are mapped to RunOutcome exit codes; nothing
// is thrown.
RunOutcome run_experiment(const nlohmann::json& config, const RunOptions& opts);
RunOutcome run_experiment_file(const std::string& config_path, const RunOptions& opts);

// Machine-readable form of a failed outcome, e.g.
// {"error":{"kind":"config","message":"..."}}.
std::string error_json(const RunOutcome& outcome);

}  // namespace ddlab
