#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pks::cli {

enum ExitCode : int { ok = 0, invariant_violation = 1, config_error = 2, solver_failure = 3 };

struct CommandOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides the config's out_dir
  bool normalize_manifest = false;               // fixed timestamps for byte comparisons
  std::ostream* log = nullptr;                   // defaults to std::cerr
};

int cmd_simulate(const std::filesystem::path& config, const CommandOptions& opts = {});

/// One simulate run per epsilon in <out>/eps_<value>, plus <out>/sweep.csv.
int cmd_sweep(const std::filesystem::path& config, const std::vector<double>& eps_list,
              const CommandOptions& opts = {});

/// Config key `kind` selects circles or front.
int cmd_oracle(const std::filesystem::path& config, const CommandOptions& opts = {});

/// Reloads a phi snapshot and prints its diagnostics as JSON.
int cmd_diagnose(const std::filesystem::path& snapshot, const CommandOptions& opts = {});

/// Worker count for `jobs` independent tasks, capped by PKS_THREADS when set.
unsigned worker_count(std::size_t jobs);

/// Entry point of the pks-sharp executable.
int main(int argc, char** argv);

}  // namespace pks::cli
