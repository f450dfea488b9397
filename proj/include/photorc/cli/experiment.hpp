#pragma once

// Experiment runner behind the `photorc` command line tool.

#include "photorc/cli/config.hpp"
#include "photorc/deep.hpp"
#include "photorc/delay.hpp"
#include "photorc/esn.hpp"
#include "photorc/tasks.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace prc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "PHOTORC_OUT_DIR";

/// Subcommands: esn, delay, cascade, memory-capacity, narma, mackey-glass,
/// tolerance, dump-states, replay.
const std::vector<std::string>& subcommands();

struct Invocation {
    std::string subcommand;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    /// Output directory, or the output file for dump-states. Empty means the
    /// environment default, then "results".
    std::string out;
    std::vector<std::string> sets;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string message;
    std::vector<std::filesystem::path> artifacts;
};

/// Runs one invocation; never throws. Errors map to exit codes: schema or
/// parameter problems give 2, numerical failures 3.
RunResult run(const Invocation& inv);

// Building blocks, exposed for tests.

EsnParams esn_params_from(const ExperimentConfig& cfg);
DelayParams delay_params_from(const ExperimentConfig& cfg);
CascadeSpec cascade_spec_from(const ExperimentConfig& cfg);
TaskSpec task_spec_from(const ExperimentConfig& cfg);
ReadoutConfig readout_config_from(const ExperimentConfig& cfg);

/// Runner and description for the configured reservoir family drawn from `rng`.
struct BuiltReservoir {
    Runner runner;
    RunnerInfo info;
};
BuiltReservoir build_reservoir(const std::string& family, const ExperimentConfig& cfg,
                               RandomSource& rng);

}  // namespace prc::cli
