// photorc: experiment runner for echo-state and delay-based reservoirs.
//
//   photorc <subcommand> --config <path> [--seed <u64>] [--out <path>] [--set key=value]...
//
// Exit codes: 0 success, 2 configuration or parameter error, 3 numerical failure.

#include "photorc/cli/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Photonic reservoir computing simulator"};
    app.require_subcommand(1);

    prc::cli::Invocation inv;
    std::uint64_t seed = 0;

    for (const auto& name : prc::cli::subcommands()) {
        const bool replay = name == "replay";
        auto* sub = app.add_subcommand(name, replay ? "re-run the command recorded in a manifest"
                                                    : "run the '" + name + "' experiment");
        sub->add_option(replay ? "--manifest" : "--config", inv.config_path,
                        replay ? "run manifest written by an earlier run" : "JSON config file")
            ->required();
        sub->add_option("--seed", seed, "run a single seed instead of the config's list");
        sub->add_option("--out", inv.out,
                        name == "dump-states"
                            ? "output CSV file"
                            : std::string("output directory (default $") +
                                  prc::cli::kOutDirEnv + " or ./results)");
        sub->add_option("--set", inv.sets, "override a config key, key=value")
            ->allow_extra_args(false);
        sub->callback([&inv, sub, name, &seed] {
            inv.subcommand = name;
            if (sub->count("--seed") > 0) inv.seed = seed;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : prc::cli::kExitConfig;
    }

    const prc::cli::RunResult result = prc::cli::run(inv);
    if (result.exit_code == prc::cli::kExitOk)
        std::cout << result.message << "\n";
    else
        std::cerr << "photorc: " << result.message << "\n";
    return result.exit_code;
}
