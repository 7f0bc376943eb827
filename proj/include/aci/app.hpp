#pragma once

#include "aci/active_learning.hpp"
#include "aci/io.hpp"
#include "aci/simulation.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace aci::app {

/// Process exit codes; distinct classes so scripts can react.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kIoError = 3,
    kTruncatedRun = 4,
};

struct PopulationSettings {
    int networks = 100;
    int nodes = 100;
    GraphConfig graph;
    std::optional<double> noise_sd;           // absent: keep the model's value
    std::optional<OutcomeModelParams> model;  // absent: coefficients drawn from the seed
};

struct RtaSettings {
    std::optional<int> levels;  // n_u; default: ACI trace stages minus boundaries
    std::optional<int> budget;  // N_u; default: ACI networks consumed minus boundaries
};

struct CliConfig {
    std::string mode;  // simulate | aci | rta | compare
    std::filesystem::path out = "runs/aci";
    PopulationSettings population;
    RunConfig run;
    RtaSettings rta;
    io::Seeds seeds;
    std::optional<std::filesystem::path> aci_trace;  // compare overrides
    std::optional<std::filesystem::path> rta_trace;
};

/// Parses the declarative config document. Unknown keys anywhere in the
/// document are rejected.
CliConfig parse_config(const io::json& j);
CliConfig load_config_file(const std::filesystem::path& path);

/// Generates a population and writes it under <out>/population/.
int cmd_simulate(const CliConfig& config);

/// Runs one method ("aci" or "rta") against <out>/population/, writing the
/// trace JSON, per-stage curve CSVs, and the EISE report under <out>/<method>/.
/// Returns kTruncatedRun when the run exhausted its network supply early.
int cmd_run(const CliConfig& config, const std::string& method);

/// Builds the side-by-side EISE table from the two trace files.
int cmd_compare(const CliConfig& config);

/// Dispatch on config.mode.
int run_mode(const CliConfig& config);

}  // namespace aci::app
