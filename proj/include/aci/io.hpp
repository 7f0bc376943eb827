#pragma once

#include "aci/active_learning.hpp"
#include "aci/effects.hpp"
#include "aci/gp.hpp"
#include "aci/network.hpp"
#include "aci/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aci::io {

using nlohmann::json;

/// The three independent randomness sources of a full experiment.
struct Seeds {
    std::uint64_t population = 1;
    std::uint64_t ga = 2;
    std::uint64_t run = 3;
};

/// Identifies the population a trace was produced from; comparisons refuse to
/// mix traces with different fingerprints.
struct PopulationFingerprint {
    std::uint64_t population_seed = 0;
    int networks = 0;
    int individuals = 0;

    bool operator==(const PopulationFingerprint&) const = default;
};

// ---- networks and populations ----

/// Writes `<id>_edges.csv` (columns i,j,weight; upper triangle) and
/// `<id>_covariates.csv` (columns node,c1..cp) into `dir`.
void write_network_csvs(const Network& net, const std::filesystem::path& dir);

Network load_network(const std::filesystem::path& edges_csv,
                     const std::filesystem::path& covariates_csv, const std::string& id,
                     IsolatedPolicy policy = IsolatedPolicy::Reject);

/// Population dump: per-network CSVs, `model.json` (outcome coefficients,
/// noise, seed), and `manifest.json` listing the networks.
void write_population(const SimPopulation& pop, const GraphConfig& graph,
                      const std::filesystem::path& dir);

struct LoadedPopulation {
    std::vector<Network> networks;
    std::optional<OutcomeModelParams> model;
    std::uint64_t population_seed = 0;
    GraphConfig graph;

    PopulationFingerprint fingerprint() const;
};

LoadedPopulation load_population(const std::filesystem::path& dir);

// ---- model and kernel parameters ----

json model_to_json(const OutcomeModelParams& model);
OutcomeModelParams model_from_json(const json& j);

/// Log-space parameter values plus the achieved log marginal likelihood.
json fit_to_json(const ArmFitSummary& fit);
ArmFitSummary fit_from_json(const json& j);

// ---- curves ----

/// CSV with columns arm,g,mean,variance (arm is 0, 1, or 10 for the direct
/// curve).
void write_curve_csv(const EffectCurve& curve, const std::filesystem::path& path);

json curve_to_json(const EffectCurve& curve);
EffectCurve curve_from_json(const json& j);

// ---- run traces ----

json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const json& j);

json trace_to_json(const RunTrace& trace, const RunConfig& config, const Seeds& seeds,
                   const PopulationFingerprint& fingerprint);

struct StageSummary {
    int index = 0;
    std::string kind;
    int cumulative_networks = 0;
    std::optional<double> eise_overall;
    std::optional<double> eise_spillover;
};

struct TraceSummary {
    std::string method;
    PopulationFingerprint fingerprint;
    bool truncated = false;
    std::vector<StageSummary> stages;
};

TraceSummary summarize_trace(const json& trace_json);

/// Per-stage EISE rows: stage,arm,eise (arm 1 then arm 0 per stage).
void write_eise_report_csv(const RunTrace& trace, const std::filesystem::path& path);

/// Side-by-side comparison: networks,effect,ACI,RTA with NA for stages one
/// method did not log. Rows are keyed by cumulative networks consumed.
/// Throws when the two traces carry different population fingerprints.
void write_compare_csv(const TraceSummary& aci, const TraceSummary& rta,
                       const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

}  // namespace aci::io
