#pragma once

#include "aci/assignment_opt.hpp"
#include "aci/effects.hpp"
#include "aci/gp.hpp"
#include "aci/simulation.hpp"
#include "aci/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aci {

/// Settings for a sequential run (both the active-learning driver and the
/// random-allocation baseline).
struct RunConfig {
    int min_window_count = 25;   // M: in-window sample floor per target
    int max_levels = 5;          // T: selected levels after initialization
    double window_width = 0.1;   // alpha
    int grid_size = 101;
    double min_separation = 0.05;
    GaConfig ga;                 // ga.seed is the GA seed; per-network streams derive from it
    GpFitConfig gp;              // gp.seed is ignored; per-fit streams derive from `seed`
    std::uint64_t seed = 0;      // run seed: oracle noise, random levels, fit restarts
    std::optional<double> variance_stop;  // stop once max curve variance falls below
};

enum class StageKind { Boundary, WarmUp, Selected };

std::string stage_kind_label(StageKind kind);

struct ConsumedNetwork {
    std::string network_id;
    Assignment assignment;
    int in_window_count = 0;
    double fitness = 0.0;
};

struct ArmFitSummary {
    KernelParams params;
    double log_marginal = 0.0;
    int training_size = 0;
};

struct StageRecord {
    StageKind kind = StageKind::Selected;
    Target target;
    std::vector<ConsumedNetwork> consumed;
    std::size_t dataset_size = 0;  // cumulative observations after this stage
    std::optional<EffectCurves> curves;
    std::optional<ArmFitSummary> fit_control;  // arm 0
    std::optional<ArmFitSummary> fit_treated;  // arm 1
    std::optional<double> eise_overall;
    std::optional<double> eise_spillover;
    bool partial = false;  // the in-window floor was not reached before supply ran out
};

struct RunTrace {
    std::string method;  // "aci" or "rta"
    std::vector<StageRecord> stages;
    std::vector<std::string> remaining_network_ids;
    std::vector<Target> visited_levels;
    bool truncated = false;

    int networks_consumed() const;
};

/// The sequential active-learning driver: boundary stages (all-treated and
/// all-control), two fixed warm-up targets (arm 0 then arm 1 at exposure 0.5),
/// then up to `max_levels` maximum-variance targets. Each target is realized
/// by the genetic optimizer on the remaining networks; consumed networks never
/// return. Both arm models are refit after every stage. When `truth` is given,
/// per-stage EISE scores are recorded.
RunTrace run_aci(const std::vector<Network>& networks, const OutcomeOracle& oracle,
                 const RunConfig& config, const GroundTruth* truth = nullptr);

/// The random-allocation baseline: the same boundary stages, then
/// `level_count` levels with exposure targets drawn uniformly from (0,1) and
/// arms alternating treated/control. `network_budget` networks are spread
/// over the levels with distribute_evenly; each consumed network receives a
/// uniformly random assignment treating round(g* * n) individuals.
RunTrace run_rta(const std::vector<Network>& networks, const OutcomeOracle& oracle,
                 const RunConfig& config, int level_count, int network_budget,
                 const GroundTruth* truth = nullptr);

/// Splits `total` into `parts` integers that sum to `total` with max-min <= 1,
/// remainder assigned from the front.
std::vector<int> distribute_evenly(int total, int parts);

}  // namespace aci
