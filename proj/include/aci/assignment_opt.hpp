#pragma once

#include "aci/network.hpp"
#include "aci/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace aci {

/// Exposure window around a target condition: arm a* and
/// [g* - alpha/2, g* + alpha/2] intersected with [0,1].
struct TargetWindow {
    int arm = 1;
    double center = 0.5;  // g*
    double width = 0.1;   // alpha

    double low() const { return std::max(0.0, center - width / 2.0); }
    double high() const { return std::min(1.0, center + width / 2.0); }
    bool contains(double exposure) const { return exposure >= low() && exposure <= high(); }
    bool valid() const { return width > 0.0 && center - width / 2.0 <= 1.0 && center + width / 2.0 >= 0.0; }
};

enum class DistanceMetric { SquaredEuclidean, Manhattan };

struct FitnessSpec {
    DistanceMetric metric = DistanceMetric::SquaredEuclidean;
    /// Scale each integrated-feature dimension to unit variance over the
    /// network before measuring distances.
    bool standardize = true;
};

struct GaConfig {
    int population_size = 40;  // K
    int epochs = 200;
    int early_stop_patience = 30;  // generations without improvement
    double crossover_rate = 0.9;
    std::optional<double> mutation_rate;  // default 1/n
    std::uint64_t seed = 0;
    FitnessSpec fitness;
};

struct OptimizationResult {
    Assignment assignment;
    double fitness = 0.0;
    int in_window_count = 0;            // n^r of the returned assignment
    std::vector<double> history;        // best fitness per generation, non-decreasing
};

/// Individuals with own treatment a* and exposure inside the window.
std::vector<int> in_window_set(const Network& net, const Assignment& assign,
                               const TargetWindow& window);

/// Dispersion objective: sum over ordered in-window pairs of the squared
/// distance between integrated features. Zero when fewer than two individuals
/// land in the window.
double fitness(const Network& net, const Assignment& assign, const TargetWindow& window,
               const FitnessSpec& spec = {});

/// Genetic search for the assignment maximizing `fitness` on one network:
/// roulette-wheel parent selection, single-point crossover, per-bit mutation,
/// keep-the-fitter-child, and an elitist merge of parents and children.
/// Deterministic under a fixed seed.
OptimizationResult optimize_assignment(const Network& net, const TargetWindow& window,
                                       const GaConfig& config);

}  // namespace aci
