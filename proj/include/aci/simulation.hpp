#pragma once

#include "aci/effects.hpp"
#include "aci/network.hpp"
#include "aci/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace aci {

/// Coefficients of the synthetic outcome model. Rows are indexed by the own
/// treatment arm (row 0 = control, row 1 = treated); columns by covariate.
struct OutcomeModelParams {
    Eigen::Matrix<double, 2, 3> own = Eigen::Matrix<double, 2, 3>::Zero();
    Eigen::Matrix<double, 2, 3> neighbor = Eigen::Matrix<double, 2, 3>::Zero();
    double noise_sd = 1.0;
};

struct GraphConfig {
    double edge_probability = 0.08;
};

struct SimPopulation {
    std::vector<Network> networks;
    OutcomeModelParams model;
    std::uint64_t seed = 0;

    int total_individuals() const;
    /// Integrated features of every individual across all networks, stacked.
    MatrixXd all_features() const;
};

/// Q independent random networks of size n with three covariates each:
/// one binary feature (fair coin) and two uniform-[0,1] features. Nodes that
/// come out isolated are resampled. When `model` is absent, coefficients are
/// drawn once from Uniform(-5,5) using the same seed stream.
SimPopulation generate_population(int network_count, int network_size, const GraphConfig& graph,
                                  std::uint64_t seed,
                                  std::optional<OutcomeModelParams> model = std::nullopt);

/// Synthetic outcome for individual i of `net` under own treatment `arm`,
/// neighbor exposure `exposure`, and a caller-supplied noise draw (0 gives
/// the noiseless expectation). Requires exactly three covariates.
double true_outcome(const Network& net, const OutcomeModelParams& model, int i, int arm,
                    double exposure, double noise = 0.0);

struct GroundTruth {
    EffectCurve overall;
    EffectCurve spillover;
};

/// Ground-truth average effect curves on the grid, from the noiseless outcome
/// model averaged over every individual in the population.
GroundTruth true_effect_curves(const SimPopulation& pop, const VectorXd& grid);

/// Estimated integral squared error between an estimated curve and the truth:
/// trapezoidal quadrature of (estimate - truth)^2 over the shared grid.
double eise(const EffectCurve& estimated, const EffectCurve& truth);

/// Maps (network, assignment) to observed per-individual outcomes.
using OutcomeOracle = std::function<VectorXd(const Network&, const Assignment&)>;

/// Simulation-backed oracle: realized exposures come from the assignment,
/// outcomes from the synthetic model plus Gaussian noise. The noise draw is a
/// pure function of (run_seed, network id, assignment), so repeated calls with
/// identical inputs return identical outcomes.
OutcomeOracle simulation_oracle(const SimPopulation& pop, std::uint64_t run_seed);

}  // namespace aci
