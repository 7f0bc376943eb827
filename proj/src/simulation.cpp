#include "aci/simulation.hpp"

#include "aci/rng.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace aci {

int SimPopulation::total_individuals() const {
    int total = 0;
    for (const Network& net : networks) total += net.size();
    return total;
}

MatrixXd SimPopulation::all_features() const {
    if (networks.empty()) return MatrixXd();
    const int d = static_cast<int>(networks.front().integrated_features().cols());
    MatrixXd stacked(total_individuals(), d);
    int row = 0;
    for (const Network& net : networks) {
        stacked.middleRows(row, net.size()) = net.integrated_features();
        row += net.size();
    }
    return stacked;
}

namespace {

MatrixXd random_graph(int n, double edge_probability, std::mt19937_64& engine) {
    if (n < 2) throw std::invalid_argument("networks need at least two individuals");
    if (edge_probability <= 0.0 || edge_probability > 1.0)
        throw std::invalid_argument("edge probability must lie in (0,1]");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MatrixXd w = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (unif(engine) < edge_probability) {
                w(i, j) = 1.0;
                w(j, i) = 1.0;
            }
        }
    }
    // Resample rows that came out isolated.
    for (int i = 0; i < n; ++i) {
        int attempts = 0;
        while (w.row(i).sum() == 0.0) {
            if (++attempts > 1000)
                throw std::runtime_error("graph parameters cannot produce connected nodes");
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                if (unif(engine) < edge_probability) {
                    w(i, j) = 1.0;
                    w(j, i) = 1.0;
                }
            }
        }
    }
    return w;
}

}  // namespace

SimPopulation generate_population(int network_count, int network_size, const GraphConfig& graph,
                                  std::uint64_t seed, std::optional<OutcomeModelParams> model) {
    if (network_count < 1) throw std::invalid_argument("population needs at least one network");
    SimPopulation pop;
    pop.seed = seed;

    if (model) {
        pop.model = *model;
    } else {
        std::mt19937_64 engine = rng::engine(rng::mix(seed, 0x6d6f64656cULL));  // "model"
        std::uniform_real_distribution<double> unif(-5.0, 5.0);
        for (int arm = 1; arm >= 0; --arm)
            for (int k = 0; k < 3; ++k) pop.model.own(arm, k) = unif(engine);
        for (int arm = 1; arm >= 0; --arm)
            for (int k = 0; k < 3; ++k) pop.model.neighbor(arm, k) = unif(engine);
        pop.model.noise_sd = 1.0;
    }

    pop.networks.reserve(network_count);
    for (int q = 0; q < network_count; ++q) {
        std::mt19937_64 engine = rng::engine(rng::mix(seed, static_cast<std::uint64_t>(q) + 1));
        MatrixXd w = random_graph(network_size, graph.edge_probability, engine);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        MatrixXd c(network_size, 3);
        for (int i = 0; i < network_size; ++i) {
            c(i, 0) = unif(engine) < 0.5 ? 1.0 : 0.0;
            c(i, 1) = unif(engine);
            c(i, 2) = unif(engine);
        }
        std::ostringstream name;
        name << "net_" << std::setfill('0') << std::setw(3) << q;
        pop.networks.emplace_back(name.str(), std::move(w), std::move(c));
    }
    return pop;
}

double true_outcome(const Network& net, const OutcomeModelParams& model, int i, int arm,
                    double exposure, double noise) {
    if (net.covariate_dim() != 3)
        throw std::invalid_argument("the synthetic outcome model needs exactly three covariates");
    if (i < 0 || i >= net.size()) throw std::out_of_range("individual index out of range");
    if (arm != 0 && arm != 1) throw std::invalid_argument("arm must be 0 or 1");

    const auto c = net.covariates().row(i);
    const auto cn = net.neighbor_covariates().row(i);

    auto own_term = [&](int a) {
        return model.own(a, 0) * c(0) * c(0) + model.own(a, 1) * c(1) +
               model.own(a, 2) / (c(2) + 1.0);
    };
    auto neighbor_term = [&](int a) {
        return model.neighbor(a, 0) * cn(0) * cn(0) + model.neighbor(a, 1) / (1.0 + cn(1)) +
               model.neighbor(a, 2) * cn(2);
    };

    const double own = arm == 1 ? own_term(1) : own_term(0);
    const double mixed = neighbor_term(1) * exposure + neighbor_term(0) * (1.0 - exposure);
    return own + mixed * (exposure - 0.5) + noise;
}

GroundTruth true_effect_curves(const SimPopulation& pop, const VectorXd& grid) {
    const int total = pop.total_individuals();
    if (total == 0) throw std::invalid_argument("empty population");

    auto population_mean = [&](int arm, double g) {
        double sum = 0.0;
        for (const Network& net : pop.networks)
            for (int i = 0; i < net.size(); ++i) sum += true_outcome(net, pop.model, i, arm, g);
        return sum / total;
    };

    const double baseline = population_mean(0, 0.0);
    const int m = static_cast<int>(grid.size());
    GroundTruth truth;
    truth.overall = EffectCurve{EffectKind::Overall, grid, VectorXd(m), VectorXd::Zero(m), baseline};
    truth.spillover =
        EffectCurve{EffectKind::Spillover, grid, VectorXd(m), VectorXd::Zero(m), baseline};
    for (int k = 0; k < m; ++k) {
        truth.overall.mean(k) = population_mean(1, grid(k)) - baseline;
        truth.spillover.mean(k) = population_mean(0, grid(k)) - baseline;
    }
    return truth;
}

double eise(const EffectCurve& estimated, const EffectCurve& truth) {
    if (estimated.grid.size() != truth.grid.size() || estimated.grid != truth.grid)
        throw std::invalid_argument("eise: curves must share a grid");
    const VectorXd gap = estimated.mean - truth.mean;
    double integral = 0.0;
    for (int k = 0; k + 1 < gap.size(); ++k) {
        const double h = estimated.grid(k + 1) - estimated.grid(k);
        integral += 0.5 * h * (gap(k) * gap(k) + gap(k + 1) * gap(k + 1));
    }
    return integral;
}

OutcomeOracle simulation_oracle(const SimPopulation& pop, std::uint64_t run_seed) {
    // Copy the model; networks are looked up by identity hash so the oracle
    // stays valid for networks copied out of the population.
    OutcomeModelParams model = pop.model;
    return [model, run_seed](const Network& net, const Assignment& assign) {
        VectorXd exposures = neighbor_exposures(net, assign);
        const std::uint64_t assignment_hash = rng::hash_bytes(
            assign.treatments.data(), sizeof(int) * static_cast<std::size_t>(assign.size()));
        std::mt19937_64 engine =
            rng::engine(rng::mix(run_seed, rng::hash_string(net.id()), assignment_hash));
        std::normal_distribution<double> noise(0.0, model.noise_sd);
        VectorXd outcomes(net.size());
        for (int i = 0; i < net.size(); ++i) {
            const double eps = model.noise_sd > 0.0 ? noise(engine) : 0.0;
            outcomes(i) = true_outcome(net, model, i, assign.treatments(i), exposures(i), eps);
        }
        return outcomes;
    };
}

}  // namespace aci
