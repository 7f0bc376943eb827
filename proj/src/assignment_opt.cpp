#include "aci/assignment_opt.hpp"

#include "aci/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aci {

namespace {

// Precomputed per-network state for the GA's inner loop. Exposures come from
// one mat-vec; the squared-Euclidean pair sum uses the moment identity
// sum_ij ||xi-xj||^2 = 2m * sum_i ||xi||^2 - 2 ||sum_i xi||^2 over the window.
class FitnessEvaluator {
public:
    FitnessEvaluator(const Network& net, const TargetWindow& window, const FitnessSpec& spec)
        : net_(net), window_(window), spec_(spec) {
        features_ = net.integrated_features();
        if (spec.standardize) {
            for (int k = 0; k < features_.cols(); ++k) {
                const double mean = features_.col(k).mean();
                const double var =
                    (features_.col(k).array() - mean).square().sum() / features_.rows();
                if (var > 0.0) features_.col(k) /= std::sqrt(var);
            }
        }
        sq_norms_ = features_.rowwise().squaredNorm();
    }

    struct Score {
        double fitness = 0.0;
        int in_window = 0;
    };

    Score evaluate(const Assignment& assign) const {
        VectorXd exposures = neighbor_exposures(net_, assign);
        Score out;
        if (spec_.metric == DistanceMetric::SquaredEuclidean) {
            double norm_sum = 0.0;
            VectorXd feature_sum = VectorXd::Zero(features_.cols());
            for (int i = 0; i < net_.size(); ++i) {
                if (assign.treatments(i) == window_.arm && window_.contains(exposures(i))) {
                    ++out.in_window;
                    norm_sum += sq_norms_(i);
                    feature_sum += features_.row(i);
                }
            }
            out.fitness = 2.0 * out.in_window * norm_sum - 2.0 * feature_sum.squaredNorm();
            if (out.fitness < 0.0) out.fitness = 0.0;  // round-off on degenerate sets
        } else {
            std::vector<int> members;
            for (int i = 0; i < net_.size(); ++i) {
                if (assign.treatments(i) == window_.arm && window_.contains(exposures(i)))
                    members.push_back(i);
            }
            out.in_window = static_cast<int>(members.size());
            for (int a : members) {
                for (int b : members) {
                    const double d = (features_.row(a) - features_.row(b)).cwiseAbs().sum();
                    out.fitness += d * d;
                }
            }
        }
        return out;
    }

private:
    const Network& net_;
    TargetWindow window_;
    FitnessSpec spec_;
    MatrixXd features_;
    VectorXd sq_norms_;
};

int roulette_pick(const std::vector<double>& fits, std::mt19937_64& engine) {
    // fitness + epsilon keeps the wheel defined on all-zero landscapes
    constexpr double kEps = 1e-9;
    double total = 0.0;
    for (double f : fits) total += f + kEps;
    std::uniform_real_distribution<double> unif(0.0, total);
    double ticket = unif(engine);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        ticket -= fits[i] + kEps;
        if (ticket <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(fits.size()) - 1;
}

}  // namespace

std::vector<int> in_window_set(const Network& net, const Assignment& assign,
                               const TargetWindow& window) {
    if (!window.valid()) throw std::invalid_argument("target window is empty");
    VectorXd exposures = neighbor_exposures(net, assign);
    std::vector<int> members;
    for (int i = 0; i < net.size(); ++i) {
        if (assign.treatments(i) == window.arm && window.contains(exposures(i)))
            members.push_back(i);
    }
    return members;
}

double fitness(const Network& net, const Assignment& assign, const TargetWindow& window,
               const FitnessSpec& spec) {
    if (!window.valid()) throw std::invalid_argument("target window is empty");
    return FitnessEvaluator(net, window, spec).evaluate(assign).fitness;
}

OptimizationResult optimize_assignment(const Network& net, const TargetWindow& window,
                                       const GaConfig& config) {
    if (config.population_size < 2)
        throw std::invalid_argument("GA population size must be at least 2");
    if (config.crossover_rate < 0.0 || config.crossover_rate > 1.0)
        throw std::invalid_argument("crossover rate must lie in [0,1]");
    if (config.mutation_rate && (*config.mutation_rate < 0.0 || *config.mutation_rate > 1.0))
        throw std::invalid_argument("mutation rate must lie in [0,1]");
    if (!window.valid()) throw std::invalid_argument("target window is empty");
    const int n = net.size();
    const int pop_size = config.population_size;
    const double mutation = config.mutation_rate.value_or(1.0 / n);

    FitnessEvaluator evaluator(net, window, config.fitness);
    std::mt19937_64 engine = rng::engine(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<VectorXi> population;
    population.reserve(pop_size);
    // Boundary assignments join the initial pool; the rest are Bernoulli(g*)
    // draws biased toward the target exposure.
    population.push_back(VectorXi::Zero(n));
    population.push_back(VectorXi::Ones(n));
    while (static_cast<int>(population.size()) < pop_size) {
        VectorXi bits(n);
        for (int i = 0; i < n; ++i) bits(i) = unif(engine) < window.center ? 1 : 0;
        population.push_back(std::move(bits));
    }

    std::vector<double> fits(pop_size);
    std::vector<int> counts(pop_size);
    for (int i = 0; i < pop_size; ++i) {
        auto score = evaluator.evaluate(Assignment(population[i]));
        fits[i] = score.fitness;
        counts[i] = score.in_window;
    }

    auto best_index = [&]() {
        return static_cast<int>(std::max_element(fits.begin(), fits.end()) - fits.begin());
    };

    OptimizationResult result;
    double best = fits[best_index()];
    result.history.push_back(best);
    int stall = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<VectorXi> children;
        std::vector<double> child_fits;
        std::vector<int> child_counts;
        children.reserve(pop_size);
        for (int k = 0; k < pop_size; ++k) {
            const int a = roulette_pick(fits, engine);
            const int b = roulette_pick(fits, engine);
            VectorXi c1 = population[a];
            VectorXi c2 = population[b];
            if (unif(engine) < config.crossover_rate && n > 1) {
                std::uniform_int_distribution<int> cut_dist(1, n - 1);
                const int cut = cut_dist(engine);
                for (int i = cut; i < n; ++i) std::swap(c1(i), c2(i));
            }
            for (int i = 0; i < n; ++i) {
                if (unif(engine) < mutation) c1(i) = 1 - c1(i);
                if (unif(engine) < mutation) c2(i) = 1 - c2(i);
            }
            auto s1 = evaluator.evaluate(Assignment(c1));
            auto s2 = evaluator.evaluate(Assignment(c2));
            if (s1.fitness >= s2.fitness) {
                children.push_back(std::move(c1));
                child_fits.push_back(s1.fitness);
                child_counts.push_back(s1.in_window);
            } else {
                children.push_back(std::move(c2));
                child_fits.push_back(s2.fitness);
                child_counts.push_back(s2.in_window);
            }
        }

        // Elitist merge: keep the K fittest of parents + children, collapsing
        // duplicate assignments so the pool keeps distinct candidates. Stable
        // order on ties keeps the run deterministic.
        std::vector<int> order(2 * pop_size);
        std::iota(order.begin(), order.end(), 0);
        auto fitness_of = [&](int idx) {
            return idx < pop_size ? fits[idx] : child_fits[idx - pop_size];
        };
        auto member_of = [&](int idx) -> const VectorXi& {
            return idx < pop_size ? population[idx] : children[idx - pop_size];
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](int lhs, int rhs) { return fitness_of(lhs) > fitness_of(rhs); });

        std::vector<VectorXi> next_pop;
        std::vector<double> next_fits;
        std::vector<int> next_counts;
        next_pop.reserve(pop_size);
        for (int pass = 0; pass < 2 && static_cast<int>(next_pop.size()) < pop_size; ++pass) {
            for (int r = 0; r < 2 * pop_size && static_cast<int>(next_pop.size()) < pop_size;
                 ++r) {
                const int idx = order[r];
                const VectorXi& candidate = member_of(idx);
                if (pass == 0) {
                    bool duplicate = false;
                    for (const VectorXi& kept : next_pop)
                        if (kept == candidate) {
                            duplicate = true;
                            break;
                        }
                    if (duplicate) continue;
                } else {
                    // not enough distinct assignments; fill with repeats
                }
                next_pop.push_back(candidate);
                next_fits.push_back(fitness_of(idx));
                next_counts.push_back(idx < pop_size ? counts[idx]
                                                     : child_counts[idx - pop_size]);
            }
        }
        population = std::move(next_pop);
        fits = std::move(next_fits);
        counts = std::move(next_counts);

        const double generation_best = fits[0];
        result.history.push_back(generation_best);
        if (generation_best > best) {
            best = generation_best;
            stall = 0;
        } else if (++stall >= config.early_stop_patience) {
            break;
        }
    }

    const int winner = best_index();
    result.assignment = Assignment(population[winner]);
    result.fitness = fits[winner];
    result.in_window_count = counts[winner];
    return result;
}

}  // namespace aci
