#include "aci/active_learning.hpp"

#include "aci/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

namespace aci {

namespace {

// Index-ordered parallel map; results never depend on scheduling.
template <typename Fn>
auto parallel_map(int count, Fn&& fn) {
    using Result = std::invoke_result_t<Fn, int>;
    std::vector<Result> results(count);
    const int workers = std::max(1, std::min<int>(std::thread::hardware_concurrency(), count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) break;
                results[i] = fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

struct GaOutcome {
    OptimizationResult result;
};

class Driver {
public:
    Driver(const std::vector<Network>& networks, const OutcomeOracle& oracle,
           const RunConfig& config, const GroundTruth* truth, std::string method)
        : networks_(networks), oracle_(oracle), config_(config), truth_(truth) {
        trace_.method = std::move(method);
        remaining_.resize(networks.size());
        std::iota(remaining_.begin(), remaining_.end(), 0);
        grid_ = uniform_grid(config.grid_size);
        int total = 0;
        for (const Network& net : networks_) total += net.size();
        const int d = networks_.empty() ? 0 : static_cast<int>(networks_.front().integrated_features().cols());
        population_features_.resize(total, d);
        int row = 0;
        for (const Network& net : networks_) {
            population_features_.middleRows(row, net.size()) = net.integrated_features();
            row += net.size();
        }
    }

    bool supply_empty() const { return remaining_.empty(); }
    void mark_truncated() { trace_.truncated = true; }
    const std::optional<EffectCurves>& curves() const { return curves_; }
    const std::vector<Target>& visited() const { return visited_; }
    int stage_count() const { return static_cast<int>(trace_.stages.size()); }

    int in_window_dataset_count(const TargetWindow& window) const {
        int count = 0;
        for (const Observation& obs : dataset_) {
            if (obs.own_treatment == window.arm && window.contains(obs.exposure)) ++count;
        }
        return count;
    }

    // One network, forced assignment; used by boundary stages and the
    // random-allocation baseline.
    void consume_forced(int net_index, const Assignment& assign, const TargetWindow& window,
                        StageRecord& rec) {
        const Network& net = networks_[net_index];
        ConsumedNetwork entry;
        entry.network_id = net.id();
        entry.assignment = assign;
        entry.in_window_count = static_cast<int>(in_window_set(net, assign, window).size());
        entry.fitness = fitness(net, assign, window, config_.ga.fitness);
        apply(net_index, assign);
        rec.consumed.push_back(std::move(entry));
    }

    // Full target stage: genetic optimization across the remaining networks,
    // then consumption per the deficit rule.
    void run_target_stage(const Target& target, StageKind kind) {
        StageRecord rec;
        rec.kind = kind;
        rec.target = target;
        const TargetWindow window{target.arm, target.exposure, config_.window_width};

        const int stage_index = stage_count();
        std::vector<int> candidates = remaining_;
        auto results = parallel_map(static_cast<int>(candidates.size()), [&](int slot) {
            GaConfig ga = config_.ga;
            ga.seed = rng::mix(config_.ga.seed, static_cast<std::uint64_t>(stage_index),
                               static_cast<std::uint64_t>(candidates[slot]));
            return GaOutcome{optimize_assignment(networks_[candidates[slot]], window, ga)};
        });

        const int deficit = config_.min_window_count - in_window_dataset_count(window);
        auto better = [&](int a, int b) {  // higher fitness, ties to lower supply index
            if (results[a].result.fitness != results[b].result.fitness)
                return results[a].result.fitness > results[b].result.fitness;
            return candidates[a] < candidates[b];
        };

        std::vector<int> chosen;  // slots into candidates/results
        if (deficit <= 0) {
            int best = 0;
            for (int s = 1; s < static_cast<int>(candidates.size()); ++s)
                if (better(s, best)) best = s;
            chosen.push_back(best);
        } else {
            std::vector<int> qualifying;
            for (int s = 0; s < static_cast<int>(candidates.size()); ++s)
                if (results[s].result.in_window_count >= deficit) qualifying.push_back(s);
            if (!qualifying.empty()) {
                int best = qualifying.front();
                for (int s : qualifying)
                    if (better(s, best)) best = s;
                chosen.push_back(best);
            } else {
                std::vector<int> order(candidates.size());
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), better);
                int accumulated = 0;
                for (int s : order) {
                    chosen.push_back(s);
                    accumulated += results[s].result.in_window_count;
                    if (accumulated >= deficit) break;
                }
                if (accumulated < deficit) {
                    rec.partial = true;
                    trace_.truncated = true;
                }
            }
        }

        for (int s : chosen) {
            const OptimizationResult& opt = results[s].result;
            ConsumedNetwork entry;
            entry.network_id = networks_[candidates[s]].id();
            entry.assignment = opt.assignment;
            entry.in_window_count = opt.in_window_count;
            entry.fitness = opt.fitness;
            apply(candidates[s], opt.assignment);
            rec.consumed.push_back(std::move(entry));
        }

        finish_stage(std::move(rec), target);
    }

    // Next available network with a uniformly random assignment treating
    // exactly round(g* . n) individuals.
    void consume_random(const TargetWindow& window, double g_star, std::mt19937_64& engine,
                        StageRecord& rec) {
        const int net_index = remaining_.front();
        const int n = networks_[net_index].size();
        const int treat_count =
            static_cast<int>(std::lround(g_star * static_cast<double>(n)));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < treat_count; ++i) {  // partial Fisher-Yates
            std::uniform_int_distribution<int> pick(i, n - 1);
            std::swap(order[i], order[pick(engine)]);
        }
        VectorXi bits = VectorXi::Zero(n);
        for (int i = 0; i < treat_count; ++i) bits(order[i]) = 1;
        consume_forced(net_index, Assignment(bits), window, rec);
    }

    void run_boundary_stage(int arm) {
        if (remaining_.empty()) {
            trace_.truncated = true;
            return;
        }
        const Target target{arm, arm == 1 ? 1.0 : 0.0};
        StageRecord rec;
        rec.kind = StageKind::Boundary;
        rec.target = target;
        const TargetWindow window{target.arm, target.exposure, config_.window_width};
        const int net_index = remaining_.front();
        const int n = networks_[net_index].size();
        consume_forced(net_index, arm == 1 ? Assignment::ones(n) : Assignment::zeros(n), window,
                       rec);
        finish_stage(std::move(rec), target);
    }

    void finish_stage(StageRecord rec, const Target& target) {
        visited_.push_back(target);
        rec.dataset_size = dataset_.size();
        refit();
        rec.curves = curves_;
        rec.fit_control = fit_summary(control_);
        rec.fit_treated = fit_summary(treated_);
        if (truth_ && curves_) {
            rec.eise_overall = eise(curves_->overall, truth_->overall);
            rec.eise_spillover = eise(curves_->spillover, truth_->spillover);
        }
        if (rec.partial) trace_.truncated = true;
        trace_.stages.push_back(std::move(rec));
    }

    RunTrace take_trace() {
        trace_.visited_levels = visited_;
        trace_.remaining_network_ids.clear();
        for (int idx : remaining_) trace_.remaining_network_ids.push_back(networks_[idx].id());
        return std::move(trace_);
    }

private:
    void apply(int net_index, const Assignment& assign) {
        const Network& net = networks_[net_index];
        VectorXd outcomes = oracle_(net, assign);
        std::vector<Observation> rows = integrate(net, assign, outcomes);
        dataset_.insert(dataset_.end(), std::make_move_iterator(rows.begin()),
                        std::make_move_iterator(rows.end()));
        remaining_.erase(std::find(remaining_.begin(), remaining_.end(), net_index));
    }

    static std::optional<ArmFitSummary> fit_summary(const std::optional<ArmModel>& model) {
        if (!model) return std::nullopt;
        return ArmFitSummary{model->params(), model->log_marginal(), model->training_size()};
    }

    void refit() {
        const int stage_index = stage_count();
        auto fit_arm = [&](int arm) -> std::optional<ArmModel> {
            bool has_rows = false;
            for (const Observation& obs : dataset_) {
                if (obs.own_treatment == arm) {
                    has_rows = true;
                    break;
                }
            }
            if (!has_rows) return std::nullopt;
            GpFitConfig cfg = config_.gp;
            cfg.seed = rng::mix(config_.seed, 0x6670ULL, static_cast<std::uint64_t>(stage_index),
                                static_cast<std::uint64_t>(arm));
            cfg.warm_start = arm == 0 ? warm_control_ : warm_treated_;
            return ArmModel::fit(dataset_, arm, cfg);
        };

        auto future_treated = std::async(std::launch::async, fit_arm, 1);
        control_ = fit_arm(0);
        treated_ = future_treated.get();

        if (control_) warm_control_ = control_->params();
        if (treated_) warm_treated_ = treated_->params();
        if (control_ && treated_) {
            curves_ = effect_curves(*control_, *treated_, population_features_, grid_);
        } else {
            curves_.reset();
        }
    }

    const std::vector<Network>& networks_;
    const OutcomeOracle& oracle_;
    const RunConfig& config_;
    const GroundTruth* truth_;

    std::vector<int> remaining_;
    std::vector<Observation> dataset_;
    std::vector<Target> visited_;
    std::optional<ArmModel> control_, treated_;
    std::optional<KernelParams> warm_control_, warm_treated_;
    std::optional<EffectCurves> curves_;
    MatrixXd population_features_;
    VectorXd grid_;
    RunTrace trace_;
};

}  // namespace

std::string stage_kind_label(StageKind kind) {
    switch (kind) {
        case StageKind::Boundary: return "boundary";
        case StageKind::WarmUp: return "warmup";
        case StageKind::Selected: return "selected";
    }
    return "unknown";
}

int RunTrace::networks_consumed() const {
    int total = 0;
    for (const StageRecord& rec : stages) total += static_cast<int>(rec.consumed.size());
    return total;
}

std::vector<int> distribute_evenly(int total, int parts) {
    if (parts < 1) throw std::invalid_argument("distribute_evenly: parts must be positive");
    if (total < 0) throw std::invalid_argument("distribute_evenly: total must be non-negative");
    const int base = total / parts;
    const int remainder = total % parts;
    std::vector<int> out(parts, base);
    for (int i = 0; i < remainder; ++i) ++out[i];
    return out;
}

RunTrace run_aci(const std::vector<Network>& networks, const OutcomeOracle& oracle,
                 const RunConfig& config, const GroundTruth* truth) {
    if (networks.size() < 4)
        throw std::invalid_argument("run_aci needs at least four networks (boundaries + warm-up)");
    if (config.min_window_count < 1 || config.max_levels < 0 || config.window_width <= 0.0)
        throw std::invalid_argument("invalid run configuration");

    Driver driver(networks, oracle, config, truth, "aci");

    driver.run_boundary_stage(1);
    driver.run_boundary_stage(0);
    for (const Target warm : {Target{0, 0.5}, Target{1, 0.5}}) {
        if (driver.supply_empty()) {
            driver.mark_truncated();
            break;
        }
        driver.run_target_stage(warm, StageKind::WarmUp);
    }

    for (int level = 0; level < config.max_levels; ++level) {
        if (driver.supply_empty()) {
            driver.mark_truncated();
            break;
        }
        if (!driver.curves()) break;
        Target target;
        try {
            target = select_target(driver.curves()->overall, driver.curves()->spillover,
                                   driver.visited(), config.min_separation);
        } catch (const std::runtime_error&) {
            break;  // every level excluded; nothing left to learn at this grid
        }
        driver.run_target_stage(target, StageKind::Selected);
        if (config.variance_stop && driver.curves()) {
            const double peak = std::max(driver.curves()->overall.variance.maxCoeff(),
                                         driver.curves()->spillover.variance.maxCoeff());
            if (peak < *config.variance_stop) break;
        }
    }

    RunTrace trace = driver.take_trace();
    return trace;
}

RunTrace run_rta(const std::vector<Network>& networks, const OutcomeOracle& oracle,
                 const RunConfig& config, int level_count, int network_budget,
                 const GroundTruth* truth) {
    if (level_count < 1) throw std::invalid_argument("run_rta: level count must be positive");
    if (network_budget < level_count)
        throw std::invalid_argument("run_rta: network budget must cover every level");
    if (networks.size() < 2)
        throw std::invalid_argument("run_rta needs at least two networks for the boundaries");

    Driver driver(networks, oracle, config, truth, "rta");
    std::mt19937_64 engine = rng::engine(rng::mix(config.seed, 0x727461ULL));  // "rta"
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    driver.run_boundary_stage(1);
    driver.run_boundary_stage(0);

    const std::vector<int> budgets = distribute_evenly(network_budget, level_count);
    for (int level = 0; level < level_count; ++level) {
        const int arm = level % 2 == 0 ? 1 : 0;
        const double g_star = unif(engine);
        const Target target{arm, g_star};
        const TargetWindow window{arm, g_star, config.window_width};

        StageRecord rec;
        rec.kind = StageKind::Selected;
        rec.target = target;
        for (int b = 0; b < budgets[level]; ++b) {
            if (driver.supply_empty()) {
                rec.partial = true;
                break;
            }
            driver.consume_random(window, g_star, engine, rec);
        }

        const bool truncated_here = rec.partial;
        driver.finish_stage(std::move(rec), target);
        if (truncated_here) break;
    }

    return driver.take_trace();
}

}  // namespace aci
