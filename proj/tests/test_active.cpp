#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aci/active_learning.hpp"

#include <cmath>
#include <set>

using namespace aci;

namespace {

RunConfig cheap_config() {
    RunConfig config;
    config.min_window_count = 4;
    config.max_levels = 2;
    config.window_width = 0.2;
    config.grid_size = 21;
    config.min_separation = 0.05;
    config.ga.population_size = 12;
    config.ga.epochs = 30;
    config.ga.early_stop_patience = 8;
    config.ga.seed = 11;
    config.gp.restarts = 1;
    config.gp.max_iterations = 25;
    config.seed = 17;
    return config;
}

struct Bench {
    SimPopulation pop;
    GroundTruth truth;
    OutcomeOracle oracle;
};

Bench make_bench(int networks, int nodes, std::uint64_t seed, const RunConfig& config) {
    Bench bench;
    bench.pop = generate_population(networks, nodes, GraphConfig{0.3}, seed);
    bench.truth = true_effect_curves(bench.pop, uniform_grid(config.grid_size));
    bench.oracle = simulation_oracle(bench.pop, config.seed);
    return bench;
}

void check_traces_identical(const RunTrace& a, const RunTrace& b) {
    REQUIRE(a.stages.size() == b.stages.size());
    CHECK(a.truncated == b.truncated);
    CHECK(a.remaining_network_ids == b.remaining_network_ids);
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
        const StageRecord& x = a.stages[s];
        const StageRecord& y = b.stages[s];
        CHECK(x.kind == y.kind);
        CHECK(x.target.arm == y.target.arm);
        CHECK(x.target.exposure == y.target.exposure);
        CHECK(x.dataset_size == y.dataset_size);
        REQUIRE(x.consumed.size() == y.consumed.size());
        for (std::size_t c = 0; c < x.consumed.size(); ++c) {
            CHECK(x.consumed[c].network_id == y.consumed[c].network_id);
            CHECK(x.consumed[c].assignment == y.consumed[c].assignment);
            CHECK(x.consumed[c].fitness == y.consumed[c].fitness);
            CHECK(x.consumed[c].in_window_count == y.consumed[c].in_window_count);
        }
        CHECK(x.curves.has_value() == y.curves.has_value());
        if (x.curves && y.curves) {
            CHECK(x.curves->overall.mean == y.curves->overall.mean);
            CHECK(x.curves->overall.variance == y.curves->overall.variance);
            CHECK(x.curves->spillover.mean == y.curves->spillover.mean);
            CHECK(x.curves->spillover.variance == y.curves->spillover.variance);
        }
        CHECK(x.eise_overall == y.eise_overall);
        CHECK(x.eise_spillover == y.eise_spillover);
    }
}

}  // namespace

TEST_CASE("distribute_evenly traces the even-distribution rule") {
    CHECK(distribute_evenly(9, 4) == std::vector<int>{3, 2, 2, 2});
    CHECK(distribute_evenly(4, 4) == std::vector<int>{1, 1, 1, 1});
    CHECK(distribute_evenly(0, 3) == std::vector<int>{0, 0, 0});
    CHECK_THROWS_AS(distribute_evenly(5, 0), std::invalid_argument);
    CHECK_THROWS_AS(distribute_evenly(-1, 2), std::invalid_argument);
    for (int total = 0; total <= 30; ++total) {
        for (int parts = 1; parts <= 6; ++parts) {
            const auto v = distribute_evenly(total, parts);
            int sum = 0, lo = total + 1, hi = -1;
            for (int x : v) {
                sum += x;
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            CHECK(sum == total);
            CHECK(hi - lo <= 1);
        }
    }
}

TEST_CASE("initialization contract: boundaries then warm-ups") {
    RunConfig config = cheap_config();
    config.max_levels = 0;
    Bench bench = make_bench(6, 12, 31, config);
    RunTrace trace = run_aci(bench.pop.networks, bench.oracle, config, &bench.truth);

    REQUIRE(trace.stages.size() == 4);
    CHECK(trace.stages[0].kind == StageKind::Boundary);
    CHECK(trace.stages[0].target.arm == 1);
    CHECK(trace.stages[0].target.exposure == 1.0);
    CHECK(trace.stages[1].kind == StageKind::Boundary);
    CHECK(trace.stages[1].target.arm == 0);
    CHECK(trace.stages[1].target.exposure == 0.0);
    CHECK(trace.stages[2].kind == StageKind::WarmUp);
    CHECK(trace.stages[2].target.arm == 0);
    CHECK(trace.stages[2].target.exposure == 0.5);
    CHECK(trace.stages[3].kind == StageKind::WarmUp);
    CHECK(trace.stages[3].target.arm == 1);
    CHECK(trace.stages[3].target.exposure == 0.5);

    // boundary assignments are all-ones / all-zeros on a single network
    REQUIRE(trace.stages[0].consumed.size() == 1);
    CHECK(trace.stages[0].consumed[0].assignment.treatments.minCoeff() == 1);
    REQUIRE(trace.stages[1].consumed.size() == 1);
    CHECK(trace.stages[1].consumed[0].assignment.treatments.maxCoeff() == 0);

    // curves appear once both arms hold data
    CHECK(trace.stages[1].curves.has_value());
    CHECK(trace.stages[3].curves.has_value());
    CHECK(trace.stages[3].eise_overall.has_value());
}

TEST_CASE("selected stages respect the supply and bookkeeping invariants") {
    RunConfig config = cheap_config();
    Bench bench = make_bench(8, 14, 33, config);
    RunTrace trace = run_aci(bench.pop.networks, bench.oracle, config, &bench.truth);

    CHECK(trace.stages.size() <= 4 + config.max_levels);

    // conservation and no reuse
    std::set<std::string> consumed_ids;
    int consumed_count = 0;
    std::size_t last_size = 0;
    for (const StageRecord& rec : trace.stages) {
        for (const ConsumedNetwork& c : rec.consumed) {
            CHECK(consumed_ids.insert(c.network_id).second);  // never seen before
            ++consumed_count;
        }
        CHECK(rec.dataset_size >= last_size);
        last_size = rec.dataset_size;
    }
    CHECK(consumed_count + static_cast<int>(trace.remaining_network_ids.size()) == 8);
    for (const std::string& id : trace.remaining_network_ids)
        CHECK_FALSE(consumed_ids.contains(id));

    // one visited level per stage, and selected levels respect min_separation per arm
    CHECK(trace.visited_levels.size() == trace.stages.size());
    for (std::size_t i = 0; i < trace.visited_levels.size(); ++i) {
        for (std::size_t j = i + 1; j < trace.visited_levels.size(); ++j) {
            const Target& a = trace.visited_levels[i];
            const Target& b = trace.visited_levels[j];
            if (a.arm == b.arm)
                CHECK(std::abs(a.exposure - b.exposure) >= config.min_separation - 1e-12);
        }
    }

    // the in-window floor holds for non-partial target stages
    for (std::size_t s = 4; s < trace.stages.size(); ++s) {
        const StageRecord& rec = trace.stages[s];
        if (rec.partial) continue;
        int in_window = 0;
        const TargetWindow window{rec.target.arm, rec.target.exposure, config.window_width};
        // recount from the consumed assignments across all stages so far
        for (std::size_t t = 0; t <= s; ++t) {
            for (const ConsumedNetwork& c : trace.stages[t].consumed) {
                for (const Network& net : bench.pop.networks) {
                    if (net.id() != c.network_id) continue;
                    in_window += static_cast<int>(in_window_set(net, c.assignment, window).size());
                }
            }
        }
        CHECK(in_window >= config.min_window_count);
    }
}

TEST_CASE("aci runs are bit-reproducible under fixed seeds") {
    RunConfig config = cheap_config();
    Bench bench = make_bench(7, 12, 37, config);
    RunTrace a = run_aci(bench.pop.networks, bench.oracle, config, &bench.truth);
    RunTrace b = run_aci(bench.pop.networks, bench.oracle, config, &bench.truth);
    check_traces_identical(a, b);
}

TEST_CASE("supply exhaustion truncates the run") {
    RunConfig config = cheap_config();
    config.max_levels = 10;
    config.min_window_count = 500;  // unreachable: forces bulk consumption
    Bench bench = make_bench(5, 10, 41, config);
    RunTrace trace = run_aci(bench.pop.networks, bench.oracle, config, &bench.truth);
    CHECK(trace.truncated);
    CHECK(trace.remaining_network_ids.empty());
}

TEST_CASE("too few networks is a configuration error") {
    RunConfig config = cheap_config();
    Bench bench = make_bench(3, 10, 43, config);
    CHECK_THROWS_AS(run_aci(bench.pop.networks, bench.oracle, config, nullptr),
                    std::invalid_argument);
}

TEST_CASE("rta stage layout, budgets and proportions") {
    RunConfig config = cheap_config();
    Bench bench = make_bench(12, 20, 47, config);
    const int levels = 4, budget = 9;
    RunTrace trace = run_rta(bench.pop.networks, bench.oracle, config, levels, budget,
                             &bench.truth);

    REQUIRE(trace.stages.size() == 2 + levels);
    CHECK(trace.stages[0].kind == StageKind::Boundary);
    CHECK(trace.stages[1].kind == StageKind::Boundary);

    const auto budgets = distribute_evenly(budget, levels);
    for (int k = 0; k < levels; ++k) {
        const StageRecord& rec = trace.stages[2 + k];
        CHECK(static_cast<int>(rec.consumed.size()) == budgets[k]);
        CHECK(rec.target.arm == (k % 2 == 0 ? 1 : 0));  // alternating arms
        CHECK(rec.target.exposure >= 0.0);
        CHECK(rec.target.exposure <= 1.0);
        for (const ConsumedNetwork& c : rec.consumed) {
            const int n = c.assignment.size();
            const int expected = static_cast<int>(std::lround(rec.target.exposure * n));
            CHECK(c.assignment.treatments.sum() == expected);
        }
    }
    CHECK(trace.networks_consumed() == 2 + budget);
    CHECK_FALSE(trace.truncated);
}

TEST_CASE("rta is deterministic and validates its inputs") {
    RunConfig config = cheap_config();
    Bench bench = make_bench(8, 12, 53, config);
    RunTrace a = run_rta(bench.pop.networks, bench.oracle, config, 3, 5, &bench.truth);
    RunTrace b = run_rta(bench.pop.networks, bench.oracle, config, 3, 5, &bench.truth);
    check_traces_identical(a, b);
    CHECK(a.stages[2].target.exposure == b.stages[2].target.exposure);

    CHECK_THROWS_AS(run_rta(bench.pop.networks, bench.oracle, config, 0, 5, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_rta(bench.pop.networks, bench.oracle, config, 6, 5, nullptr),
                    std::invalid_argument);
}

TEST_CASE("rta truncates when the budget exceeds the supply") {
    RunConfig config = cheap_config();
    Bench bench = make_bench(4, 10, 59, config);
    RunTrace trace = run_rta(bench.pop.networks, bench.oracle, config, 3, 6, &bench.truth);
    CHECK(trace.truncated);
    CHECK(trace.remaining_network_ids.empty());
}
