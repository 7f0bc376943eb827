#include "aci/app.hpp"

#include "aci/rng.hpp"

#include <iostream>
#include <set>

namespace aci::app {

namespace fs = std::filesystem;
using io::json;

namespace {

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) throw std::invalid_argument("config section '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key))
            throw std::invalid_argument("unknown config key '" + where + "." + key + "'");
    }
}

RunConfig parse_run_section(const json& j) {
    require_keys(j, "run",
                 {"min_window", "levels", "alpha", "grid", "min_separation", "ga", "gp",
                  "variance_stop"});
    RunConfig run;
    run.min_window_count = j.value("min_window", run.min_window_count);
    run.max_levels = j.value("levels", run.max_levels);
    run.window_width = j.value("alpha", run.window_width);
    run.grid_size = j.value("grid", run.grid_size);
    run.min_separation = j.value("min_separation", run.min_separation);
    if (j.contains("ga")) {
        require_keys(j["ga"], "run.ga",
                     {"population_size", "epochs", "patience", "crossover_rate", "mutation_rate",
                      "standardize", "metric"});
        const json& g = j["ga"];
        run.ga.population_size = g.value("population_size", run.ga.population_size);
        run.ga.epochs = g.value("epochs", run.ga.epochs);
        run.ga.early_stop_patience = g.value("patience", run.ga.early_stop_patience);
        run.ga.crossover_rate = g.value("crossover_rate", run.ga.crossover_rate);
        if (g.contains("mutation_rate") && !g["mutation_rate"].is_null())
            run.ga.mutation_rate = g["mutation_rate"].get<double>();
        run.ga.fitness.standardize = g.value("standardize", true);
        const std::string metric = g.value("metric", "squared_euclidean");
        if (metric == "manhattan") run.ga.fitness.metric = DistanceMetric::Manhattan;
        else if (metric != "squared_euclidean")
            throw std::invalid_argument("unknown distance metric: " + metric);
    }
    if (j.contains("gp")) {
        require_keys(j["gp"], "run.gp",
                     {"restarts", "max_iterations", "gradient_tol", "init_low", "init_high"});
        const json& g = j["gp"];
        run.gp.restarts = g.value("restarts", run.gp.restarts);
        run.gp.max_iterations = g.value("max_iterations", run.gp.max_iterations);
        run.gp.gradient_tol = g.value("gradient_tol", run.gp.gradient_tol);
        run.gp.init_low = g.value("init_low", run.gp.init_low);
        run.gp.init_high = g.value("init_high", run.gp.init_high);
    }
    if (j.contains("variance_stop") && !j["variance_stop"].is_null())
        run.variance_stop = j["variance_stop"].get<double>();
    return run;
}

}  // namespace

CliConfig parse_config(const json& j) {
    require_keys(j, "", {"mode", "out", "population", "run", "rta", "seeds", "compare"});
    CliConfig config;
    config.mode = j.value("mode", std::string());
    if (j.contains("out")) config.out = j["out"].get<std::string>();

    if (j.contains("population")) {
        require_keys(j["population"], "population",
                     {"networks", "nodes", "edge_probability", "noise_sd", "model"});
        const json& p = j["population"];
        config.population.networks = p.value("networks", config.population.networks);
        config.population.nodes = p.value("nodes", config.population.nodes);
        config.population.graph.edge_probability =
            p.value("edge_probability", config.population.graph.edge_probability);
        if (p.contains("noise_sd") && !p["noise_sd"].is_null())
            config.population.noise_sd = p["noise_sd"].get<double>();
        if (p.contains("model") && !p["model"].is_null())
            config.population.model = io::model_from_json(p["model"]);
    }
    if (j.contains("run")) config.run = parse_run_section(j["run"]);
    if (j.contains("rta")) {
        require_keys(j["rta"], "rta", {"levels", "budget"});
        if (j["rta"].contains("levels")) config.rta.levels = j["rta"]["levels"].get<int>();
        if (j["rta"].contains("budget")) config.rta.budget = j["rta"]["budget"].get<int>();
    }
    if (j.contains("seeds")) {
        require_keys(j["seeds"], "seeds", {"population", "ga", "run"});
        const json& s = j["seeds"];
        config.seeds.population = s.value("population", config.seeds.population);
        config.seeds.ga = s.value("ga", config.seeds.ga);
        config.seeds.run = s.value("run", config.seeds.run);
    }
    if (j.contains("compare")) {
        require_keys(j["compare"], "compare", {"aci_trace", "rta_trace"});
        if (j["compare"].contains("aci_trace"))
            config.aci_trace = fs::path(j["compare"]["aci_trace"].get<std::string>());
        if (j["compare"].contains("rta_trace"))
            config.rta_trace = fs::path(j["compare"]["rta_trace"].get<std::string>());
    }
    return config;
}

CliConfig load_config_file(const fs::path& path) {
    return parse_config(io::read_json_file(path));
}

int cmd_simulate(const CliConfig& config) {
    SimPopulation pop =
        generate_population(config.population.networks, config.population.nodes,
                            config.population.graph, config.seeds.population,
                            config.population.model);
    if (config.population.noise_sd) pop.model.noise_sd = *config.population.noise_sd;
    io::write_population(pop, config.population.graph, config.out / "population");
    std::cout << "wrote " << pop.networks.size() << " networks ("
              << pop.total_individuals() << " individuals) to "
              << (config.out / "population").string() << "\n";
    return kOk;
}

namespace {

SimPopulation reload_population(const CliConfig& config) {
    io::LoadedPopulation loaded = io::load_population(config.out / "population");
    if (!loaded.model)
        throw std::runtime_error("population has no outcome model; run simulate first");
    SimPopulation pop;
    pop.networks = std::move(loaded.networks);
    pop.model = *loaded.model;
    pop.seed = loaded.population_seed;
    return pop;
}

void write_run_outputs(const RunTrace& trace, const RunConfig& run_config,
                       const io::Seeds& seeds, const io::PopulationFingerprint& fingerprint,
                       const fs::path& dir) {
    io::write_json_file(io::trace_to_json(trace, run_config, seeds, fingerprint),
                        dir / "trace.json");
    io::write_eise_report_csv(trace, dir / "eise.csv");
    int index = 0;
    for (const StageRecord& rec : trace.stages) {
        if (rec.curves) {
            const std::string prefix = "stage_" + std::to_string(index) + "_arm";
            io::write_curve_csv(rec.curves->spillover, dir / (prefix + "0.csv"));
            io::write_curve_csv(rec.curves->overall, dir / (prefix + "1.csv"));
            io::write_curve_csv(rec.curves->direct, dir / (prefix + "10.csv"));
        }
        ++index;
    }
}

}  // namespace

int cmd_run(const CliConfig& config, const std::string& method) {
    SimPopulation pop = reload_population(config);
    io::PopulationFingerprint fingerprint;
    fingerprint.population_seed = pop.seed;
    fingerprint.networks = static_cast<int>(pop.networks.size());
    fingerprint.individuals = pop.total_individuals();

    RunConfig run_config = config.run;
    run_config.seed = config.seeds.run;
    run_config.ga.seed = config.seeds.ga;

    GroundTruth truth = true_effect_curves(pop, uniform_grid(run_config.grid_size));
    OutcomeOracle oracle = simulation_oracle(pop, config.seeds.run);

    RunTrace trace;
    if (method == "aci") {
        trace = run_aci(pop.networks, oracle, run_config, &truth);
    } else if (method == "rta") {
        int levels = 0;
        int budget = 0;
        if (config.rta.levels && config.rta.budget) {
            levels = *config.rta.levels;
            budget = *config.rta.budget;
        } else {
            // Mirror the ACI run so the two methods spend the same networks.
            const fs::path aci_trace_path = config.out / "aci" / "trace.json";
            if (!fs::exists(aci_trace_path))
                throw std::invalid_argument(
                    "rta.levels/rta.budget unset and no ACI trace found to mirror at " +
                    aci_trace_path.string());
            io::TraceSummary aci = io::summarize_trace(io::read_json_file(aci_trace_path));
            levels = config.rta.levels.value_or(static_cast<int>(aci.stages.size()) - 2);
            budget = config.rta.budget.value_or(
                aci.stages.empty() ? 0 : aci.stages.back().cumulative_networks - 2);
        }
        trace = run_rta(pop.networks, oracle, run_config, levels, budget, &truth);
    } else {
        throw std::invalid_argument("unknown run method: " + method);
    }

    write_run_outputs(trace, run_config, config.seeds, fingerprint, config.out / method);
    std::cout << method << ": " << trace.stages.size() << " stages, "
              << trace.networks_consumed() << " networks consumed"
              << (trace.truncated ? " (truncated)" : "") << "\n";
    return trace.truncated ? kTruncatedRun : kOk;
}

int cmd_compare(const CliConfig& config) {
    const fs::path aci_path = config.aci_trace.value_or(config.out / "aci" / "trace.json");
    const fs::path rta_path = config.rta_trace.value_or(config.out / "rta" / "trace.json");
    io::TraceSummary aci = io::summarize_trace(io::read_json_file(aci_path));
    io::TraceSummary rta = io::summarize_trace(io::read_json_file(rta_path));
    io::write_compare_csv(aci, rta, config.out / "compare.csv");
    std::cout << "wrote " << (config.out / "compare.csv").string() << "\n";
    return kOk;
}

int run_mode(const CliConfig& config) {
    if (config.mode == "simulate") return cmd_simulate(config);
    if (config.mode == "aci" || config.mode == "rta") return cmd_run(config, config.mode);
    if (config.mode == "compare") return cmd_compare(config);
    throw std::invalid_argument("unknown mode: '" + config.mode + "'");
}

}  // namespace aci::app
