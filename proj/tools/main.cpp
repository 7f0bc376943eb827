#include "aci/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App cli{
        "aci: active-learning experimental design for direct and spillover effect "
        "estimation on networks"};

    std::optional<std::string> config_path;
    std::optional<std::string> mode;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed_population;
    std::optional<std::uint64_t> seed_run;
    std::optional<int> networks;
    std::optional<int> nodes;
    std::optional<int> levels;
    std::optional<int> min_window;
    std::optional<double> alpha;
    std::optional<int> grid;

    cli.add_option("--config", config_path, "JSON config file (flags override it)");
    cli.add_option("--mode", mode, "simulate | aci | rta | compare")
        ->check(CLI::IsMember({"simulate", "aci", "rta", "compare"}));
    cli.add_option("--out", out, "output directory");
    cli.add_option("--seed-population", seed_population, "population seed");
    cli.add_option("--seed-run", seed_run, "run seed (oracle noise, restarts, random levels)");
    cli.add_option("--networks", networks, "number of networks to simulate (Q)");
    cli.add_option("--nodes", nodes, "individuals per network (n)");
    cli.add_option("--levels", levels, "maximum selected treatment levels (T)");
    cli.add_option("--min-window", min_window, "in-window sample floor per target (M)");
    cli.add_option("--alpha", alpha, "exposure window width");
    cli.add_option("--grid", grid, "exposure grid points");

    CLI11_PARSE(cli, argc, argv);

    aci::app::CliConfig config;
    try {
        if (config_path) config = aci::app::load_config_file(*config_path);
        if (mode) config.mode = *mode;
        if (out) config.out = *out;
        if (seed_population) config.seeds.population = *seed_population;
        if (seed_run) config.seeds.run = *seed_run;
        if (networks) config.population.networks = *networks;
        if (nodes) config.population.nodes = *nodes;
        if (levels) config.run.max_levels = *levels;
        if (min_window) config.run.min_window_count = *min_window;
        if (alpha) config.run.window_width = *alpha;
        if (grid) config.run.grid_size = *grid;
        if (config.mode.empty())
            throw std::invalid_argument("no mode given (use --mode or a config file)");
    } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return aci::app::kConfigError;
    }

    try {
        return aci::app::run_mode(config);
    } catch (const std::invalid_argument& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return aci::app::kConfigError;
    } catch (const std::ios_base::failure& err) {
        std::cerr << "i/o error: " << err.what() << "\n";
        return aci::app::kIoError;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return aci::app::kIoError;
    }
}
