#include "aci/io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace aci::io {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot open for writing: " + path.string());
    out << std::setprecision(17);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t min_fields) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open for reading: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {  // header
            first = false;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() < min_fields)
            throw std::runtime_error("malformed CSV row in " + path.string() + ": " + line);
        rows.push_back(std::move(fields));
    }
    return rows;
}

json vector_to_json(const VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

VectorXd vector_from_json(const json& arr) {
    VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
    return v;
}

json assignment_to_json(const Assignment& a) {
    json arr = json::array();
    for (int i = 0; i < a.size(); ++i) arr.push_back(a.treatments(i));
    return arr;
}

json fingerprint_to_json(const PopulationFingerprint& fp) {
    return json{{"population_seed", fp.population_seed},
                {"networks", fp.networks},
                {"individuals", fp.individuals}};
}

PopulationFingerprint fingerprint_from_json(const json& j) {
    PopulationFingerprint fp;
    fp.population_seed = j.at("population_seed").get<std::uint64_t>();
    fp.networks = j.at("networks").get<int>();
    fp.individuals = j.at("individuals").get<int>();
    return fp;
}

}  // namespace

void write_network_csvs(const Network& net, const fs::path& dir) {
    {
        auto out = open_out(dir / (net.id() + "_edges.csv"));
        out << "i,j,weight\n";
        for (int i = 0; i < net.size(); ++i)
            for (int j = i + 1; j < net.size(); ++j)
                if (net.weights()(i, j) > 0.0)
                    out << i << "," << j << "," << net.weights()(i, j) << "\n";
    }
    {
        auto out = open_out(dir / (net.id() + "_covariates.csv"));
        out << "node";
        for (int k = 1; k <= net.covariate_dim(); ++k) out << ",c" << k;
        out << "\n";
        for (int i = 0; i < net.size(); ++i) {
            out << i;
            for (int k = 0; k < net.covariate_dim(); ++k) out << "," << net.covariates()(i, k);
            out << "\n";
        }
    }
}

Network load_network(const fs::path& edges_csv, const fs::path& covariates_csv,
                     const std::string& id, IsolatedPolicy policy) {
    auto cov_rows = read_csv(covariates_csv, 2);
    const int n = static_cast<int>(cov_rows.size());
    if (n == 0) throw std::runtime_error("empty covariate table: " + covariates_csv.string());
    const int p = static_cast<int>(cov_rows.front().size()) - 1;
    MatrixXd covariates(n, p);
    std::vector<bool> seen(n, false);
    for (const auto& row : cov_rows) {
        const int node = std::stoi(row[0]);
        if (node < 0 || node >= n)
            throw std::out_of_range("covariate node index out of range: " + row[0]);
        if (seen[node]) throw std::runtime_error("duplicate covariate row for node " + row[0]);
        seen[node] = true;
        if (static_cast<int>(row.size()) != p + 1)
            throw std::runtime_error("inconsistent covariate row width");
        for (int k = 0; k < p; ++k) covariates(node, k) = std::stod(row[k + 1]);
    }

    std::vector<Edge> edges;
    for (const auto& row : read_csv(edges_csv, 3))
        edges.push_back(Edge{std::stoi(row[0]), std::stoi(row[1]), std::stod(row[2])});
    return build_network(id, edges, covariates, policy);
}

void write_population(const SimPopulation& pop, const GraphConfig& graph, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["seeds"] = {{"population", pop.seed}};
    json model = model_to_json(pop.model);
    model["seeds"] = {{"population", pop.seed}};
    manifest["graph"] = {{"edge_probability", graph.edge_probability}};
    manifest["model"] = "model.json";
    manifest["networks"] = json::array();
    for (const Network& net : pop.networks) {
        write_network_csvs(net, dir);
        manifest["networks"].push_back({{"id", net.id()},
                                        {"edges", net.id() + "_edges.csv"},
                                        {"covariates", net.id() + "_covariates.csv"},
                                        {"size", net.size()}});
    }
    write_json_file(model, dir / "model.json");
    write_json_file(manifest, dir / "manifest.json");
}

PopulationFingerprint LoadedPopulation::fingerprint() const {
    PopulationFingerprint fp;
    fp.population_seed = population_seed;
    fp.networks = static_cast<int>(networks.size());
    for (const Network& net : networks) fp.individuals += net.size();
    return fp;
}

LoadedPopulation load_population(const fs::path& dir) {
    json manifest = read_json_file(dir / "manifest.json");
    LoadedPopulation loaded;
    loaded.population_seed = manifest.at("seeds").at("population").get<std::uint64_t>();
    if (manifest.contains("graph"))
        loaded.graph.edge_probability = manifest["graph"].value("edge_probability", 0.08);
    for (const json& entry : manifest.at("networks")) {
        loaded.networks.push_back(load_network(dir / entry.at("edges").get<std::string>(),
                                               dir / entry.at("covariates").get<std::string>(),
                                               entry.at("id").get<std::string>()));
    }
    if (manifest.contains("model")) {
        const fs::path model_path = dir / manifest["model"].get<std::string>();
        if (fs::exists(model_path)) loaded.model = model_from_json(read_json_file(model_path));
    }
    return loaded;
}

json model_to_json(const OutcomeModelParams& model) {
    json j;
    // rows indexed by arm: [arm 0, arm 1]
    j["beta_own"] = {{model.own(0, 0), model.own(0, 1), model.own(0, 2)},
                     {model.own(1, 0), model.own(1, 1), model.own(1, 2)}};
    j["beta_neighbor"] = {{model.neighbor(0, 0), model.neighbor(0, 1), model.neighbor(0, 2)},
                          {model.neighbor(1, 0), model.neighbor(1, 1), model.neighbor(1, 2)}};
    j["noise_sd"] = model.noise_sd;
    return j;
}

OutcomeModelParams model_from_json(const json& j) {
    OutcomeModelParams model;
    for (int arm = 0; arm < 2; ++arm) {
        for (int k = 0; k < 3; ++k) {
            model.own(arm, k) = j.at("beta_own").at(arm).at(k).get<double>();
            model.neighbor(arm, k) = j.at("beta_neighbor").at(arm).at(k).get<double>();
        }
    }
    model.noise_sd = j.at("noise_sd").get<double>();
    return model;
}

json fit_to_json(const ArmFitSummary& fit) {
    const VectorXd log_params = fit.params.to_log();
    const int d = static_cast<int>(fit.params.covariate_precision.size());
    json j;
    j["log_covariate_variance"] = log_params(0);
    j["log_covariate_precision"] = vector_to_json(log_params.segment(1, d));
    j["log_exposure_variance"] = log_params(d + 1);
    j["log_exposure_length"] = log_params(d + 2);
    j["log_noise_variance"] = log_params(d + 3);
    j["log_marginal_likelihood"] = fit.log_marginal;
    j["training_size"] = fit.training_size;
    return j;
}

ArmFitSummary fit_from_json(const json& j) {
    VectorXd precision = vector_from_json(j.at("log_covariate_precision"));
    VectorXd log_params(precision.size() + 4);
    log_params(0) = j.at("log_covariate_variance").get<double>();
    log_params.segment(1, precision.size()) = precision;
    log_params(precision.size() + 1) = j.at("log_exposure_variance").get<double>();
    log_params(precision.size() + 2) = j.at("log_exposure_length").get<double>();
    log_params(precision.size() + 3) = j.at("log_noise_variance").get<double>();
    ArmFitSummary fit;
    fit.params = KernelParams::from_log(log_params);
    fit.log_marginal = j.at("log_marginal_likelihood").get<double>();
    fit.training_size = j.at("training_size").get<int>();
    return fit;
}

void write_curve_csv(const EffectCurve& curve, const fs::path& path) {
    auto out = open_out(path);
    out << "arm,g,mean,variance\n";
    const int arm_code = curve.kind == EffectKind::Direct ? 10 : curve.arm();
    for (int k = 0; k < curve.points(); ++k)
        out << arm_code << "," << curve.grid(k) << "," << curve.mean(k) << ","
            << curve.variance(k) << "\n";
}

json curve_to_json(const EffectCurve& curve) {
    return json{{"effect", effect_label(curve.kind)},
                {"grid", vector_to_json(curve.grid)},
                {"mean", vector_to_json(curve.mean)},
                {"variance", vector_to_json(curve.variance)},
                {"baseline", curve.baseline}};
}

EffectCurve curve_from_json(const json& j) {
    EffectCurve curve;
    const std::string label = j.at("effect").get<std::string>();
    if (label == "tau1") curve.kind = EffectKind::Overall;
    else if (label == "tau0") curve.kind = EffectKind::Spillover;
    else if (label == "tau10") curve.kind = EffectKind::Direct;
    else throw std::runtime_error("unknown effect label: " + label);
    curve.grid = vector_from_json(j.at("grid"));
    curve.mean = vector_from_json(j.at("mean"));
    curve.variance = vector_from_json(j.at("variance"));
    curve.baseline = j.at("baseline").get<double>();
    return curve;
}

json run_config_to_json(const RunConfig& config) {
    json j;
    j["min_window_count"] = config.min_window_count;
    j["max_levels"] = config.max_levels;
    j["alpha"] = config.window_width;
    j["grid"] = config.grid_size;
    j["min_separation"] = config.min_separation;
    j["seed"] = config.seed;
    j["ga"] = {{"population_size", config.ga.population_size},
               {"epochs", config.ga.epochs},
               {"patience", config.ga.early_stop_patience},
               {"crossover_rate", config.ga.crossover_rate},
               {"mutation_rate",
                config.ga.mutation_rate ? json(*config.ga.mutation_rate) : json(nullptr)},
               {"seed", config.ga.seed},
               {"standardize", config.ga.fitness.standardize},
               {"metric", config.ga.fitness.metric == DistanceMetric::SquaredEuclidean
                              ? "squared_euclidean"
                              : "manhattan"}};
    j["gp"] = {{"restarts", config.gp.restarts},
               {"max_iterations", config.gp.max_iterations},
               {"gradient_tol", config.gp.gradient_tol},
               {"init_low", config.gp.init_low},
               {"init_high", config.gp.init_high}};
    j["variance_stop"] = config.variance_stop ? json(*config.variance_stop) : json(nullptr);
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig config;
    config.min_window_count = j.value("min_window_count", config.min_window_count);
    config.max_levels = j.value("max_levels", config.max_levels);
    config.window_width = j.value("alpha", config.window_width);
    config.grid_size = j.value("grid", config.grid_size);
    config.min_separation = j.value("min_separation", config.min_separation);
    config.seed = j.value("seed", config.seed);
    if (j.contains("ga")) {
        const json& g = j["ga"];
        config.ga.population_size = g.value("population_size", config.ga.population_size);
        config.ga.epochs = g.value("epochs", config.ga.epochs);
        config.ga.early_stop_patience = g.value("patience", config.ga.early_stop_patience);
        config.ga.crossover_rate = g.value("crossover_rate", config.ga.crossover_rate);
        if (g.contains("mutation_rate") && !g["mutation_rate"].is_null())
            config.ga.mutation_rate = g["mutation_rate"].get<double>();
        config.ga.seed = g.value("seed", config.ga.seed);
        config.ga.fitness.standardize = g.value("standardize", true);
        if (g.value("metric", "squared_euclidean") == std::string("manhattan"))
            config.ga.fitness.metric = DistanceMetric::Manhattan;
    }
    if (j.contains("gp")) {
        const json& g = j["gp"];
        config.gp.restarts = g.value("restarts", config.gp.restarts);
        config.gp.max_iterations = g.value("max_iterations", config.gp.max_iterations);
        config.gp.gradient_tol = g.value("gradient_tol", config.gp.gradient_tol);
        config.gp.init_low = g.value("init_low", config.gp.init_low);
        config.gp.init_high = g.value("init_high", config.gp.init_high);
    }
    if (j.contains("variance_stop") && !j["variance_stop"].is_null())
        config.variance_stop = j["variance_stop"].get<double>();
    return config;
}

json trace_to_json(const RunTrace& trace, const RunConfig& config, const Seeds& seeds,
                   const PopulationFingerprint& fingerprint) {
    json j;
    j["method"] = trace.method;
    j["seeds"] = {{"population", seeds.population}, {"ga", seeds.ga}, {"run", seeds.run}};
    j["config"] = run_config_to_json(config);
    j["population"] = fingerprint_to_json(fingerprint);
    j["truncated"] = trace.truncated;
    j["remaining"] = trace.remaining_network_ids;
    j["visited"] = json::array();
    for (const Target& t : trace.visited_levels)
        j["visited"].push_back({{"arm", t.arm}, {"exposure", t.exposure}});

    j["stages"] = json::array();
    int index = 0;
    for (const StageRecord& rec : trace.stages) {
        json stage;
        stage["index"] = index++;
        stage["kind"] = stage_kind_label(rec.kind);
        stage["target"] = {{"arm", rec.target.arm}, {"exposure", rec.target.exposure}};
        stage["dataset_size"] = rec.dataset_size;
        stage["partial"] = rec.partial;
        stage["consumed"] = json::array();
        for (const ConsumedNetwork& c : rec.consumed) {
            stage["consumed"].push_back({{"network", c.network_id},
                                         {"assignment", assignment_to_json(c.assignment)},
                                         {"in_window", c.in_window_count},
                                         {"fitness", c.fitness}});
        }
        if (rec.curves) {
            stage["curves"] = {{"overall", curve_to_json(rec.curves->overall)},
                               {"spillover", curve_to_json(rec.curves->spillover)},
                               {"direct", curve_to_json(rec.curves->direct)}};
        } else {
            stage["curves"] = nullptr;
        }
        stage["gp"] = {
            {"control", rec.fit_control ? fit_to_json(*rec.fit_control) : json(nullptr)},
            {"treated", rec.fit_treated ? fit_to_json(*rec.fit_treated) : json(nullptr)}};
        if (rec.eise_overall || rec.eise_spillover) {
            stage["eise"] = {
                {"overall", rec.eise_overall ? json(*rec.eise_overall) : json(nullptr)},
                {"spillover", rec.eise_spillover ? json(*rec.eise_spillover) : json(nullptr)}};
        } else {
            stage["eise"] = nullptr;
        }
        j["stages"].push_back(std::move(stage));
    }
    return j;
}

TraceSummary summarize_trace(const json& trace_json) {
    TraceSummary summary;
    summary.method = trace_json.at("method").get<std::string>();
    summary.fingerprint = fingerprint_from_json(trace_json.at("population"));
    summary.truncated = trace_json.value("truncated", false);
    int cumulative = 0;
    for (const json& stage : trace_json.at("stages")) {
        StageSummary s;
        s.index = stage.at("index").get<int>();
        s.kind = stage.at("kind").get<std::string>();
        cumulative += static_cast<int>(stage.at("consumed").size());
        s.cumulative_networks = cumulative;
        if (stage.contains("eise") && !stage["eise"].is_null()) {
            const json& e = stage["eise"];
            if (!e.at("overall").is_null()) s.eise_overall = e["overall"].get<double>();
            if (!e.at("spillover").is_null()) s.eise_spillover = e["spillover"].get<double>();
        }
        summary.stages.push_back(std::move(s));
    }
    return summary;
}

void write_eise_report_csv(const RunTrace& trace, const fs::path& path) {
    auto out = open_out(path);
    out << "stage,arm,eise\n";
    int index = 0;
    for (const StageRecord& rec : trace.stages) {
        if (rec.eise_overall) out << index << ",1," << *rec.eise_overall << "\n";
        if (rec.eise_spillover) out << index << ",0," << *rec.eise_spillover << "\n";
        ++index;
    }
}

void write_compare_csv(const TraceSummary& aci, const TraceSummary& rta, const fs::path& path) {
    if (!(aci.fingerprint == rta.fingerprint))
        throw std::runtime_error("compare: traces come from different populations");

    // Rows keyed by cumulative networks consumed, mirroring the
    // networks-by-effect comparison layout.
    std::map<int, std::pair<const StageSummary*, const StageSummary*>> rows;
    for (const StageSummary& s : aci.stages) rows[s.cumulative_networks].first = &s;
    for (const StageSummary& s : rta.stages) rows[s.cumulative_networks].second = &s;

    auto cell = [](const StageSummary* s, bool overall) -> std::string {
        if (!s) return "NA";
        const auto& v = overall ? s->eise_overall : s->eise_spillover;
        if (!v) return "NA";
        std::ostringstream text;
        text << std::setprecision(17) << *v;
        return text.str();
    };

    auto out = open_out(path);
    out << "networks,effect,ACI,RTA\n";
    for (const auto& [networks, pair] : rows) {
        out << networks << ",tau1," << cell(pair.first, true) << "," << cell(pair.second, true)
            << "\n";
        out << networks << ",tau0," << cell(pair.first, false) << ","
            << cell(pair.second, false) << "\n";
    }
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open for reading: " + path.string());
    json j;
    in >> j;
    return j;
}

void write_json_file(const json& j, const fs::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace aci::io
