#include "aci/active_learning.hpp"
#include "aci/app.hpp"
#include "aci/assignment_opt.hpp"
#include "aci/effects.hpp"
#include "aci/gp.hpp"
#include "aci/network.hpp"
#include "aci/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace aci;

namespace {

// Keeps the C++ oracle closure intact when it round-trips through python.
struct OracleHandle {
    OutcomeOracle fn;
    VectorXd operator()(const Network& net, const Assignment& assign) const {
        return fn(net, assign);
    }
};

OutcomeOracle as_oracle(const py::object& obj) {
    if (py::isinstance<OracleHandle>(obj)) return obj.cast<OracleHandle&>().fn;
    py::function f = obj.cast<py::function>();
    return [f](const Network& net, const Assignment& assign) {
        py::gil_scoped_acquire gil;
        return f(py::cast(net, py::return_value_policy::reference), assign).cast<VectorXd>();
    };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Active-learning experimental design for direct and spillover effect "
              "estimation on networks";

    // ---- network ----
    py::class_<Assignment>(m, "Assignment")
        .def(py::init<VectorXi>(), py::arg("treatments"))
        .def_static("zeros", &Assignment::zeros, py::arg("n"))
        .def_static("ones", &Assignment::ones, py::arg("n"))
        .def_readonly("treatments", &Assignment::treatments)
        .def("__len__", &Assignment::size)
        .def("__eq__", &Assignment::operator==);

    py::class_<Observation>(m, "Observation")
        .def_readonly("own_treatment", &Observation::own_treatment)
        .def_readonly("exposure", &Observation::exposure)
        .def_readonly("features", &Observation::features)
        .def_readonly("outcome", &Observation::outcome);

    py::class_<Network>(m, "Network")
        .def(py::init<std::string, MatrixXd, MatrixXd>(), py::arg("id"), py::arg("weights"),
             py::arg("covariates"))
        .def_property_readonly("id", &Network::id)
        .def_property_readonly("size", &Network::size)
        .def_property_readonly("covariate_dim", &Network::covariate_dim)
        .def_property_readonly("weights", &Network::weights)
        .def_property_readonly("covariates", &Network::covariates)
        .def_property_readonly("neighbor_covariates", &Network::neighbor_covariates)
        .def_property_readonly("integrated_features", &Network::integrated_features);

    py::enum_<IsolatedPolicy>(m, "IsolatedPolicy")
        .value("Reject", IsolatedPolicy::Reject)
        .value("Drop", IsolatedPolicy::Drop);

    py::class_<Edge>(m, "Edge")
        .def(py::init<int, int, double>(), py::arg("i"), py::arg("j"), py::arg("weight") = 1.0)
        .def_readwrite("i", &Edge::i)
        .def_readwrite("j", &Edge::j)
        .def_readwrite("weight", &Edge::weight);

    m.def("build_network", &build_network, py::arg("id"), py::arg("edges"),
          py::arg("covariates"), py::arg("policy") = IsolatedPolicy::Reject);
    m.def("neighbor_exposure", &neighbor_exposure, py::arg("net"), py::arg("assign"),
          py::arg("i"));
    m.def("neighbor_exposures", &neighbor_exposures, py::arg("net"), py::arg("assign"));
    m.def("aggregate_neighbor_covariates", &aggregate_neighbor_covariates, py::arg("net"),
          py::arg("i"));
    m.def("integrate", &integrate, py::arg("net"), py::arg("assign"),
          py::arg("outcomes") = std::nullopt);

    // ---- gp ----
    py::class_<KernelParams>(m, "KernelParams")
        .def(py::init<>())
        .def_static("unit", &KernelParams::unit, py::arg("feature_dim"))
        .def_readwrite("covariate_variance", &KernelParams::covariate_variance)
        .def_readwrite("covariate_precision", &KernelParams::covariate_precision)
        .def_readwrite("exposure_variance", &KernelParams::exposure_variance)
        .def_readwrite("exposure_length", &KernelParams::exposure_length)
        .def_readwrite("noise_variance", &KernelParams::noise_variance)
        .def("to_log", &KernelParams::to_log)
        .def_static("from_log", &KernelParams::from_log, py::arg("log_values"));

    py::class_<TrainingSet>(m, "TrainingSet")
        .def(py::init<>())
        .def_static(
            "from_observations",
            [](const std::vector<Observation>& rows, int arm) {
                return TrainingSet::from_observations(rows, arm);
            },
            py::arg("rows"), py::arg("arm"))
        .def_readwrite("arm", &TrainingSet::arm)
        .def_readwrite("features", &TrainingSet::features)
        .def_readwrite("exposures", &TrainingSet::exposures)
        .def_readwrite("outcomes", &TrainingSet::outcomes)
        .def("__len__", &TrainingSet::size);

    py::class_<QueryPoints>(m, "QueryPoints")
        .def(py::init([](MatrixXd features, VectorXd exposures) {
                 return QueryPoints{std::move(features), std::move(exposures)};
             }),
             py::arg("features"), py::arg("exposures"))
        .def_readwrite("features", &QueryPoints::features)
        .def_readwrite("exposures", &QueryPoints::exposures);

    py::class_<Posterior>(m, "Posterior")
        .def_readonly("mean", &Posterior::mean)
        .def_readonly("covariance", &Posterior::covariance);

    py::class_<GpFitConfig>(m, "GpFitConfig")
        .def(py::init<>())
        .def_readwrite("restarts", &GpFitConfig::restarts)
        .def_readwrite("max_iterations", &GpFitConfig::max_iterations)
        .def_readwrite("gradient_tol", &GpFitConfig::gradient_tol)
        .def_readwrite("init_low", &GpFitConfig::init_low)
        .def_readwrite("init_high", &GpFitConfig::init_high)
        .def_readwrite("seed", &GpFitConfig::seed)
        .def_readwrite("warm_start", &GpFitConfig::warm_start);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("params", &FitResult::params)
        .def_readonly("log_marginal", &FitResult::log_marginal);

    m.def("kernel_eval", &kernel_eval, py::arg("x1"), py::arg("g1"), py::arg("x2"),
          py::arg("g2"), py::arg("params"));
    m.def("kernel_matrix", &kernel_matrix, py::arg("xa"), py::arg("ga"), py::arg("xb"),
          py::arg("gb"), py::arg("params"));
    m.def("log_marginal_likelihood", &log_marginal_likelihood, py::arg("train"),
          py::arg("params"));
    m.def("lml_gradient", &lml_gradient, py::arg("train"), py::arg("params"));
    m.def("fit_hyperparameters", &fit_hyperparameters, py::arg("train"), py::arg("config"));
    m.def("posterior", &posterior, py::arg("train"), py::arg("params"), py::arg("queries"));

    py::class_<ArmModel>(m, "ArmModel")
        .def_static(
            "fit",
            [](const std::vector<Observation>& rows, int arm, const GpFitConfig& cfg) {
                return ArmModel::fit(rows, arm, cfg);
            },
            py::arg("rows"), py::arg("arm"), py::arg("config"))
        .def_static(
            "with_params",
            [](const std::vector<Observation>& rows, int arm, const KernelParams& params) {
                return ArmModel::with_params(rows, arm, params);
            },
            py::arg("rows"), py::arg("arm"), py::arg("params"))
        .def_property_readonly("arm", &ArmModel::arm)
        .def_property_readonly("training_size", &ArmModel::training_size)
        .def_property_readonly("params", &ArmModel::params)
        .def_property_readonly("log_marginal", &ArmModel::log_marginal)
        .def_property_readonly("outcome_offset", &ArmModel::outcome_offset)
        .def("predict", &ArmModel::predict, py::arg("queries"));

    // ---- effects ----
    py::enum_<EffectKind>(m, "EffectKind")
        .value("Overall", EffectKind::Overall)
        .value("Spillover", EffectKind::Spillover)
        .value("Direct", EffectKind::Direct);

    py::class_<EffectCurve>(m, "EffectCurve")
        .def_readonly("kind", &EffectCurve::kind)
        .def_readonly("grid", &EffectCurve::grid)
        .def_readonly("mean", &EffectCurve::mean)
        .def_readonly("variance", &EffectCurve::variance)
        .def_readonly("baseline", &EffectCurve::baseline)
        .def_property_readonly("arm", &EffectCurve::arm);

    py::class_<EffectCurves>(m, "EffectCurves")
        .def_readonly("overall", &EffectCurves::overall)
        .def_readonly("spillover", &EffectCurves::spillover)
        .def_readonly("direct", &EffectCurves::direct);

    py::class_<Target>(m, "Target")
        .def(py::init([](int arm, double exposure) { return Target{arm, exposure}; }),
             py::arg("arm"), py::arg("exposure"))
        .def_readwrite("arm", &Target::arm)
        .def_readwrite("exposure", &Target::exposure)
        .def("__repr__", [](const Target& t) {
            return "Target(arm=" + std::to_string(t.arm) +
                   ", exposure=" + std::to_string(t.exposure) + ")";
        });

    m.def("uniform_grid", &uniform_grid, py::arg("points"));
    m.def("mean_potential_outcome", &mean_potential_outcome, py::arg("posterior"));
    m.def("effect_curves", &effect_curves, py::arg("control"), py::arg("treated"),
          py::arg("population_features"), py::arg("grid"));
    m.def("select_target", &select_target, py::arg("overall"), py::arg("spillover"),
          py::arg("visited"), py::arg("min_separation"));

    // ---- assignment optimization ----
    py::class_<TargetWindow>(m, "TargetWindow")
        .def(py::init([](int arm, double center, double width) {
                 return TargetWindow{arm, center, width};
             }),
             py::arg("arm"), py::arg("center"), py::arg("width"))
        .def_readwrite("arm", &TargetWindow::arm)
        .def_readwrite("center", &TargetWindow::center)
        .def_readwrite("width", &TargetWindow::width)
        .def("low", &TargetWindow::low)
        .def("high", &TargetWindow::high)
        .def("contains", &TargetWindow::contains, py::arg("exposure"));

    py::enum_<DistanceMetric>(m, "DistanceMetric")
        .value("SquaredEuclidean", DistanceMetric::SquaredEuclidean)
        .value("Manhattan", DistanceMetric::Manhattan);

    py::class_<FitnessSpec>(m, "FitnessSpec")
        .def(py::init<>())
        .def_readwrite("metric", &FitnessSpec::metric)
        .def_readwrite("standardize", &FitnessSpec::standardize);

    py::class_<GaConfig>(m, "GaConfig")
        .def(py::init<>())
        .def_readwrite("population_size", &GaConfig::population_size)
        .def_readwrite("epochs", &GaConfig::epochs)
        .def_readwrite("early_stop_patience", &GaConfig::early_stop_patience)
        .def_readwrite("crossover_rate", &GaConfig::crossover_rate)
        .def_readwrite("mutation_rate", &GaConfig::mutation_rate)
        .def_readwrite("seed", &GaConfig::seed)
        .def_readwrite("fitness", &GaConfig::fitness);

    py::class_<OptimizationResult>(m, "OptimizationResult")
        .def_readonly("assignment", &OptimizationResult::assignment)
        .def_readonly("fitness", &OptimizationResult::fitness)
        .def_readonly("in_window_count", &OptimizationResult::in_window_count)
        .def_readonly("history", &OptimizationResult::history);

    m.def("in_window_set", &in_window_set, py::arg("net"), py::arg("assign"), py::arg("window"));
    m.def("fitness", &fitness, py::arg("net"), py::arg("assign"), py::arg("window"),
          py::arg("spec") = FitnessSpec{});
    m.def("optimize_assignment", &optimize_assignment, py::arg("net"), py::arg("window"),
          py::arg("config"));

    // ---- simulation ----
    py::class_<OutcomeModelParams>(m, "OutcomeModelParams")
        .def(py::init<>())
        .def_readwrite("own", &OutcomeModelParams::own)
        .def_readwrite("neighbor", &OutcomeModelParams::neighbor)
        .def_readwrite("noise_sd", &OutcomeModelParams::noise_sd);

    py::class_<GraphConfig>(m, "GraphConfig")
        .def(py::init<>())
        .def(py::init([](double p) { return GraphConfig{p}; }), py::arg("edge_probability"))
        .def_readwrite("edge_probability", &GraphConfig::edge_probability);

    py::class_<SimPopulation>(m, "SimPopulation")
        .def_readonly("networks", &SimPopulation::networks)
        .def_readonly("model", &SimPopulation::model)
        .def_readonly("seed", &SimPopulation::seed)
        .def_property_readonly("total_individuals", &SimPopulation::total_individuals)
        .def("all_features", &SimPopulation::all_features);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("overall", &GroundTruth::overall)
        .def_readonly("spillover", &GroundTruth::spillover);

    m.def("generate_population", &generate_population, py::arg("network_count"),
          py::arg("network_size"), py::arg("graph") = GraphConfig{}, py::arg("seed") = 1,
          py::arg("model") = std::nullopt);
    m.def("true_outcome", &true_outcome, py::arg("net"), py::arg("model"), py::arg("i"),
          py::arg("arm"), py::arg("exposure"), py::arg("noise") = 0.0);
    m.def("true_effect_curves", &true_effect_curves, py::arg("pop"), py::arg("grid"));
    m.def("eise", &eise, py::arg("estimated"), py::arg("truth"));

    py::class_<OracleHandle>(m, "OutcomeOracle")
        .def("__call__", &OracleHandle::operator(), py::arg("net"), py::arg("assign"));

    m.def(
        "simulation_oracle",
        [](const SimPopulation& pop, std::uint64_t run_seed) {
            return OracleHandle{simulation_oracle(pop, run_seed)};
        },
        py::arg("pop"), py::arg("run_seed"));

    // ---- active learning ----
    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("min_window_count", &RunConfig::min_window_count)
        .def_readwrite("max_levels", &RunConfig::max_levels)
        .def_readwrite("window_width", &RunConfig::window_width)
        .def_readwrite("grid_size", &RunConfig::grid_size)
        .def_readwrite("min_separation", &RunConfig::min_separation)
        .def_readwrite("ga", &RunConfig::ga)
        .def_readwrite("gp", &RunConfig::gp)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("variance_stop", &RunConfig::variance_stop);

    py::enum_<StageKind>(m, "StageKind")
        .value("Boundary", StageKind::Boundary)
        .value("WarmUp", StageKind::WarmUp)
        .value("Selected", StageKind::Selected);

    py::class_<ConsumedNetwork>(m, "ConsumedNetwork")
        .def_readonly("network_id", &ConsumedNetwork::network_id)
        .def_readonly("assignment", &ConsumedNetwork::assignment)
        .def_readonly("in_window_count", &ConsumedNetwork::in_window_count)
        .def_readonly("fitness", &ConsumedNetwork::fitness);

    py::class_<ArmFitSummary>(m, "ArmFitSummary")
        .def_readonly("params", &ArmFitSummary::params)
        .def_readonly("log_marginal", &ArmFitSummary::log_marginal)
        .def_readonly("training_size", &ArmFitSummary::training_size);

    py::class_<StageRecord>(m, "StageRecord")
        .def_readonly("kind", &StageRecord::kind)
        .def_readonly("target", &StageRecord::target)
        .def_readonly("consumed", &StageRecord::consumed)
        .def_readonly("dataset_size", &StageRecord::dataset_size)
        .def_readonly("curves", &StageRecord::curves)
        .def_readonly("fit_control", &StageRecord::fit_control)
        .def_readonly("fit_treated", &StageRecord::fit_treated)
        .def_readonly("eise_overall", &StageRecord::eise_overall)
        .def_readonly("eise_spillover", &StageRecord::eise_spillover)
        .def_readonly("partial", &StageRecord::partial);

    py::class_<RunTrace>(m, "RunTrace")
        .def_readonly("method", &RunTrace::method)
        .def_readonly("stages", &RunTrace::stages)
        .def_readonly("remaining_network_ids", &RunTrace::remaining_network_ids)
        .def_readonly("visited_levels", &RunTrace::visited_levels)
        .def_readonly("truncated", &RunTrace::truncated)
        .def("networks_consumed", &RunTrace::networks_consumed);

    m.def(
        "run_aci",
        [](const std::vector<Network>& networks, const py::object& oracle,
           const RunConfig& config, std::optional<GroundTruth> truth) {
            return run_aci(networks, as_oracle(oracle), config, truth ? &*truth : nullptr);
        },
        py::arg("networks"), py::arg("oracle"), py::arg("config"),
        py::arg("truth") = std::nullopt);
    m.def(
        "run_rta",
        [](const std::vector<Network>& networks, const py::object& oracle,
           const RunConfig& config, int level_count, int network_budget,
           std::optional<GroundTruth> truth) {
            return run_rta(networks, as_oracle(oracle), config, level_count, network_budget,
                           truth ? &*truth : nullptr);
        },
        py::arg("networks"), py::arg("oracle"), py::arg("config"), py::arg("level_count"),
        py::arg("network_budget"), py::arg("truth") = std::nullopt);
    m.def("distribute_evenly", &distribute_evenly, py::arg("total"), py::arg("parts"));
}
