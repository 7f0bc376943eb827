#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace aci {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Thrown when a node has no neighbors and a neighbor-normalized quantity is requested.
struct IsolatedNodeError : std::runtime_error {
    explicit IsolatedNodeError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a covariance matrix cannot be factorized even after the jitter ladder.
struct DecompositionError : std::runtime_error {
    explicit DecompositionError(const std::string& what) : std::runtime_error(what) {}
};

/// Binary treatment vector over one network's individuals.
struct Assignment {
    VectorXi treatments;

    Assignment() = default;
    explicit Assignment(VectorXi t) : treatments(std::move(t)) {}

    static Assignment zeros(int n) { return Assignment(VectorXi::Zero(n)); }
    static Assignment ones(int n) { return Assignment(VectorXi::Ones(n)); }

    int size() const { return static_cast<int>(treatments.size()); }
    bool operator==(const Assignment& other) const { return treatments == other.treatments; }
};

/// One individual's integrated record: own treatment, neighbor exposure,
/// own covariates concatenated with neighbor-aggregated covariates, and
/// (when experimented) the observed outcome.
struct Observation {
    int own_treatment = 0;   // in {0,1}
    double exposure = 0.0;   // in [0,1]
    VectorXd features;       // length 2p
    std::optional<double> outcome;
};

}  // namespace aci
