#include "aci/network.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace aci {

namespace {

void check_square_symmetric(const MatrixXd& w) {
    if (w.rows() != w.cols()) throw std::invalid_argument("weight matrix must be square");
    for (int i = 0; i < w.rows(); ++i) {
        if (w(i, i) != 0.0) throw std::invalid_argument("weight matrix must have zero diagonal");
        for (int j = i + 1; j < w.cols(); ++j) {
            if (w(i, j) < 0.0 || w(j, i) < 0.0)
                throw std::invalid_argument("weights must be non-negative");
            if (w(i, j) != w(j, i)) throw std::invalid_argument("weight matrix must be symmetric");
        }
    }
}

}  // namespace

Network::Network(std::string id, MatrixXd weights, MatrixXd covariates)
    : id_(std::move(id)), weights_(std::move(weights)), covariates_(std::move(covariates)) {
    check_square_symmetric(weights_);
    if (covariates_.rows() != weights_.rows())
        throw std::invalid_argument("covariate table rows must match network size");
    row_sums_ = weights_.rowwise().sum();
    for (int i = 0; i < size(); ++i) {
        if (row_sums_(i) <= 0.0) {
            std::ostringstream msg;
            msg << "network '" << id_ << "': node " << i << " has no neighbors";
            throw IsolatedNodeError(msg.str());
        }
    }
    neighbor_covariates_ = row_sums_.cwiseInverse().asDiagonal() * (weights_ * covariates_);
    const int p = covariate_dim();
    integrated_features_.resize(size(), 2 * p);
    integrated_features_ << covariates_, neighbor_covariates_;
}

Network build_network(const std::string& id, const std::vector<Edge>& edges,
                      const MatrixXd& covariates, IsolatedPolicy policy) {
    const int n = static_cast<int>(covariates.rows());
    MatrixXd w = MatrixXd::Zero(n, n);
    std::map<std::pair<int, int>, double> seen;
    for (const Edge& e : edges) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
            std::ostringstream msg;
            msg << "edge (" << e.i << "," << e.j << ") out of range for n=" << n;
            throw std::out_of_range(msg.str());
        }
        if (e.i == e.j) throw std::invalid_argument("self-edges are not allowed");
        if (e.weight <= 0.0) throw std::invalid_argument("edge weights must be positive");
        auto key = std::minmax(e.i, e.j);
        auto [it, inserted] = seen.emplace(key, e.weight);
        if (!inserted && it->second != e.weight) {
            std::ostringstream msg;
            msg << "conflicting duplicate weights for edge (" << key.first << "," << key.second
                << "): " << it->second << " vs " << e.weight;
            throw std::invalid_argument(msg.str());
        }
        w(e.i, e.j) = e.weight;
        w(e.j, e.i) = e.weight;
    }

    VectorXd sums = w.rowwise().sum();
    std::vector<int> keep;
    keep.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (sums(i) > 0.0) {
            keep.push_back(i);
        } else if (policy == IsolatedPolicy::Reject) {
            std::ostringstream msg;
            msg << "node " << i << " is isolated";
            throw IsolatedNodeError(msg.str());
        }
    }
    if (static_cast<int>(keep.size()) == n) return Network(id, std::move(w), covariates);

    // Drop policy: remove isolated rows/columns and reindex.
    const int m = static_cast<int>(keep.size());
    MatrixXd w2(m, m);
    MatrixXd c2(m, covariates.cols());
    for (int a = 0; a < m; ++a) {
        c2.row(a) = covariates.row(keep[a]);
        for (int b = 0; b < m; ++b) w2(a, b) = w(keep[a], keep[b]);
    }
    return Network(id, std::move(w2), std::move(c2));
}

VectorXd neighbor_exposures(const Network& net, const Assignment& assign) {
    if (assign.size() != net.size())
        throw std::invalid_argument("assignment length must match network size");
    VectorXd treated = assign.treatments.cast<double>();
    return ((net.weights() * treated).array() / net.weight_row_sums().array()).matrix();
}

double neighbor_exposure(const Network& net, const Assignment& assign, int i) {
    if (assign.size() != net.size())
        throw std::invalid_argument("assignment length must match network size");
    if (i < 0 || i >= net.size()) throw std::out_of_range("individual index out of range");
    const double denom = net.weight_row_sums()(i);
    if (denom <= 0.0) throw IsolatedNodeError("exposure undefined for isolated node");
    return net.weights().row(i).dot(assign.treatments.cast<double>()) / denom;
}

VectorXd aggregate_neighbor_covariates(const Network& net, int i) {
    if (i < 0 || i >= net.size()) throw std::out_of_range("individual index out of range");
    if (net.weight_row_sums()(i) <= 0.0)
        throw IsolatedNodeError("neighbor aggregate undefined for isolated node");
    return net.neighbor_covariates().row(i);
}

std::vector<Observation> integrate(const Network& net, const Assignment& assign,
                                   const std::optional<VectorXd>& outcomes) {
    if (assign.size() != net.size())
        throw std::invalid_argument("assignment length must match network size");
    if (outcomes && outcomes->size() != net.size())
        throw std::invalid_argument("outcome vector length must match network size");
    VectorXd exposures = neighbor_exposures(net, assign);
    std::vector<Observation> rows;
    rows.reserve(net.size());
    for (int i = 0; i < net.size(); ++i) {
        Observation obs;
        obs.own_treatment = assign.treatments(i);
        obs.exposure = exposures(i);
        obs.features = net.integrated_features().row(i);
        if (outcomes) obs.outcome = (*outcomes)(i);
        rows.push_back(std::move(obs));
    }
    return rows;
}

}  // namespace aci
