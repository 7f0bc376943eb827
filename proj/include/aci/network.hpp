#pragma once

#include "aci/types.hpp"

#include <string>
#include <tuple>
#include <vector>

namespace aci {

/// A weighted, undirected social network with per-individual covariates.
///
/// Invariants established at construction: the weight matrix is symmetric
/// with zero diagonal and non-negative entries, and every individual has at
/// least one neighbor (positive row sum).
class Network {
public:
    Network(std::string id, MatrixXd weights, MatrixXd covariates);

    const std::string& id() const { return id_; }
    int size() const { return static_cast<int>(weights_.rows()); }
    int covariate_dim() const { return static_cast<int>(covariates_.cols()); }

    const MatrixXd& weights() const { return weights_; }
    const MatrixXd& covariates() const { return covariates_; }
    const VectorXd& weight_row_sums() const { return row_sums_; }

    /// Weight-normalized neighbor covariate averages, one row per individual.
    const MatrixXd& neighbor_covariates() const { return neighbor_covariates_; }

    /// Own covariates concatenated with neighbor averages (n x 2p); the
    /// coordinate system every downstream model works in.
    const MatrixXd& integrated_features() const { return integrated_features_; }

private:
    std::string id_;
    MatrixXd weights_;
    MatrixXd covariates_;
    VectorXd row_sums_;
    MatrixXd neighbor_covariates_;
    MatrixXd integrated_features_;
};

enum class IsolatedPolicy { Reject, Drop };

struct Edge {
    int i = 0;
    int j = 0;
    double weight = 1.0;
};

/// Builds a network from an undirected edge list and an n x p covariate table.
/// Both (i,j) and (j,i) are set; self-edges, out-of-range indices and
/// conflicting duplicate weights are errors. Isolated nodes are rejected or
/// dropped (with reindexing) per `policy`.
Network build_network(const std::string& id, const std::vector<Edge>& edges,
                      const MatrixXd& covariates,
                      IsolatedPolicy policy = IsolatedPolicy::Reject);

/// Fraction of individual i's neighborhood that is treated, weighted by
/// relationship strength; lies in [0,1].
double neighbor_exposure(const Network& net, const Assignment& assign, int i);

/// All exposures at once: (W * A) / row_sums.
VectorXd neighbor_exposures(const Network& net, const Assignment& assign);

/// Weight-normalized average of neighbor covariate rows for individual i.
VectorXd aggregate_neighbor_covariates(const Network& net, int i);

/// Batches the per-individual transforms over a whole network. With
/// `outcomes` present the result is a training batch; without, query rows.
std::vector<Observation> integrate(const Network& net, const Assignment& assign,
                                   const std::optional<VectorXd>& outcomes = std::nullopt);

}  // namespace aci
