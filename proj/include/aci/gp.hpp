#pragma once

#include "aci/kernel.hpp"
#include "aci/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace aci {

/// Training rows restricted to a single treatment arm.
struct TrainingSet {
    int arm = 0;
    MatrixXd features;   // n_t x 2p
    VectorXd exposures;  // n_t
    VectorXd outcomes;   // n_t

    int size() const { return static_cast<int>(outcomes.size()); }
    int feature_dim() const { return static_cast<int>(features.cols()); }

    /// Collects the observations with own_treatment == arm (all of which must
    /// carry outcomes).
    static TrainingSet from_observations(std::span<const Observation> rows, int arm);
};

/// Query locations for prediction.
struct QueryPoints {
    MatrixXd features;   // n* x 2p
    VectorXd exposures;  // n*

    int size() const { return static_cast<int>(exposures.size()); }
};

/// Joint Gaussian over function values at query points.
struct Posterior {
    VectorXd mean;
    MatrixXd covariance;
};

/// Settings for marginal-likelihood hyperparameter fitting.
struct GpFitConfig {
    int restarts = 8;                 // random log-uniform initial points
    int max_iterations = 200;         // per gradient-ascent start
    double gradient_tol = 1e-5;       // infinity-norm stopping rule
    double init_low = 1e-2;           // log-uniform initialization range
    double init_high = 1e2;
    std::uint64_t seed = 0;
    std::optional<KernelParams> warm_start;  // extra initial point
};

struct FitResult {
    KernelParams params;
    double log_marginal = 0.0;
};

/// Log marginal likelihood of the training outcomes under the kernel, via
/// Cholesky with a jitter ladder (1e-10 to 1e-4, x10 steps) on failure.
double log_marginal_likelihood(const TrainingSet& train, const KernelParams& params);

/// Gradient of the log marginal likelihood with respect to the log-space
/// parameter vector (same ordering as KernelParams::to_log).
VectorXd lml_gradient(const TrainingSet& train, const KernelParams& params);

/// Multi-restart gradient ascent over log-parameters. The returned likelihood
/// is at least the likelihood of every initial point tried. All parameters are
/// kept inside [1e-8, 1e8].
FitResult fit_hyperparameters(const TrainingSet& train, const GpFitConfig& config);

/// Exact GP posterior at the query points (zero prior mean, no centering).
/// An empty training set yields the prior. The covariance is symmetrized and
/// near-zero negative diagonal entries (>= -1e-10) are clamped to zero.
Posterior posterior(const TrainingSet& train, const KernelParams& params,
                    const QueryPoints& queries);

/// A fitted single-arm outcome model. Training outcomes are centered by their
/// mean before hyperparameter fitting; predictions restore the offset.
class ArmModel {
public:
    /// Fits hyperparameters by marginal likelihood on the arm's rows.
    static ArmModel fit(std::span<const Observation> rows, int arm, const GpFitConfig& config);

    /// Uses the given hyperparameters as-is (no optimization).
    static ArmModel with_params(std::span<const Observation> rows, int arm,
                                const KernelParams& params);

    int arm() const { return train_.arm; }
    int training_size() const { return train_.size(); }
    const KernelParams& params() const { return params_; }
    double log_marginal() const { return log_marginal_; }
    double outcome_offset() const { return offset_; }
    const TrainingSet& centered_training_set() const { return train_; }

    /// Posterior over outcomes at the queries (offset restored in the mean).
    Posterior predict(const QueryPoints& queries) const;

private:
    friend class PopulationPredictor;
    ArmModel() = default;
    void finalize();

    TrainingSet train_;      // outcomes centered
    KernelParams params_;
    double offset_ = 0.0;
    double log_marginal_ = 0.0;
    MatrixXd chol_lower_;    // L with L L^T = K_t + noise I (+ jitter)
    VectorXd alpha_;         // (K_t + noise I)^{-1} y_centered
};

/// Population-average prediction support for one model over a fixed covariate
/// set: mean and variance of the average outcome at any exposure level in
/// O(n_t^2) per query after an O(n_t * n + n^2) setup.
class PopulationPredictor {
public:
    PopulationPredictor(const ArmModel& model, const MatrixXd& population_features);

    /// Mean and variance of (1/n) sum_i f(g, X_i).
    std::pair<double, double> average_outcome(double exposure) const;

private:
    const ArmModel& model_;
    int population_size_;
    double population_kernel_sum_;  // sum_ij of the covariate kernel term over the population
    VectorXd train_population_sum_;  // per training row, covariate-kernel sum against the population
};

}  // namespace aci
