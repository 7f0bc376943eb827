#pragma once

#include "aci/types.hpp"

namespace aci {

/// Hyperparameters of the combined covariate + exposure kernel
///
///   k((x,g),(x',g')) = covariate_variance * exp(-1/2 (x-x')^T Q (x-x'))
///                    + exposure_variance  * exp(-(g-g')^2 / (2 exposure_length^2))
///
/// with Q = diag(covariate_precision). All parameters are positive; they are
/// carried through optimization in log-space, so positivity is structural.
struct KernelParams {
    double covariate_variance = 1.0;   // sigma_x^2
    VectorXd covariate_precision;      // diag of Q, length 2p
    double exposure_variance = 1.0;    // sigma_g^2
    double exposure_length = 1.0;      // lambda_g
    double noise_variance = 0.1;       // sigma_t^2

    /// Parameter order in the flat log vector: covariate_variance,
    /// covariate_precision[0..2p), exposure_variance, exposure_length,
    /// noise_variance.
    VectorXd to_log() const;
    static KernelParams from_log(const VectorXd& log_values);

    int log_dim() const { return static_cast<int>(covariate_precision.size()) + 4; }

    static KernelParams unit(int feature_dim);
};

/// One kernel evaluation; throws on feature-dimension mismatch.
double kernel_eval(const VectorXd& x1, double g1, const VectorXd& x2, double g2,
                   const KernelParams& params);

/// Cross-kernel matrix between two point sets (rows of `xa`/`xb` paired with
/// `ga`/`gb`). With identical sets the result is symmetric.
MatrixXd kernel_matrix(const MatrixXd& xa, const VectorXd& ga, const MatrixXd& xb,
                       const VectorXd& gb, const KernelParams& params);

}  // namespace aci
