#include "aci/kernel.hpp"

#include <cmath>

namespace aci {

VectorXd KernelParams::to_log() const {
    VectorXd v(log_dim());
    v(0) = std::log(covariate_variance);
    for (int k = 0; k < covariate_precision.size(); ++k) v(1 + k) = std::log(covariate_precision(k));
    const int d = static_cast<int>(covariate_precision.size());
    v(d + 1) = std::log(exposure_variance);
    v(d + 2) = std::log(exposure_length);
    v(d + 3) = std::log(noise_variance);
    return v;
}

KernelParams KernelParams::from_log(const VectorXd& log_values) {
    const int d = static_cast<int>(log_values.size()) - 4;
    if (d < 0) throw std::invalid_argument("log parameter vector too short");
    KernelParams p;
    p.covariate_variance = std::exp(log_values(0));
    p.covariate_precision = log_values.segment(1, d).array().exp();
    p.exposure_variance = std::exp(log_values(d + 1));
    p.exposure_length = std::exp(log_values(d + 2));
    p.noise_variance = std::exp(log_values(d + 3));
    return p;
}

KernelParams KernelParams::unit(int feature_dim) {
    KernelParams p;
    p.covariate_variance = 1.0;
    p.covariate_precision = VectorXd::Ones(feature_dim);
    p.exposure_variance = 1.0;
    p.exposure_length = 1.0;
    p.noise_variance = 0.1;
    return p;
}

double kernel_eval(const VectorXd& x1, double g1, const VectorXd& x2, double g2,
                   const KernelParams& params) {
    if (x1.size() != x2.size() || x1.size() != params.covariate_precision.size())
        throw std::invalid_argument("kernel_eval: feature dimension mismatch");
    const double sq = (params.covariate_precision.array() * (x1 - x2).array().square()).sum();
    const double dg = g1 - g2;
    const double lg = params.exposure_length;
    return params.covariate_variance * std::exp(-0.5 * sq) +
           params.exposure_variance * std::exp(-dg * dg / (2.0 * lg * lg));
}

MatrixXd kernel_matrix(const MatrixXd& xa, const VectorXd& ga, const MatrixXd& xb,
                       const VectorXd& gb, const KernelParams& params) {
    if (xa.cols() != xb.cols() || xa.cols() != params.covariate_precision.size())
        throw std::invalid_argument("kernel_matrix: feature dimension mismatch");
    if (xa.rows() != ga.size() || xb.rows() != gb.size())
        throw std::invalid_argument("kernel_matrix: exposure vector length mismatch");

    // Scaled squared distances via the usual norm expansion keeps this at
    // matrix-product cost instead of per-pair loops.
    MatrixXd za = xa * params.covariate_precision.cwiseSqrt().asDiagonal();
    MatrixXd zb = xb * params.covariate_precision.cwiseSqrt().asDiagonal();
    VectorXd na = za.rowwise().squaredNorm();
    VectorXd nb = zb.rowwise().squaredNorm();
    MatrixXd sq = na.replicate(1, zb.rows()) + nb.transpose().replicate(za.rows(), 1) -
                  2.0 * (za * zb.transpose());
    sq = sq.cwiseMax(0.0);  // guard tiny negative round-off

    MatrixXd dg = ga.replicate(1, gb.size()) - gb.transpose().replicate(ga.size(), 1);
    const double inv2l2 = 1.0 / (2.0 * params.exposure_length * params.exposure_length);
    return params.covariate_variance * (-0.5 * sq.array()).exp().matrix() +
           params.exposure_variance * (-(dg.array().square()) * inv2l2).exp().matrix();
}

}  // namespace aci
