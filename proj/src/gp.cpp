#include "aci/gp.hpp"

#include "aci/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <sstream>

namespace aci {

namespace {

constexpr double kLogLower = -18.420680743952367;  // log(1e-8)
constexpr double kLogUpper = 18.420680743952367;   // log(1e8)
constexpr double kTwoPi = 6.283185307179586;

struct CholFactor {
    Eigen::LLT<MatrixXd> llt;
    double jitter = 0.0;
    bool ok = false;
};

// Cholesky with jitter ladder 1e-10 -> 1e-4 (x10 per rung).
CholFactor cholesky_with_jitter(const MatrixXd& m) {
    CholFactor out;
    out.llt.compute(m);
    if (out.llt.info() == Eigen::Success) {
        out.ok = true;
        return out;
    }
    for (double jitter = 1e-10; jitter <= 1e-4 * (1.0 + 1e-12); jitter *= 10.0) {
        MatrixXd jittered = m;
        jittered.diagonal().array() += jitter;
        out.llt.compute(jittered);
        if (out.llt.info() == Eigen::Success) {
            out.ok = true;
            out.jitter = jitter;
            return out;
        }
    }
    return out;
}

// Fixed-training-set workspace: per-dimension squared differences are
// independent of the hyperparameters, so repeated likelihood evaluations
// during optimization only pay for exponentials and the factorization.
struct LmlWorkspace {
    int n = 0;
    int dim = 0;
    std::vector<MatrixXd> feature_sqdiff;  // one n x n matrix per feature dimension
    MatrixXd exposure_sqdiff;
    VectorXd y;

    explicit LmlWorkspace(const TrainingSet& train) {
        n = train.size();
        dim = train.feature_dim();
        y = train.outcomes;
        feature_sqdiff.reserve(dim);
        for (int k = 0; k < dim; ++k) {
            VectorXd col = train.features.col(k);
            MatrixXd diff = col.replicate(1, n) - col.transpose().replicate(n, 1);
            feature_sqdiff.push_back(diff.cwiseProduct(diff));
        }
        MatrixXd gd = train.exposures.replicate(1, n) -
                      train.exposures.transpose().replicate(n, 1);
        exposure_sqdiff = gd.cwiseProduct(gd);
    }

    // Covariate and exposure kernel factors (without signal variances).
    void kernel_parts(const KernelParams& p, MatrixXd& ex, MatrixXd& eg) const {
        MatrixXd acc = MatrixXd::Zero(n, n);
        for (int k = 0; k < dim; ++k) acc.noalias() += p.covariate_precision(k) * feature_sqdiff[k];
        ex = (-0.5 * acc.array()).exp();
        const double inv2l2 = 1.0 / (2.0 * p.exposure_length * p.exposure_length);
        eg = (-exposure_sqdiff.array() * inv2l2).exp();
    }

    MatrixXd noisy_kernel(const KernelParams& p, const MatrixXd& ex, const MatrixXd& eg) const {
        MatrixXd k = p.covariate_variance * ex + p.exposure_variance * eg;
        k.diagonal().array() += p.noise_variance;
        return k;
    }

    std::optional<double> value(const KernelParams& p) const {
        MatrixXd ex, eg;
        kernel_parts(p, ex, eg);
        CholFactor f = cholesky_with_jitter(noisy_kernel(p, ex, eg));
        if (!f.ok) return std::nullopt;
        VectorXd alpha = f.llt.solve(y);
        double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
        return -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * n * std::log(kTwoPi);
    }

    // Value plus gradient over log-parameters. Gradient entries follow the
    // to_log() ordering.
    std::optional<std::pair<double, VectorXd>> value_and_gradient(const KernelParams& p) const {
        MatrixXd ex, eg;
        kernel_parts(p, ex, eg);
        CholFactor f = cholesky_with_jitter(noisy_kernel(p, ex, eg));
        if (!f.ok) return std::nullopt;
        VectorXd alpha = f.llt.solve(y);
        double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
        double value = -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * n * std::log(kTwoPi);

        MatrixXd kinv = f.llt.solve(MatrixXd::Identity(n, n));
        MatrixXd inner = alpha * alpha.transpose() - kinv;  // 0.5 tr(inner * dK/dtheta)

        VectorXd grad(p.log_dim());
        grad(0) = 0.5 * p.covariate_variance * inner.cwiseProduct(ex).sum();
        for (int k = 0; k < dim; ++k) {
            MatrixXd dk = ex.cwiseProduct(feature_sqdiff[k]);
            grad(1 + k) = 0.5 * p.covariate_variance *
                          (-0.5 * p.covariate_precision(k)) * inner.cwiseProduct(dk).sum();
        }
        grad(dim + 1) = 0.5 * p.exposure_variance * inner.cwiseProduct(eg).sum();
        const double inv_l2 = 1.0 / (p.exposure_length * p.exposure_length);
        MatrixXd dl = eg.cwiseProduct(exposure_sqdiff) * inv_l2;
        grad(dim + 2) = 0.5 * p.exposure_variance * inner.cwiseProduct(dl).sum();
        grad(dim + 3) = 0.5 * p.noise_variance * inner.trace();
        return std::make_pair(value, grad);
    }
};

VectorXd clamp_log(VectorXd v) {
    return v.cwiseMax(kLogLower).cwiseMin(kLogUpper);
}

// Single gradient-ascent run with multiplicative step adaptation.
std::optional<std::pair<VectorXd, double>> ascend(const LmlWorkspace& ws, VectorXd theta,
                                                  const GpFitConfig& cfg) {
    auto eval = ws.value_and_gradient(KernelParams::from_log(theta));
    if (!eval) return std::nullopt;
    auto [value, grad] = *eval;
    double step = 0.1;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < cfg.gradient_tol) break;
        VectorXd proposal = clamp_log(theta + step * grad);
        auto trial = ws.value(KernelParams::from_log(proposal));
        if (trial && *trial > value) {
            theta = proposal;
            auto refreshed = ws.value_and_gradient(KernelParams::from_log(theta));
            if (!refreshed) break;
            value = refreshed->first;
            grad = refreshed->second;
            step = std::min(step * 1.5, 10.0);
        } else {
            step *= 0.5;
            if (step < 1e-12) break;
        }
    }
    return std::make_pair(theta, value);
}

}  // namespace

TrainingSet TrainingSet::from_observations(std::span<const Observation> rows, int arm) {
    std::vector<const Observation*> picked;
    for (const Observation& obs : rows) {
        if (obs.own_treatment == arm) picked.push_back(&obs);
    }
    TrainingSet out;
    out.arm = arm;
    const int n = static_cast<int>(picked.size());
    const int d = n > 0 ? static_cast<int>(picked.front()->features.size()) : 0;
    out.features.resize(n, d);
    out.exposures.resize(n);
    out.outcomes.resize(n);
    for (int i = 0; i < n; ++i) {
        const Observation& obs = *picked[i];
        if (!obs.outcome) throw std::invalid_argument("training observation lacks an outcome");
        if (obs.features.size() != d)
            throw std::invalid_argument("inconsistent feature dimension across observations");
        out.features.row(i) = obs.features;
        out.exposures(i) = obs.exposure;
        out.outcomes(i) = *obs.outcome;
    }
    return out;
}

double log_marginal_likelihood(const TrainingSet& train, const KernelParams& params) {
    if (train.size() < 1) throw std::invalid_argument("log_marginal_likelihood: empty training set");
    LmlWorkspace ws(train);
    auto v = ws.value(params);
    if (!v) throw DecompositionError("kernel matrix not positive definite after max jitter");
    return *v;
}

VectorXd lml_gradient(const TrainingSet& train, const KernelParams& params) {
    if (train.size() < 1) throw std::invalid_argument("lml_gradient: empty training set");
    LmlWorkspace ws(train);
    auto vg = ws.value_and_gradient(params);
    if (!vg) throw DecompositionError("kernel matrix not positive definite after max jitter");
    return vg->second;
}

FitResult fit_hyperparameters(const TrainingSet& train, const GpFitConfig& config) {
    if (train.size() < 1) throw std::invalid_argument("fit_hyperparameters: empty training set");
    LmlWorkspace ws(train);
    const int d = train.feature_dim();

    std::vector<VectorXd> initials;
    if (config.warm_start) initials.push_back(clamp_log(config.warm_start->to_log()));
    std::mt19937_64 engine = rng::engine(config.seed);
    std::uniform_real_distribution<double> unif(std::log(config.init_low),
                                                std::log(config.init_high));
    for (int r = 0; r < config.restarts; ++r) {
        VectorXd theta(d + 4);
        for (int k = 0; k < theta.size(); ++k) theta(k) = unif(engine);
        initials.push_back(clamp_log(theta));
    }
    if (initials.empty()) initials.push_back(clamp_log(KernelParams::unit(d).to_log()));

    bool any = false;
    VectorXd best_theta;
    double best_value = -std::numeric_limits<double>::infinity();
    int failures = 0;
    for (const VectorXd& start : initials) {
        auto result = ascend(ws, start, config);
        if (!result) {
            ++failures;
            continue;
        }
        any = true;
        if (result->second > best_value) {
            best_value = result->second;
            best_theta = result->first;
        }
    }
    if (!any) {
        std::ostringstream msg;
        msg << "hyperparameter fit failed: all " << failures
            << " starts hit non-positive-definite kernels (n_t=" << train.size() << ")";
        throw DecompositionError(msg.str());
    }
    return FitResult{KernelParams::from_log(best_theta), best_value};
}

Posterior posterior(const TrainingSet& train, const KernelParams& params,
                    const QueryPoints& queries) {
    MatrixXd kq = kernel_matrix(queries.features, queries.exposures, queries.features,
                                queries.exposures, params);
    Posterior out;
    if (train.size() == 0) {
        out.mean = VectorXd::Zero(queries.size());
        out.covariance = std::move(kq);
    } else {
        MatrixXd kt = kernel_matrix(train.features, train.exposures, train.features,
                                    train.exposures, params);
        kt.diagonal().array() += params.noise_variance;
        CholFactor f = cholesky_with_jitter(kt);
        if (!f.ok) throw DecompositionError("posterior: kernel matrix not positive definite");
        MatrixXd kts = kernel_matrix(train.features, train.exposures, queries.features,
                                     queries.exposures, params);
        out.mean = kts.transpose() * f.llt.solve(train.outcomes);
        out.covariance = kq - kts.transpose() * f.llt.solve(kts);
    }
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    for (int i = 0; i < out.covariance.rows(); ++i) {
        if (out.covariance(i, i) < 0.0 && out.covariance(i, i) >= -1e-10)
            out.covariance(i, i) = 0.0;
    }
    return out;
}

ArmModel ArmModel::fit(std::span<const Observation> rows, int arm, const GpFitConfig& config) {
    ArmModel m;
    m.train_ = TrainingSet::from_observations(rows, arm);
    if (m.train_.size() < 1) throw std::invalid_argument("ArmModel::fit requires at least one row");
    m.offset_ = m.train_.outcomes.mean();
    m.train_.outcomes.array() -= m.offset_;
    FitResult fitted = fit_hyperparameters(m.train_, config);
    m.params_ = fitted.params;
    m.log_marginal_ = fitted.log_marginal;
    m.finalize();
    return m;
}

ArmModel ArmModel::with_params(std::span<const Observation> rows, int arm,
                               const KernelParams& params) {
    ArmModel m;
    m.train_ = TrainingSet::from_observations(rows, arm);
    if (m.train_.size() < 1)
        throw std::invalid_argument("ArmModel::with_params requires at least one row");
    m.offset_ = m.train_.outcomes.mean();
    m.train_.outcomes.array() -= m.offset_;
    m.params_ = params;
    m.log_marginal_ = log_marginal_likelihood(m.train_, params);
    m.finalize();
    return m;
}

void ArmModel::finalize() {
    MatrixXd kt = kernel_matrix(train_.features, train_.exposures, train_.features,
                                train_.exposures, params_);
    kt.diagonal().array() += params_.noise_variance;
    CholFactor f = cholesky_with_jitter(kt);
    if (!f.ok) throw DecompositionError("ArmModel: kernel matrix not positive definite");
    chol_lower_ = f.llt.matrixL();
    alpha_ = f.llt.solve(train_.outcomes);
}

Posterior ArmModel::predict(const QueryPoints& queries) const {
    Posterior post = posterior(train_, params_, queries);
    post.mean.array() += offset_;
    return post;
}

PopulationPredictor::PopulationPredictor(const ArmModel& model,
                                         const MatrixXd& population_features)
    : model_(model) {
    const KernelParams& p = model.params_;
    const int n = static_cast<int>(population_features.rows());
    population_size_ = n;
    if (population_features.cols() != p.covariate_precision.size())
        throw std::invalid_argument("population feature dimension mismatch");

    MatrixXd z = population_features * p.covariate_precision.cwiseSqrt().asDiagonal();
    VectorXd zn = z.rowwise().squaredNorm();

    // Blocked accumulation keeps the n x n covariate kernel out of memory for
    // large populations.
    const int block = 512;
    double total = 0.0;
    for (int start = 0; start < n; start += block) {
        const int rows = std::min(block, n - start);
        MatrixXd sq = zn.segment(start, rows).replicate(1, n) +
                      zn.transpose().replicate(rows, 1) -
                      2.0 * (z.middleRows(start, rows) * z.transpose());
        total += (-0.5 * sq.cwiseMax(0.0).array()).exp().sum();
    }
    population_kernel_sum_ = p.covariate_variance * total;

    const int nt = model.train_.size();
    train_population_sum_.resize(nt);
    if (nt > 0) {
        MatrixXd zt = model.train_.features * p.covariate_precision.cwiseSqrt().asDiagonal();
        VectorXd ztn = zt.rowwise().squaredNorm();
        MatrixXd sq = ztn.replicate(1, n) + zn.transpose().replicate(nt, 1) -
                      2.0 * (zt * z.transpose());
        train_population_sum_ =
            p.covariate_variance * (-0.5 * sq.cwiseMax(0.0).array()).exp().rowwise().sum();
    }
}

std::pair<double, double> PopulationPredictor::average_outcome(double exposure) const {
    const KernelParams& p = model_.params_;
    const double n = static_cast<double>(population_size_);
    // All queries share one exposure, so every population pair contributes a
    // full exposure_variance term.
    const double prior_sum = population_kernel_sum_ + n * n * p.exposure_variance;
    if (model_.train_.size() == 0) return {0.0, prior_sum / (n * n)};

    const double inv2l2 = 1.0 / (2.0 * p.exposure_length * p.exposure_length);
    VectorXd s = train_population_sum_ +
                 n * p.exposure_variance *
                     (-(model_.train_.exposures.array() - exposure).square() * inv2l2)
                         .exp()
                         .matrix();
    const double mean = model_.offset_ + s.dot(model_.alpha_) / n;
    VectorXd half = model_.chol_lower_.triangularView<Eigen::Lower>().solve(s);
    double variance = (prior_sum - half.squaredNorm()) / (n * n);
    if (variance < 0.0) variance = 0.0;  // round-off guard
    return {mean, variance};
}

}  // namespace aci
