#include "aci/effects.hpp"

#include <cmath>
#include <limits>

namespace aci {

std::string effect_label(EffectKind kind) {
    switch (kind) {
        case EffectKind::Overall: return "tau1";
        case EffectKind::Spillover: return "tau0";
        case EffectKind::Direct: return "tau10";
    }
    return "unknown";
}

VectorXd uniform_grid(int points) {
    if (points < 2) throw std::invalid_argument("grid needs at least two points");
    return VectorXd::LinSpaced(points, 0.0, 1.0);
}

std::pair<double, double> mean_potential_outcome(const Posterior& post) {
    const double n = static_cast<double>(post.mean.size());
    if (n == 0) throw std::invalid_argument("empty posterior");
    const double mean = post.mean.mean();
    const double variance = post.covariance.sum() / (n * n);
    return {mean, variance};
}

EffectCurves effect_curves(const ArmModel& control, const ArmModel& treated,
                           const MatrixXd& population_features, const VectorXd& grid) {
    if (grid.size() == 0) throw std::invalid_argument("effect_curves: empty grid");
    if (control.arm() != 0 || treated.arm() != 1)
        throw std::invalid_argument("effect_curves expects (control=arm 0, treated=arm 1)");

    PopulationPredictor pred0(control, population_features);
    PopulationPredictor pred1(treated, population_features);

    const auto [baseline, baseline_var] = pred0.average_outcome(0.0);
    (void)baseline_var;  // the baseline enters the effect variances as a constant

    const int m = static_cast<int>(grid.size());
    EffectCurves out;
    out.overall = EffectCurve{EffectKind::Overall, grid, VectorXd(m), VectorXd(m), baseline};
    out.spillover = EffectCurve{EffectKind::Spillover, grid, VectorXd(m), VectorXd(m), baseline};
    out.direct = EffectCurve{EffectKind::Direct, grid, VectorXd(m), VectorXd(m), baseline};

    for (int k = 0; k < m; ++k) {
        const double g = grid(k);
        const auto [m1, v1] = pred1.average_outcome(g);
        const auto [m0, v0] = pred0.average_outcome(g);
        out.overall.mean(k) = m1 - baseline;
        out.overall.variance(k) = v1;
        out.spillover.mean(k) = m0 - baseline;
        out.spillover.variance(k) = v0;
        out.direct.mean(k) = out.overall.mean(k) - out.spillover.mean(k);
        out.direct.variance(k) = v1 + v0;
    }
    return out;
}

Target select_target(const EffectCurve& overall, const EffectCurve& spillover,
                     const std::vector<Target>& visited, double min_separation) {
    if (overall.grid.size() != spillover.grid.size() || overall.grid != spillover.grid)
        throw std::invalid_argument("select_target: curves must share a grid");

    auto excluded = [&](int arm, double g) {
        for (const Target& v : visited) {
            if (v.arm == arm && std::abs(v.exposure - g) < min_separation) return true;
        }
        return false;
    };

    bool found = false;
    Target best;
    double best_variance = -std::numeric_limits<double>::infinity();
    for (int arm = 0; arm <= 1; ++arm) {
        const EffectCurve& curve = arm == 0 ? spillover : overall;
        for (int k = 0; k < curve.points(); ++k) {
            const double g = curve.grid(k);
            if (excluded(arm, g)) continue;
            if (curve.variance(k) > best_variance) {
                best_variance = curve.variance(k);
                best = Target{arm, g};
                found = true;
            }
        }
    }
    if (!found) throw std::runtime_error("select_target: every grid point is excluded");
    return best;
}

}  // namespace aci
