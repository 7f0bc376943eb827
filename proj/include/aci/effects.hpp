#pragma once

#include "aci/gp.hpp"
#include "aci/types.hpp"

#include <string>
#include <vector>

namespace aci {

enum class EffectKind {
    Overall,    // treated at exposure g versus the fully-controlled baseline
    Spillover,  // untreated at exposure g versus the fully-controlled baseline
    Direct      // treated minus untreated at the same exposure
};

std::string effect_label(EffectKind kind);

/// A population-average effect function tabulated on an exposure grid, with
/// pointwise variance and the shared fully-controlled baseline.
struct EffectCurve {
    EffectKind kind = EffectKind::Overall;
    VectorXd grid;
    VectorXd mean;
    VectorXd variance;
    double baseline = 0.0;

    int arm() const { return kind == EffectKind::Spillover ? 0 : 1; }
    int points() const { return static_cast<int>(grid.size()); }
};

struct EffectCurves {
    EffectCurve overall;    // tau_1
    EffectCurve spillover;  // tau_0
    EffectCurve direct;     // tau_1 - tau_0 pointwise
};

/// An experimental condition: own-treatment arm and exposure level.
struct Target {
    int arm = 0;
    double exposure = 0.0;
    bool operator==(const Target& other) const {
        return arm == other.arm && exposure == other.exposure;
    }
};

/// Evenly spaced exposure grid over [0,1].
VectorXd uniform_grid(int points);

/// Population average of a joint posterior: mean of the posterior mean and the
/// full quadratic form (1/n^2) e^T Cov e, off-diagonals included.
std::pair<double, double> mean_potential_outcome(const Posterior& post);

/// Effect curves from the two fitted arm models over a shared population.
/// The fully-controlled baseline is the control model's population-average
/// mean at exposure 0, treated as a known constant in the variances. The
/// direct curve's variance is the sum of the two arm variances.
EffectCurves effect_curves(const ArmModel& control, const ArmModel& treated,
                           const MatrixXd& population_features, const VectorXd& grid);

/// Maximum-variance target selection over the two curves' shared grid.
/// Grid points within `min_separation` of a visited level on the same arm are
/// excluded; ties break toward the smaller arm, then the smaller exposure.
/// Throws std::runtime_error when every point is excluded.
Target select_target(const EffectCurve& overall, const EffectCurve& spillover,
                     const std::vector<Target>& visited, double min_separation);

}  // namespace aci
