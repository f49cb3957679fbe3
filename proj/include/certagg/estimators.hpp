#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "certagg/core.hpp"
#include "certagg/grouping.hpp"
#include "certagg/parallel.hpp"
#include "certagg/synthdata.hpp"

namespace certagg::est {

struct EstimatorConfig {
    int T = 1000;             // sampling iterations
    int E = 10;               // clients drawn per iteration
    std::int64_t tau = 50;    // grouping threshold (grouped estimator only)
    std::uint64_t seed = 0;

    void validate() const;
};

/// Result of the sampled-matching estimators. selected_members lists, per
/// record used in the final combination, the ids of the clients behind it
/// (singletons for the ungrouped estimator).
struct EstimateReport {
    CertifiedCurve curve;
    SimplexWeights weights;
    double delta;           // best matching residual across iterations
    int chosen_iteration;   // 1-based, smallest index on ties
    std::vector<std::vector<ClientId>> selected_members;
};

/// Volume-weighted baseline: weights n_i / sum_j n_j over all clients.
CertifiedCurve estimate_vw(const std::vector<ClientRecord>& clients);

/// T iterations: draw E distinct clients (sub-seed derive(seed, t)), solve
/// the simplex-constrained match of the target distribution, keep the
/// iteration with the smallest residual.
EstimateReport estimate_ap(const std::vector<ClientRecord>& clients,
                           const LabelDistribution& target, const EstimatorConfig& config,
                           par::Exec exec = par::Exec::parallel);

/// Same loop, but each iteration's sampled clients are first merged by the
/// grouping algorithm and the solve runs over the virtual records.
EstimateReport estimate_ga(const std::vector<ClientRecord>& clients,
                           const LabelDistribution& target, const EstimatorConfig& config,
                           bool merge_trailing = false, par::Exec exec = par::Exec::parallel);

/// Error-bound constant at one radius: Q = sqrt(sum_j (L_j - mean(L))^2).
double bound_q(std::span<const double> per_class_values);

struct BoundCheck {
    double radius;
    double gap;       // |exact target curve - weighted combination|
    double delta;     // matching residual of the weights
    double q;         // bound constant at this radius
};

/// Verifies gap <= delta * Q + 1e-9 at every grid radius using the oracle's
/// exact expectations; throws if any radius violates the bound.
std::vector<BoundCheck> check_theorem1(const synth::OracleModel& oracle,
                                       const LabelDistribution& target,
                                       const std::vector<LabelDistribution>& dists,
                                       const SimplexWeights& weights);

}  // namespace certagg::est
