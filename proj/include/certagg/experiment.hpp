#pragma once

#include <string>
#include <vector>

#include "certagg/config.hpp"
#include "certagg/core.hpp"
#include "certagg/estimators.hpp"
#include "certagg/metrics.hpp"
#include "certagg/parallel.hpp"

namespace certagg::harness {

struct MetricsReport {
    double rmse_vw, rmse_ap, rmse_ga;
    double mape_vw, mape_ap, mape_ga;
    std::size_t mape_excluded;
    double delta_ap, delta_ga;
    int chosen_iteration_ap, chosen_iteration_ga;
    std::vector<double> q_per_radius;
    std::string ground_truth_mode;  // "oracle-exact" or "held-out-empirical"
};

/// Target class distribution per config: the volume-weighted union of the
/// client distributions, an explicit vector, or a rejection-sampled Dirichlet
/// vector at a requested l2 gap from the union.
LabelDistribution build_target(const ExperimentConfig& config,
                               const std::vector<ClientRecord>& clients, std::uint64_t seed);

/// Everything a finished run produced, for callers that post-process in
/// memory. run_experiment also writes the CSV/JSON artifacts to out_dir.
struct ExperimentOutput {
    MetricsReport metrics;
    LabelDistribution target;
    CertifiedCurve truth;
    CertifiedCurve vw;
    est::EstimateReport ap;
    est::EstimateReport ga;
    std::vector<synth::ClassCounts> partition;
    std::vector<ClientRecord> clients;
};

/// Full pipeline: partition -> realize or certify clients -> target ->
/// ground truth -> three estimators -> metrics. Deterministic from the
/// master seed for any worker count. Stage failures carry a stage tag.
ExperimentOutput run_experiment(const ExperimentConfig& config,
                                par::Exec exec = par::Exec::parallel,
                                bool write_artifacts = true);

/// Estimator-only pipeline used by the `estimate` subcommand: no ground
/// truth, no metrics; writes estimate.json and estimates.csv.
void run_estimate(const ExperimentConfig& config, par::Exec exec = par::Exec::parallel);

}  // namespace certagg::harness
