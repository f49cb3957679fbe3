#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "certagg/estimators.hpp"
#include "certagg/grouping.hpp"
#include "certagg/smoothing.hpp"
#include "certagg/synthdata.hpp"

namespace certagg::harness {

struct OracleSpec {
    double accuracy_min = 0.5;
    double accuracy_max = 0.95;
    double scale_min = 0.2;
    double scale_max = 0.8;
};

struct TargetSpec {
    enum class Mode { Union, Explicit, Gap };
    Mode mode = Mode::Union;
    std::vector<double> explicit_probs;  // Explicit mode only
    double gap = 0.0;                    // requested ||PS - PD||
    double gap_tolerance = 0.01;
    double concentration = 1.0;          // Dirichlet concentration for gap sampling
    std::int64_t max_attempts = 1000000;
};

struct SmoothingRun {
    bool enabled = false;  // when set, client curves come from the sampling
                           // certifier instead of the analytic oracle
    smoothing::SmoothingParams params;
    int dim = 2;
    double spread = 2.0;      // centroid circle radius
    double blob_noise = 0.3;  // within-class point scatter
    std::int64_t holdout = 2000;  // held-out set size for empirical ground truth
};

/// Flat key=value experiment configuration with dotted section names.
/// Unknown keys are hard errors.
struct ExperimentConfig {
    synth::PartitionSpec partition;  // seed is filled from the master seed
    OracleSpec oracle;
    SmoothingRun smoothing;
    est::EstimatorConfig estimator;
    grouping::GroupingConfig grouping;
    std::size_t grid_steps = 20;
    double grid_max = 1.0;
    TargetSpec target;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;

    void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace certagg::harness
