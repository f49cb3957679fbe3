#include "certagg/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "certagg/rng.hpp"

namespace certagg::harness {

namespace {

// stage tags for the master-seed streams
enum : std::uint64_t {
    kSeedPartition = 1,
    kSeedOracle = 2,
    kSeedRealize = 3,
    kSeedTarget = 4,
    kSeedEstimateAp = 5,
    kSeedEstimateGa = 6,
    kSeedHoldoutPoints = 7,
    kSeedHoldoutCertify = 8,
    kSeedClientPoints = 9,
    kSeedClientCertify = 10,
};

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const std::logic_error& e) {
        throw std::invalid_argument(std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

LabelDistribution union_distribution(const std::vector<ClientRecord>& clients) {
    if (clients.empty()) throw std::invalid_argument("union target: no clients");
    std::int64_t total = 0;
    for (const auto& c : clients) total += c.n;
    std::vector<double> weights(clients.size());
    std::vector<LabelDistribution> dists;
    dists.reserve(clients.size());
    for (std::size_t i = 0; i < clients.size(); ++i) {
        weights[i] = static_cast<double>(clients[i].n) / static_cast<double>(total);
        dists.push_back(clients[i].dist);
    }
    return mix_distributions(SimplexWeights(std::move(weights)), dists);
}

std::string format6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

nlohmann::json members_json(const std::vector<std::vector<ClientId>>& members) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& group : members) {
        nlohmann::json ids = nlohmann::json::array();
        for (auto id : group) ids.push_back(id);
        arr.push_back(std::move(ids));
    }
    return arr;
}

void write_curves_csv(const std::filesystem::path& path, const RadiusGrid& grid,
                      const CertifiedCurve& truth, const CertifiedCurve& vw,
                      const CertifiedCurve& ap, const CertifiedCurve& ga) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "radius,ground_truth,vw,ap,ga\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out << format6(grid[k]) << ',' << format6(truth[k]) << ',' << format6(vw[k]) << ','
            << format6(ap[k]) << ',' << format6(ga[k]) << '\n';
    }
}

void write_grouping_csv_from_members(const std::filesystem::path& path,
                                     const std::vector<std::vector<ClientId>>& members,
                                     const std::vector<ClientRecord>& clients) {
    // ids are partition row indices, not positions in `clients`
    std::map<ClientId, std::int64_t> volume;
    for (const auto& c : clients) volume[c.id] = c.n;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "group_id,member_client_id,n,n_V\n";
    for (std::size_t g = 0; g < members.size(); ++g) {
        std::int64_t n_v = 0;
        for (auto id : members[g]) n_v += volume.at(id);
        for (auto id : members[g]) {
            out << g << ',' << id << ',' << volume.at(id) << ',' << n_v << '\n';
        }
    }
}

struct GroundTruth {
    CertifiedCurve curve;
    std::vector<double> q_per_radius;
    std::string mode;
    // smoothing mode keeps the held-out certification rows for the artifact
    std::vector<smoothing::CertifyOutcome> holdout_outcomes;
    std::vector<int> holdout_labels;
};

std::vector<double> q_from_class_curves(const std::vector<CertifiedCurve>& class_curves) {
    const std::size_t n_radii = class_curves.front().size();
    std::vector<double> q(n_radii);
    std::vector<double> vals(class_curves.size());
    for (std::size_t k = 0; k < n_radii; ++k) {
        for (std::size_t j = 0; j < class_curves.size(); ++j) vals[j] = class_curves[j][k];
        q[k] = est::bound_q(vals);
    }
    return q;
}

}  // namespace

LabelDistribution build_target(const ExperimentConfig& config,
                               const std::vector<ClientRecord>& clients, std::uint64_t seed) {
    const LabelDistribution pooled = union_distribution(clients);
    switch (config.target.mode) {
        case TargetSpec::Mode::Union:
            return pooled;
        case TargetSpec::Mode::Explicit:
            return LabelDistribution::normalized(config.target.explicit_probs);
        case TargetSpec::Mode::Gap:
            break;
    }
    const auto& t = config.target;
    if (t.gap == 0.0) return pooled;
    rng::Rng gen(seed);
    const std::size_t m = pooled.num_classes();
    double closest = std::numeric_limits<double>::infinity();
    for (std::int64_t attempt = 0; attempt < t.max_attempts; ++attempt) {
        auto probs = gen.dirichlet(t.concentration, m);
        bool positive = true;
        for (double p : probs) positive = positive && p > 0.0;
        if (!positive) continue;
        LabelDistribution cand(std::move(probs));
        const double achieved = l2_distance(cand, pooled);
        if (std::abs(achieved - t.gap) <= t.gap_tolerance) return cand;
        closest = std::min(closest, std::abs(achieved - t.gap));
    }
    throw std::runtime_error("build_target: no Dirichlet(" + std::to_string(t.concentration) +
                             ") draw reached gap " + std::to_string(t.gap) + " +/- " +
                             std::to_string(t.gap_tolerance) + " in " +
                             std::to_string(t.max_attempts) +
                             " attempts; closest miss " + std::to_string(closest));
}

ExperimentOutput run_experiment(const ExperimentConfig& config, par::Exec exec,
                                bool write_artifacts) {
    config.validate();
    const RadiusGrid grid = RadiusGrid::uniform(config.grid_steps, config.grid_max);
    const std::size_t m = config.partition.class_totals.size();

    auto part_spec = config.partition;
    part_spec.seed = rng::derive(config.seed, kSeedPartition);
    const auto partition =
        stage("partition", [&] { return synth::make_partition(part_spec); });

    // client realization: analytic oracle by default, sampling certifier when
    // the smoothing path is enabled
    std::unique_ptr<synth::OracleModel> oracle;
    std::vector<std::vector<double>> centroids;
    std::vector<ClientRecord> clients;
    stage("clients", [&] {
        if (!config.smoothing.enabled) {
            oracle = std::make_unique<synth::OracleModel>(synth::OracleModel::sample(
                grid, m, config.oracle.accuracy_min, config.oracle.accuracy_max,
                config.oracle.scale_min, config.oracle.scale_max,
                rng::derive(config.seed, kSeedOracle)));
            auto realized = synth::realize_population(*oracle, partition,
                                                      rng::derive(config.seed, kSeedRealize), exec);
            for (auto& r : realized) clients.push_back(std::move(r.record));
            return 0;
        }
        centroids = smoothing::make_circle_centroids(static_cast<int>(m), config.smoothing.dim,
                                                     config.smoothing.spread);
        smoothing::NearestCentroidClassifier classifier(centroids);
        for (std::size_t i = 0; i < partition.size(); ++i) {
            std::int64_t total = 0;
            for (auto c : partition[i]) total += c;
            if (total == 0) continue;  // empty clients have nothing to certify
            const auto points = smoothing::sample_blob_points(
                centroids, partition[i], config.smoothing.blob_noise,
                rng::derive(rng::derive(config.seed, kSeedClientPoints), i));
            auto [curve, outcomes] = smoothing::certify_dataset(
                classifier, points, config.smoothing.params, grid,
                rng::derive(rng::derive(config.seed, kSeedClientCertify), i), exec);
            std::vector<double> mass(m);
            for (std::size_t j = 0; j < m; ++j) {
                mass[j] = static_cast<double>(partition[i][j]);
            }
            clients.emplace_back(static_cast<ClientId>(i), total,
                                 LabelDistribution::normalized(std::move(mass)),
                                 std::move(curve));
        }
        return 0;
    });

    const LabelDistribution target = stage("target", [&] {
        return build_target(config, clients, rng::derive(config.seed, kSeedTarget));
    });

    GroundTruth truth = stage("ground-truth", [&]() -> GroundTruth {
        if (!config.smoothing.enabled) {
            std::vector<CertifiedCurve> class_curves;
            for (std::size_t j = 0; j < m; ++j) class_curves.push_back(oracle->class_curve(j));
            return GroundTruth{synth::ground_truth_curve(*oracle, target),
                               q_from_class_curves(class_curves), "oracle-exact", {}, {}};
        }
        const auto counts = synth::proportional_counts(target.probs(), config.smoothing.holdout);
        const auto points =
            smoothing::sample_blob_points(centroids, counts, config.smoothing.blob_noise,
                                          rng::derive(config.seed, kSeedHoldoutPoints));
        smoothing::NearestCentroidClassifier classifier(centroids);
        auto [curve, outcomes] =
            smoothing::certify_dataset(classifier, points, config.smoothing.params, grid,
                                       rng::derive(config.seed, kSeedHoldoutCertify), exec);
        std::vector<int> labels(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) labels[i] = points[i].label;
        // empirical per-class curves for the bound constant
        std::vector<CertifiedCurve> class_curves;
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<smoothing::CertifyOutcome> sub;
            std::vector<int> sub_labels;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] == static_cast<int>(j)) {
                    sub.push_back(outcomes[i]);
                    sub_labels.push_back(labels[i]);
                }
            }
            if (sub.empty()) {
                class_curves.emplace_back(grid, std::vector<double>(grid.size(), 0.0));
            } else {
                class_curves.push_back(smoothing::curve_from_outcomes(grid, sub, sub_labels));
            }
        }
        return GroundTruth{std::move(curve), q_from_class_curves(class_curves),
                           "held-out-empirical", std::move(outcomes), std::move(labels)};
    });

    auto ap_cfg = config.estimator;
    ap_cfg.tau = config.grouping.tau;
    ap_cfg.seed = rng::derive(config.seed, kSeedEstimateAp);
    auto ga_cfg = ap_cfg;
    ga_cfg.seed = rng::derive(config.seed, kSeedEstimateGa);

    CertifiedCurve vw = stage("estimate-vw", [&] { return est::estimate_vw(clients); });
    est::EstimateReport ap =
        stage("estimate-ap", [&] { return est::estimate_ap(clients, target, ap_cfg, exec); });
    est::EstimateReport ga = stage("estimate-ga", [&] {
        return est::estimate_ga(clients, target, ga_cfg, config.grouping.merge_trailing, exec);
    });

    MetricsReport report = stage("metrics", [&] {
        MetricsReport r;
        r.rmse_vw = metrics::rmse(vw, truth.curve);
        r.rmse_ap = metrics::rmse(ap.curve, truth.curve);
        r.rmse_ga = metrics::rmse(ga.curve, truth.curve);
        const auto mv = metrics::mape(vw, truth.curve);
        const auto ma = metrics::mape(ap.curve, truth.curve);
        const auto mg = metrics::mape(ga.curve, truth.curve);
        r.mape_vw = mv.value;
        r.mape_ap = ma.value;
        r.mape_ga = mg.value;
        r.mape_excluded = mv.excluded;
        r.delta_ap = ap.delta;
        r.delta_ga = ga.delta;
        r.chosen_iteration_ap = ap.chosen_iteration;
        r.chosen_iteration_ga = ga.chosen_iteration;
        r.q_per_radius = truth.q_per_radius;
        r.ground_truth_mode = truth.mode;
        return r;
    });

    if (write_artifacts) {
        stage("artifacts", [&] {
            std::filesystem::create_directories(config.out_dir);
            synth::write_partition_csv(config.out_dir / "partition.csv", partition);
            write_curves_csv(config.out_dir / "curves.csv", grid, truth.curve, vw, ap.curve,
                             ga.curve);
            write_grouping_csv_from_members(config.out_dir / "grouping.csv", ga.selected_members,
                                            clients);
            if (config.smoothing.enabled) {
                smoothing::write_certify_csv(config.out_dir / "certified_points.csv",
                                             truth.holdout_outcomes, truth.holdout_labels);
            }
            nlohmann::json j;
            j["rmse"] = {{"vw", report.rmse_vw}, {"ap", report.rmse_ap}, {"ga", report.rmse_ga}};
            j["mape"] = {{"vw", report.mape_vw}, {"ap", report.mape_ap}, {"ga", report.mape_ga}};
            j["mape_excluded"] = report.mape_excluded;
            j["delta"] = {{"ap", report.delta_ap}, {"ga", report.delta_ga}};
            j["chosen_iteration"] = {{"ap", report.chosen_iteration_ap},
                                     {"ga", report.chosen_iteration_ga}};
            j["q_per_radius"] = report.q_per_radius;
            j["ground_truth"] = report.ground_truth_mode;
            j["selected"] = {{"ap", members_json(ap.selected_members)},
                             {"ga", members_json(ga.selected_members)}};
            std::ofstream out(config.out_dir / "metrics.json");
            if (!out) throw std::runtime_error("cannot open metrics.json");
            out << j.dump(2) << '\n';
            return 0;
        });
    }

    return ExperimentOutput{std::move(report), target,          std::move(truth.curve),
                            std::move(vw),     std::move(ap),   std::move(ga),
                            partition,         std::move(clients)};
}

void run_estimate(const ExperimentConfig& config, par::Exec exec) {
    config.validate();
    const RadiusGrid grid = RadiusGrid::uniform(config.grid_steps, config.grid_max);
    const std::size_t m = config.partition.class_totals.size();

    auto part_spec = config.partition;
    part_spec.seed = rng::derive(config.seed, kSeedPartition);
    const auto partition = stage("partition", [&] { return synth::make_partition(part_spec); });

    const auto oracle = stage("clients", [&] {
        return synth::OracleModel::sample(grid, m, config.oracle.accuracy_min,
                                          config.oracle.accuracy_max, config.oracle.scale_min,
                                          config.oracle.scale_max,
                                          rng::derive(config.seed, kSeedOracle));
    });
    auto realized = stage("clients", [&] {
        return synth::realize_population(oracle, partition,
                                         rng::derive(config.seed, kSeedRealize), exec);
    });
    std::vector<ClientRecord> clients;
    for (auto& r : realized) clients.push_back(std::move(r.record));

    const LabelDistribution target = stage("target", [&] {
        return build_target(config, clients, rng::derive(config.seed, kSeedTarget));
    });

    auto ap_cfg = config.estimator;
    ap_cfg.tau = config.grouping.tau;
    ap_cfg.seed = rng::derive(config.seed, kSeedEstimateAp);
    auto ga_cfg = ap_cfg;
    ga_cfg.seed = rng::derive(config.seed, kSeedEstimateGa);

    CertifiedCurve vw = stage("estimate-vw", [&] { return est::estimate_vw(clients); });
    est::EstimateReport ap =
        stage("estimate-ap", [&] { return est::estimate_ap(clients, target, ap_cfg, exec); });
    est::EstimateReport ga = stage("estimate-ga", [&] {
        return est::estimate_ga(clients, target, ga_cfg, config.grouping.merge_trailing, exec);
    });

    stage("artifacts", [&] {
        std::filesystem::create_directories(config.out_dir);
        std::ofstream csv(config.out_dir / "estimates.csv");
        if (!csv) throw std::runtime_error("cannot open estimates.csv");
        csv << "radius,vw,ap,ga\n";
        for (std::size_t k = 0; k < grid.size(); ++k) {
            csv << format6(grid[k]) << ',' << format6(vw[k]) << ',' << format6(ap.curve[k]) << ','
                << format6(ga.curve[k]) << '\n';
        }
        nlohmann::json j;
        j["delta"] = {{"ap", ap.delta}, {"ga", ga.delta}};
        j["chosen_iteration"] = {{"ap", ap.chosen_iteration}, {"ga", ga.chosen_iteration}};
        j["weights"] = {{"ap", ap.weights.values()}, {"ga", ga.weights.values()}};
        j["selected"] = {{"ap", members_json(ap.selected_members)},
                         {"ga", members_json(ga.selected_members)}};
        j["target"] = target.probs();
        std::ofstream out(config.out_dir / "estimate.json");
        if (!out) throw std::runtime_error("cannot open estimate.json");
        out << j.dump(2) << '\n';
        return 0;
    });
}

}  // namespace certagg::harness
