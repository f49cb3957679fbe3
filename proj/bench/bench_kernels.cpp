// Times the serial reference paths against the OpenMP kernels and checks
// that both produce the same results while doing so.

#include <chrono>
#include <cstdio>
#include <vector>

#include "certagg/estimators.hpp"
#include "certagg/parallel.hpp"
#include "certagg/rng.hpp"
#include "certagg/smoothing.hpp"
#include "certagg/synthdata.hpp"

using namespace certagg;

namespace {

template <class F>
double time_secs(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(const char* name, double serial, double parallel, bool same) {
    std::printf("%-24s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   results %s\n", name,
                serial, parallel, serial / parallel, same ? "identical" : "DIFFER");
}

}  // namespace

int main() {
    std::printf("workers: %d\n", par::max_workers());
    const auto grid = RadiusGrid::uniform(20);

    // client realization
    {
        const auto oracle = synth::OracleModel::sample(grid, 10, 0.4, 0.95, 0.2, 0.8, 1);
        synth::PartitionSpec spec;
        spec.beta = 0.2;
        spec.num_clients = 64;
        spec.class_totals = std::vector<std::int64_t>(10, 40000);
        spec.seed = 2;
        const auto partition = synth::make_partition(spec);
        std::vector<synth::RealizedClient> a, b;
        const double ts =
            time_secs([&] { a = synth::realize_population(oracle, partition, 3, par::Exec::serial); });
        const double tp = time_secs(
            [&] { b = synth::realize_population(oracle, partition, 3, par::Exec::parallel); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) {
            same = a[i].record.curve == b[i].record.curve;
        }
        report("realize_population", ts, tp, same);
    }

    // dataset certification
    {
        const auto centroids = smoothing::make_circle_centroids(10, 2, 2.0);
        const smoothing::NearestCentroidClassifier clf(centroids);
        const auto points = smoothing::sample_blob_points(
            centroids, std::vector<std::int64_t>(10, 150), 0.3, 5);
        smoothing::SmoothingParams params;
        params.n0 = 100;
        params.n = 1000;
        CertifiedCurve a(grid, std::vector<double>(grid.size(), 0.0));
        CertifiedCurve b = a;
        const double ts = time_secs([&] {
            a = smoothing::certify_dataset(clf, points, params, grid, 7, par::Exec::serial).first;
        });
        const double tp = time_secs([&] {
            b = smoothing::certify_dataset(clf, points, params, grid, 7, par::Exec::parallel).first;
        });
        report("certify_dataset", ts, tp, a == b);
    }

    // sampled estimator iterations
    {
        const auto oracle = synth::OracleModel::sample(grid, 10, 0.4, 0.95, 0.2, 0.8, 11);
        synth::PartitionSpec spec;
        spec.beta = 0.1;
        spec.num_clients = 100;
        spec.class_totals = std::vector<std::int64_t>(10, 600);
        spec.seed = 12;
        const auto realized = synth::realize_population(oracle, synth::make_partition(spec), 13);
        std::vector<ClientRecord> clients;
        for (const auto& r : realized) clients.push_back(r.record);
        const LabelDistribution target(std::vector<double>(10, 0.1));
        est::EstimatorConfig cfg;
        cfg.T = 4000;
        cfg.E = 10;
        cfg.tau = 50;
        cfg.seed = 14;
        est::EstimateReport a{CertifiedCurve(grid, std::vector<double>(grid.size(), 0.0)),
                              SimplexWeights(std::vector<double>{1.0}), 0, 0, {}};
        auto b = a;
        const double ts =
            time_secs([&] { a = est::estimate_ga(clients, target, cfg, false, par::Exec::serial); });
        const double tp = time_secs(
            [&] { b = est::estimate_ga(clients, target, cfg, false, par::Exec::parallel); });
        report("estimator iterations", ts, tp, a.delta == b.delta && a.curve == b.curve);
    }
    return 0;
}
