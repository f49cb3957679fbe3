#include "certagg/estimators.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "certagg/rng.hpp"
#include "certagg/simplexopt.hpp"

namespace certagg::est {

void EstimatorConfig::validate() const {
    if (T < 1) throw std::invalid_argument("EstimatorConfig: T must be >= 1");
    if (E < 1) throw std::invalid_argument("EstimatorConfig: E must be >= 1");
    if (tau < 1) throw std::invalid_argument("EstimatorConfig: tau must be >= 1");
}

CertifiedCurve estimate_vw(const std::vector<ClientRecord>& clients) {
    if (clients.empty()) throw std::invalid_argument("estimate_vw: empty client list");
    std::int64_t total = 0;
    for (const auto& c : clients) total += c.n;
    std::vector<double> weights(clients.size());
    std::vector<CertifiedCurve> curves;
    curves.reserve(clients.size());
    for (std::size_t i = 0; i < clients.size(); ++i) {
        weights[i] = static_cast<double>(clients[i].n) / static_cast<double>(total);
        curves.push_back(clients[i].curve);
    }
    return combine_curves(weights, curves);
}

namespace {

std::vector<std::size_t> sample_distinct(std::size_t population, int count, rng::Rng& gen) {
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (int i = 0; i < count; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(gen.below(population - static_cast<std::size_t>(i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(count));
    return idx;
}

// One sampling iteration: the records the solve runs over and the member ids
// behind each record.
struct IterationRecords {
    std::vector<LabelDistribution> dists;
    std::vector<CertifiedCurve> curves;
    std::vector<std::vector<ClientId>> members;
};

IterationRecords iteration_records(const std::vector<ClientRecord>& clients,
                                   const EstimatorConfig& config, int t, bool grouped,
                                   bool merge_trailing) {
    rng::Rng gen(rng::derive(config.seed, static_cast<std::uint64_t>(t)));
    const auto idx = sample_distinct(clients.size(), config.E, gen);

    IterationRecords rec;
    if (!grouped) {
        for (auto i : idx) {
            rec.dists.push_back(clients[i].dist);
            rec.curves.push_back(clients[i].curve);
            rec.members.push_back({clients[i].id});
        }
        return rec;
    }
    std::vector<ClientRecord> sampled;
    sampled.reserve(idx.size());
    for (auto i : idx) sampled.push_back(clients[i]);
    const auto groups =
        grouping::group_clients(sampled, grouping::GroupingConfig{config.tau, merge_trailing});
    for (const auto& g : groups) {
        rec.dists.push_back(g.virtual_record.dist);
        rec.curves.push_back(g.virtual_record.curve);
        std::vector<ClientId> ids;
        for (const auto& m : g.members) ids.push_back(m.id);
        rec.members.push_back(std::move(ids));
    }
    return rec;
}

EstimateReport run_sampled_estimator(const std::vector<ClientRecord>& clients,
                                     const LabelDistribution& target,
                                     const EstimatorConfig& config, bool grouped,
                                     bool merge_trailing, par::Exec exec) {
    config.validate();
    if (clients.empty()) throw std::invalid_argument("estimator: empty client list");
    if (static_cast<std::size_t>(config.E) > clients.size()) {
        throw std::invalid_argument("estimator: E = " + std::to_string(config.E) +
                                    " exceeds client count " + std::to_string(clients.size()));
    }

    int best_t = 1;
    if (exec == par::Exec::parallel) {
        std::vector<double> deltas(static_cast<std::size_t>(config.T));
        const std::int64_t t_count = config.T;
#pragma omp parallel for schedule(dynamic, 8)
        for (std::int64_t ti = 0; ti < t_count; ++ti) {
            const int t = static_cast<int>(ti) + 1;
            const auto rec = iteration_records(clients, config, t, grouped, merge_trailing);
            deltas[static_cast<std::size_t>(ti)] =
                solve_simplex_ls(target, rec.dists).residual;
        }
        for (int t = 2; t <= config.T; ++t) {
            if (deltas[static_cast<std::size_t>(t - 1)] <
                deltas[static_cast<std::size_t>(best_t - 1)]) {
                best_t = t;
            }
        }
    } else {
        // sequential reference path: running argmin instead of store-and-scan
        double best_delta = std::numeric_limits<double>::infinity();
        for (int t = 1; t <= config.T; ++t) {
            const auto rec = iteration_records(clients, config, t, grouped, merge_trailing);
            const double d = solve_simplex_ls(target, rec.dists).residual;
            if (d < best_delta) {
                best_delta = d;
                best_t = t;
            }
        }
    }

    // rebuild the winning iteration
    auto rec = iteration_records(clients, config, best_t, grouped, merge_trailing);
    auto report = solve_simplex_ls(target, rec.dists);
    CertifiedCurve curve = combine_curves(report.weights.values(), rec.curves);
    return EstimateReport{std::move(curve), std::move(report.weights), report.residual, best_t,
                          std::move(rec.members)};
}

}  // namespace

EstimateReport estimate_ap(const std::vector<ClientRecord>& clients,
                           const LabelDistribution& target, const EstimatorConfig& config,
                           par::Exec exec) {
    return run_sampled_estimator(clients, target, config, false, false, exec);
}

EstimateReport estimate_ga(const std::vector<ClientRecord>& clients,
                           const LabelDistribution& target, const EstimatorConfig& config,
                           bool merge_trailing, par::Exec exec) {
    return run_sampled_estimator(clients, target, config, true, merge_trailing, exec);
}

double bound_q(std::span<const double> per_class_values) {
    if (per_class_values.empty()) throw std::invalid_argument("bound_q: empty value list");
    double mean = 0.0;
    for (double v : per_class_values) mean += v;
    mean /= static_cast<double>(per_class_values.size());
    double ss = 0.0;
    for (double v : per_class_values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss);
}

std::vector<BoundCheck> check_theorem1(const synth::OracleModel& oracle,
                                       const LabelDistribution& target,
                                       const std::vector<LabelDistribution>& dists,
                                       const SimplexWeights& weights) {
    if (target.num_classes() != oracle.num_classes()) {
        throw std::invalid_argument("check_theorem1: class count mismatch");
    }
    const CertifiedCurve truth = synth::ground_truth_curve(oracle, target);
    std::vector<CertifiedCurve> dist_truths;
    dist_truths.reserve(dists.size());
    for (const auto& d : dists) dist_truths.push_back(synth::ground_truth_curve(oracle, d));
    const CertifiedCurve approx = combine_curves(weights.values(), dist_truths);
    const double delta = residual(target, weights, dists);

    const RadiusGrid& grid = oracle.grid();
    std::vector<BoundCheck> checks;
    checks.reserve(grid.size());
    std::vector<double> per_class(oracle.num_classes());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (std::size_t j = 0; j < oracle.num_classes(); ++j) {
            per_class[j] = oracle.class_curve(j)[k];
        }
        const double q = bound_q(per_class);
        const double gap = std::abs(truth[k] - approx[k]);
        if (gap > delta * q + 1e-9) {
            throw std::runtime_error("check_theorem1: bound violated at radius " +
                                     std::to_string(grid[k]) + ": gap " + std::to_string(gap) +
                                     " > delta*Q " + std::to_string(delta * q));
        }
        checks.push_back(BoundCheck{grid[k], gap, delta, q});
    }
    return checks;
}

}  // namespace certagg::est
