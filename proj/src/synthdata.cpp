#include "certagg/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "certagg/rng.hpp"

namespace certagg::synth {

void PartitionSpec::validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("PartitionSpec: beta must be positive");
    if (!(x_m > 0.0)) throw std::invalid_argument("PartitionSpec: x_m must be positive");
    if (num_clients < 1) throw std::invalid_argument("PartitionSpec: need at least one client");
    if (class_totals.size() < 2) throw std::invalid_argument("PartitionSpec: need >= 2 classes");
    for (auto t : class_totals) {
        if (t < 1) throw std::invalid_argument("PartitionSpec: every class total must be >= 1");
    }
}

std::vector<ClassCounts> partition_dirichlet(const PartitionSpec& spec) {
    spec.validate();
    if (spec.scheme != PartitionScheme::Dirichlet) {
        throw std::invalid_argument("partition_dirichlet: spec.scheme is not Dirichlet");
    }
    const std::size_t n_clients = spec.num_clients;
    const std::size_t m = spec.class_totals.size();
    std::vector<ClassCounts> counts(n_clients, ClassCounts(m, 0));
    for (std::size_t j = 0; j < m; ++j) {
        rng::Rng gen(rng::derive(spec.seed, j));
        const auto pi = gen.dirichlet(spec.beta, n_clients);
        std::vector<double> cum(n_clients);
        std::partial_sum(pi.begin(), pi.end(), cum.begin());
        cum.back() = 1.0;  // guard against rounding in the last bucket
        for (std::int64_t s = 0; s < spec.class_totals[j]; ++s) {
            const double u = gen.uniform();
            const auto it = std::lower_bound(cum.begin(), cum.end(), u);
            const std::size_t i = static_cast<std::size_t>(it - cum.begin());
            ++counts[std::min(i, n_clients - 1)][j];
        }
    }
    return counts;
}

std::vector<std::int64_t> proportional_counts(std::span<const double> weights,
                                              std::int64_t total) {
    if (weights.empty()) throw std::invalid_argument("proportional_counts: empty weights");
    if (total < 0) throw std::invalid_argument("proportional_counts: negative total");
    const std::size_t n = weights.size();
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("proportional_counts: negative weight");
        wsum += w;
    }
    if (!(wsum > 0.0)) throw std::invalid_argument("proportional_counts: zero total weight");
    std::vector<std::int64_t> out(n, 0);
    std::vector<std::pair<double, std::size_t>> rema(n);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ideal = static_cast<double>(total) * weights[i] / wsum;
        out[i] = static_cast<std::int64_t>(std::floor(ideal));
        assigned += out[i];
        rema[i] = {ideal - std::floor(ideal), i};
    }
    // ties broken toward the lower index
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::int64_t r = 0; r < total - assigned; ++r) {
        ++out[rema[static_cast<std::size_t>(r) % n].second];
    }
    return out;
}

std::vector<ClassCounts> partition_pareto(const PartitionSpec& spec) {
    spec.validate();
    if (spec.scheme != PartitionScheme::Pareto) {
        throw std::invalid_argument("partition_pareto: spec.scheme is not Pareto");
    }
    const std::size_t n_clients = spec.num_clients;
    const std::size_t m = spec.class_totals.size();
    std::vector<ClassCounts> counts(n_clients, ClassCounts(m, 0));
    for (std::size_t j = 0; j < m; ++j) {
        rng::Rng gen(rng::derive(spec.seed, j));
        std::vector<double> w(n_clients);
        for (auto& x : w) x = gen.pareto(spec.x_m, spec.beta);
        const auto col = proportional_counts(w, spec.class_totals[j]);
        for (std::size_t i = 0; i < n_clients; ++i) counts[i][j] = col[i];
    }
    return counts;
}

std::vector<ClassCounts> make_partition(const PartitionSpec& spec) {
    return spec.scheme == PartitionScheme::Dirichlet ? partition_dirichlet(spec)
                                                     : partition_pareto(spec);
}

void write_partition_csv(const std::filesystem::path& path,
                         const std::vector<ClassCounts>& counts) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_partition_csv: cannot open " + path.string());
    out << "client_id,class_id,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t j = 0; j < counts[i].size(); ++j) {
            if (counts[i][j] == 0) continue;
            out << i << ',' << j << ',' << counts[i][j] << '\n';
        }
    }
}

OracleModel::OracleModel(std::vector<CertifiedCurve> per_class_curves)
    : curves_(std::move(per_class_curves)) {
    if (curves_.size() < 2) throw std::invalid_argument("OracleModel: need >= 2 class curves");
    for (const auto& c : curves_) {
        if (!(c.grid() == curves_.front().grid())) {
            throw std::invalid_argument("OracleModel: class curves must share one grid");
        }
    }
}

OracleModel OracleModel::sample(const RadiusGrid& grid, std::size_t num_classes,
                                double accuracy_min, double accuracy_max, double scale_min,
                                double scale_max, std::uint64_t seed) {
    if (!(accuracy_min >= 0.0 && accuracy_max <= 1.0 && accuracy_min <= accuracy_max)) {
        throw std::invalid_argument("OracleModel::sample: accuracy range must lie in [0,1]");
    }
    if (!(scale_min > 0.0 && scale_min <= scale_max)) {
        throw std::invalid_argument("OracleModel::sample: scale range must be positive");
    }
    rng::Rng gen(seed);
    std::vector<CertifiedCurve> curves;
    curves.reserve(num_classes);
    for (std::size_t j = 0; j < num_classes; ++j) {
        const double a = gen.uniform(accuracy_min, accuracy_max);
        const double s = gen.uniform(scale_min, scale_max);
        std::vector<double> v(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            v[k] = std::clamp(a * std::exp(-grid[k] / s), 0.0, 1.0);
        }
        curves.emplace_back(grid, std::move(v));
    }
    return OracleModel(std::move(curves));
}

CertifiedCurve ground_truth_curve(const OracleModel& oracle, const LabelDistribution& dist) {
    if (oracle.num_classes() != dist.num_classes()) {
        throw std::invalid_argument("ground_truth_curve: class count mismatch");
    }
    const RadiusGrid& grid = oracle.grid();
    std::vector<double> v(grid.size(), 0.0);
    for (std::size_t j = 0; j < oracle.num_classes(); ++j) {
        const auto& lj = oracle.class_curve(j);
        for (std::size_t k = 0; k < grid.size(); ++k) v[k] += dist[j] * lj[k];
    }
    return CertifiedCurve(grid, std::move(v));
}

CertifiedCurve empirical_curve(const RadiusGrid& grid, std::span<const SampleRecord> samples) {
    if (samples.empty()) throw std::invalid_argument("empirical_curve: no samples");
    std::vector<std::int64_t> robust(grid.size(), 0);
    for (const auto& s : samples) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (s.robust_radius >= grid[k]) ++robust[k];
        }
    }
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        v[k] = static_cast<double>(robust[k]) / static_cast<double>(samples.size());
    }
    return CertifiedCurve(grid, std::move(v));
}

RealizedClient realize_client(const OracleModel& oracle, const ClassCounts& class_counts,
                              ClientId id, std::uint64_t seed) {
    if (class_counts.size() != oracle.num_classes()) {
        throw std::invalid_argument("realize_client: counts/oracle class mismatch");
    }
    std::int64_t total = 0;
    for (auto c : class_counts) {
        if (c < 0) throw std::invalid_argument("realize_client: negative class count");
        total += c;
    }
    if (total == 0) throw std::invalid_argument("realize_client: all class counts are zero");

    const RadiusGrid& grid = oracle.grid();
    rng::Rng gen(rng::derive(seed, id));
    std::vector<SampleRecord> samples;
    samples.reserve(static_cast<std::size_t>(total));
    for (std::size_t j = 0; j < class_counts.size(); ++j) {
        const auto& lj = oracle.class_curve(j);
        for (std::int64_t s = 0; s < class_counts[j]; ++s) {
            const double u = gen.uniform();
            // largest grid radius with L_j(r) > u; never robust when u >= L_j(0)
            double radius = kNeverRobust;
            for (std::size_t k = grid.size(); k-- > 0;) {
                if (lj[k] > u) {
                    radius = grid[k];
                    break;
                }
            }
            samples.push_back(SampleRecord{static_cast<int>(j), radius});
        }
    }

    std::vector<double> mass(class_counts.size());
    for (std::size_t j = 0; j < class_counts.size(); ++j) {
        mass[j] = static_cast<double>(class_counts[j]);
    }
    ClientRecord record(id, total, LabelDistribution::normalized(std::move(mass)),
                        empirical_curve(grid, samples));
    return RealizedClient{std::move(samples), std::move(record)};
}

std::vector<RealizedClient> realize_population(const OracleModel& oracle,
                                               const std::vector<ClassCounts>& partition,
                                               std::uint64_t seed, par::Exec exec) {
    const std::int64_t n = static_cast<std::int64_t>(partition.size());
    auto is_empty = [&](std::size_t i) {
        for (auto c : partition[i]) {
            if (c > 0) return false;
        }
        return true;
    };
    std::vector<std::optional<RealizedClient>> slots(partition.size());
    if (exec == par::Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (is_empty(idx)) continue;
            slots[idx] = realize_client(oracle, partition[idx], static_cast<ClientId>(i), seed);
        }
    } else {
        // sequential reference path
        for (std::int64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (is_empty(idx)) continue;
            slots[idx] = realize_client(oracle, partition[idx], static_cast<ClientId>(i), seed);
        }
    }
    std::vector<RealizedClient> out;
    out.reserve(partition.size());
    for (auto& s : slots) {
        if (s) out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace certagg::synth
