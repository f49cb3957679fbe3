#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "certagg/rng.hpp"
#include "certagg/synthdata.hpp"
#include "oracles.hpp"

using namespace certagg;
using namespace certagg::synth;

namespace {

PartitionSpec dirichlet_spec(double beta, std::size_t clients,
                             std::vector<std::int64_t> totals, std::uint64_t seed) {
    PartitionSpec s;
    s.scheme = PartitionScheme::Dirichlet;
    s.beta = beta;
    s.num_clients = clients;
    s.class_totals = std::move(totals);
    s.seed = seed;
    return s;
}

PartitionSpec pareto_spec(double beta, std::size_t clients, std::vector<std::int64_t> totals,
                          std::uint64_t seed) {
    PartitionSpec s;
    s.scheme = PartitionScheme::Pareto;
    s.beta = beta;
    s.x_m = 1.0;
    s.num_clients = clients;
    s.class_totals = std::move(totals);
    s.seed = seed;
    return s;
}

double gini(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double cum = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        weighted += (static_cast<double>(i) + 1.0) * v[i];
        cum += v[i];
    }
    return (2.0 * weighted) / (n * cum) - (n + 1.0) / n;
}

}  // namespace

TEST_CASE("partition conservation and determinism") {
    for (int scheme = 0; scheme < 2; ++scheme) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const std::vector<std::int64_t> totals{137, 401, 256, 99};
            const auto spec = scheme == 0 ? dirichlet_spec(0.3, 12, totals, seed)
                                          : pareto_spec(2.5, 12, totals, seed);
            const auto counts = make_partition(spec);
            REQUIRE(counts.size() == 12);
            for (std::size_t j = 0; j < totals.size(); ++j) {
                std::int64_t col = 0;
                for (const auto& c : counts) col += c[j];
                REQUIRE(col == totals[j]);
            }
            CHECK(make_partition(spec) == counts);  // bitwise repeatable
        }
    }
}

TEST_CASE("single client receives everything") {
    const auto d = make_partition(dirichlet_spec(0.5, 1, {10, 20}, 3));
    CHECK(d[0] == ClassCounts{10, 20});
    const auto p = make_partition(pareto_spec(3.0, 1, {10, 20}, 3));
    CHECK(p[0] == ClassCounts{10, 20});
}

TEST_CASE("huge Dirichlet concentration approaches the uniform split") {
    // beta -> infinity: every client's class proportions near uniform
    const std::size_t n_clients = 10;
    const std::size_t m = 5;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto counts = make_partition(
            dirichlet_spec(1e6, n_clients, std::vector<std::int64_t>(m, 10000), seed));
        for (const auto& c : counts) {
            std::int64_t total = 0;
            for (auto x : c) total += x;
            REQUIRE(total > 0);
            for (auto x : c) {
                const double prop = static_cast<double>(x) / static_cast<double>(total);
                REQUIRE(std::abs(prop - 1.0 / static_cast<double>(m)) < 0.05);
            }
        }
    }
}

TEST_CASE("small Dirichlet concentration concentrates classes on few clients") {
    const std::size_t m = 10;
    double mean_nonzero = 0.0;
    int clients_seen = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto counts = make_partition(
            dirichlet_spec(0.1, 100, std::vector<std::int64_t>(m, 500), seed));
        for (const auto& c : counts) {
            int nonzero = 0;
            for (auto x : c) nonzero += x > 0 ? 1 : 0;
            mean_nonzero += nonzero;
            ++clients_seen;
        }
    }
    mean_nonzero /= clients_seen;
    // heavy skew: clients hold far fewer than all 10 classes on average
    CHECK(mean_nonzero < 0.6 * static_cast<double>(m));
}

TEST_CASE("Pareto shape 3 is more imbalanced than shape 6") {
    double g3 = 0.0, g6 = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (double beta : {3.0, 6.0}) {
            const auto counts =
                make_partition(pareto_spec(beta, 50, std::vector<std::int64_t>(5, 2000), seed));
            std::vector<double> sizes;
            for (const auto& c : counts) {
                std::int64_t total = 0;
                for (auto x : c) total += x;
                sizes.push_back(static_cast<double>(total));
            }
            (beta == 3.0 ? g3 : g6) += gini(sizes);
        }
    }
    CHECK(g3 > g6);
}

TEST_CASE("proportional_counts hits the total exactly") {
    rng::Rng gen(17);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + gen.below(12);
        std::vector<double> w(n);
        for (auto& x : w) x = gen.uniform(0.01, 5.0);
        const std::int64_t total = static_cast<std::int64_t>(gen.below(10000));
        const auto counts = proportional_counts(w, total);
        std::int64_t sum = 0;
        for (auto c : counts) sum += c;
        REQUIRE(sum == total);
    }
}

TEST_CASE("ground_truth_curve identity cases") {
    const auto grid = RadiusGrid::uniform(20);
    const auto oracle = OracleModel::sample(grid, 4, 0.5, 0.95, 0.2, 0.8, 11);
    // one-hot returns that class curve exactly
    for (std::size_t j = 0; j < 4; ++j) {
        std::vector<double> probs(4, 0.0);
        probs[j] = 1.0;
        const auto curve = ground_truth_curve(oracle, LabelDistribution(probs));
        CHECK(curve == oracle.class_curve(j));
    }
    // uniform returns the mean curve
    const auto mean = ground_truth_curve(oracle, LabelDistribution({0.25, 0.25, 0.25, 0.25}));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double want = 0.0;
        for (std::size_t j = 0; j < 4; ++j) want += 0.25 * oracle.class_curve(j)[k];
        CHECK(mean[k] == doctest::Approx(want).epsilon(1e-15));
    }
}

TEST_CASE("ground_truth_curve matches a Monte Carlo estimate") {
    const auto grid = RadiusGrid::uniform(20);
    const auto oracle = OracleModel::sample(grid, 4, 0.4, 0.95, 0.2, 0.8, 23);
    rng::Rng gen(29);
    const LabelDistribution dist(oracles::random_simplex_point(gen, 4));
    const auto exact = ground_truth_curve(oracle, dist);

    // independent sampling route: class by inverse cdf, radius by survival
    const int n_samples = 1000000;
    std::vector<double> cum(4);
    std::partial_sum(dist.probs().begin(), dist.probs().end(), cum.begin());
    std::vector<std::int64_t> robust(grid.size(), 0);
    for (int s = 0; s < n_samples; ++s) {
        const double cu = gen.uniform();
        std::size_t j = 0;
        while (j + 1 < 4 && cu > cum[j]) ++j;
        const double u = gen.uniform();
        const auto& lj = oracle.class_curve(j);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (lj[k] > u) {
                ++robust[k];
            } else {
                break;
            }
        }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double mc = static_cast<double>(robust[k]) / n_samples;
        REQUIRE(std::abs(mc - exact[k]) < 0.002);
    }
}

TEST_CASE("realize_client basics") {
    const auto grid = RadiusGrid::uniform(20);
    // constant-1 class curve: a single sample of that class is always robust
    std::vector<CertifiedCurve> curves;
    curves.emplace_back(grid, std::vector<double>(grid.size(), 1.0));
    curves.emplace_back(grid, std::vector<double>(grid.size(), 0.5));
    const OracleModel oracle(std::move(curves));
    const auto rc = realize_client(oracle, {1, 0}, 0, 5);
    CHECK(rc.record.n == 1);
    CHECK(rc.record.curve.values() == std::vector<double>(grid.size(), 1.0));

    CHECK_THROWS_AS(realize_client(oracle, {0, 0}, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(realize_client(oracle, {1}, 0, 5), std::invalid_argument);
}

TEST_CASE("realize_client converges to the exact expectation") {
    const auto grid = RadiusGrid::uniform(20);
    const auto oracle = OracleModel::sample(grid, 5, 0.4, 0.95, 0.2, 0.8, 31);
    const ClassCounts counts{30000, 10000, 25000, 20000, 15000};
    const auto rc = realize_client(oracle, counts, 3, 41);
    const auto expect = ground_truth_curve(oracle, rc.record.dist);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        REQUIRE(std::abs(rc.record.curve[k] - expect[k]) < 0.01);
    }
    // empirical curves are non-increasing by construction
    for (std::size_t k = 1; k < grid.size(); ++k) {
        REQUIRE(rc.record.curve[k] <= rc.record.curve[k - 1]);
    }
}

TEST_CASE("realization is deterministic and order-independent") {
    const auto grid = RadiusGrid::uniform(20);
    const auto oracle = OracleModel::sample(grid, 3, 0.5, 0.9, 0.3, 0.7, 1);
    const std::vector<ClassCounts> partition{{40, 0, 10}, {5, 5, 5}, {0, 100, 3}};
    const auto a = realize_population(oracle, partition, 77, par::Exec::serial);
    const auto b = realize_population(oracle, partition, 77, par::Exec::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].record.curve == b[i].record.curve);
        CHECK(a[i].record.dist == b[i].record.dist);
        REQUIRE(a[i].samples.size() == b[i].samples.size());
        for (std::size_t s = 0; s < a[i].samples.size(); ++s) {
            CHECK(a[i].samples[s].robust_radius == b[i].samples[s].robust_radius);
        }
        // direct realization with the client id reproduces the same stream
        const auto direct = realize_client(oracle, partition[i], static_cast<ClientId>(i), 77);
        CHECK(direct.record.curve == a[i].record.curve);
    }
}

TEST_CASE("expectation identity: mixing commutes with ground truth") {
    const auto grid = RadiusGrid::uniform(20);
    rng::Rng gen(47);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t m = 2 + gen.below(8);
        const auto oracle =
            OracleModel::sample(grid, m, 0.3, 1.0, 0.1, 1.0, gen.raw());
        const std::size_t n_dists = 1 + gen.below(8);
        std::vector<LabelDistribution> dists;
        for (std::size_t i = 0; i < n_dists; ++i) {
            dists.emplace_back(oracles::random_simplex_point(gen, m));
        }
        const SimplexWeights w(oracles::random_simplex_point(gen, n_dists));
        const auto left = ground_truth_curve(oracle, mix_distributions(w, dists));
        std::vector<CertifiedCurve> rights;
        for (const auto& d : dists) rights.push_back(ground_truth_curve(oracle, d));
        const auto right = combine_curves(w.values(), rights);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            REQUIRE(std::abs(left[k] - right[k]) <= 1e-12);
        }
    }
}

TEST_CASE("partition CSV layout") {
    const auto dir = std::filesystem::temp_directory_path() / "certagg_test_synth";
    std::filesystem::create_directories(dir);
    const std::vector<ClassCounts> counts{{3, 0}, {1, 2}};
    write_partition_csv(dir / "partition.csv", counts);
    std::ifstream in(dir / "partition.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "client_id,class_id,count\n0,0,3\n1,0,1\n1,1,2\n");
    std::filesystem::remove_all(dir);
}
