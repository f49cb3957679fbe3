#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "certagg/core.hpp"
#include "certagg/rng.hpp"
#include "certagg/synthdata.hpp"
#include "oracles.hpp"

using namespace certagg;

TEST_CASE("LabelDistribution validation") {
    CHECK_NOTHROW(LabelDistribution({0.25, 0.75}));
    CHECK_THROWS_AS(LabelDistribution({1.0}), std::invalid_argument);          // M < 2
    CHECK_THROWS_AS(LabelDistribution({0.6, 0.6}), std::invalid_argument);     // sum != 1
    CHECK_THROWS_AS(LabelDistribution({-0.1, 1.1}), std::invalid_argument);    // negative
    CHECK_THROWS_AS(LabelDistribution::normalized({0.0, 0.0}), std::invalid_argument);
    const auto d = LabelDistribution::normalized({2.0, 6.0});
    CHECK(d[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("RadiusGrid validation and default shape") {
    const auto g = RadiusGrid::uniform(20);
    CHECK(g.size() == 21);
    CHECK(g[0] == 0.0);
    CHECK(g[20] == 1.0);
    CHECK(g[1] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK_THROWS_AS(RadiusGrid({0.1, 0.2}), std::invalid_argument);  // must start at 0
    CHECK_THROWS_AS(RadiusGrid({0.0, 0.2, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(RadiusGrid({0.0, 2.0}), std::invalid_argument);  // above default max
    CHECK_NOTHROW(RadiusGrid({0.0, 2.0}, 2.0));
}

TEST_CASE("CertifiedCurve validation") {
    const auto g = RadiusGrid::uniform(2);
    CHECK_NOTHROW(CertifiedCurve(g, {1.0, 0.5, 0.5}));
    CHECK_THROWS_AS(CertifiedCurve(g, {0.5, 0.6, 0.4}), std::invalid_argument);  // increases
    CHECK_THROWS_AS(CertifiedCurve(g, {1.2, 0.5, 0.4}), std::invalid_argument);  // above 1
    CHECK_THROWS_AS(CertifiedCurve(g, {1.0, 0.5}), std::invalid_argument);       // length
}

TEST_CASE("mix_distributions examples") {
    const SimplexWeights half({0.5, 0.5});
    const std::vector<LabelDistribution> onehots{LabelDistribution({1.0, 0.0}),
                                                 LabelDistribution({0.0, 1.0})};
    const auto mixed = mix_distributions(half, onehots);
    CHECK(mixed[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mixed[1] == doctest::Approx(0.5).epsilon(1e-15));

    const std::vector<LabelDistribution> pair{LabelDistribution({0.3, 0.7}),
                                              LabelDistribution({0.9, 0.1})};
    const auto first = mix_distributions(SimplexWeights({1.0, 0.0}), pair);
    CHECK(first == pair[0]);

    // direct-summation oracle
    const std::vector<LabelDistribution> pair2{LabelDistribution({0.8, 0.2}),
                                               LabelDistribution({0.4, 0.6})};
    const auto got = mix_distributions(SimplexWeights({0.25, 0.75}), pair2);
    const auto want = oracles::weighted_sum({0.25, 0.75}, {{0.8, 0.2}, {0.4, 0.6}});
    for (std::size_t j = 0; j < 2; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-15));
    CHECK(got[0] == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(mix_distributions(half, {pair[0]}), std::invalid_argument);
    CHECK_THROWS_AS(mix_distributions(SimplexWeights({0.7, 0.7}), pair), std::invalid_argument);
}

TEST_CASE("combine_curves examples") {
    const auto g = RadiusGrid::uniform(1);
    const std::vector<CertifiedCurve> curves{CertifiedCurve(g, {1.0, 0.5}),
                                             CertifiedCurve(g, {0.5, 0.5})};
    const std::vector<double> w{0.5, 0.5};
    const auto c = combine_curves(w, curves);
    CHECK(c[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-15));

    const auto ident = combine_curves(std::vector<double>{1.0, 0.0}, curves);
    CHECK(ident == curves[0]);

    const auto g2 = RadiusGrid::uniform(2);
    const std::vector<CertifiedCurve> other{CertifiedCurve(g2, {1.0, 0.5, 0.0}),
                                            CertifiedCurve(g, {0.5, 0.5})};
    CHECK_THROWS_AS(combine_curves(w, other), std::invalid_argument);
}

TEST_CASE("combine_curves matches the pooled per-sample recount") {
    // random 5-client instance with per-sample certification records
    rng::Rng gen(2024);
    const auto grid = RadiusGrid::uniform(20);
    std::vector<CertifiedCurve> curves;
    std::vector<double> weights;
    std::vector<synth::SampleRecord> pooled;
    std::int64_t total = 0;
    std::vector<std::vector<synth::SampleRecord>> per_client(5);
    for (auto& samples : per_client) {
        const std::int64_t n = 20 + static_cast<std::int64_t>(gen.below(200));
        total += n;
        for (std::int64_t s = 0; s < n; ++s) {
            // radius: a random grid value, or never robust
            double radius = synth::kNeverRobust;
            const auto pick = gen.below(grid.size() + 4);
            if (pick < grid.size()) radius = grid[pick];
            samples.push_back({0, radius});
            pooled.push_back(samples.back());
        }
    }
    for (auto& samples : per_client) {
        curves.emplace_back(grid, oracles::pooled_curve(grid, samples));
        weights.push_back(static_cast<double>(samples.size()) / static_cast<double>(total));
    }
    const auto combined = combine_curves(weights, curves);
    const auto want = oracles::pooled_curve(grid, pooled);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(combined[k] - want[k]) <= 1e-12);
    }
}

TEST_CASE("l2_distance examples") {
    const LabelDistribution a({0.5, 0.5});
    CHECK(l2_distance(a, a) == 0.0);
    CHECK(l2_distance(LabelDistribution({1.0, 0.0}), LabelDistribution({0.0, 1.0})) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // direct computation oracle
    const double want = std::sqrt(0.09 + 0.09);
    CHECK(l2_distance(a, LabelDistribution({0.8, 0.2})) == doctest::Approx(want).epsilon(1e-12));
    CHECK_THROWS_AS(
        l2_distance(a, LabelDistribution({0.2, 0.3, 0.5})), std::invalid_argument);
}

TEST_CASE("residual examples and zero iff exact match") {
    const std::vector<LabelDistribution> dists{LabelDistribution({0.3, 0.7}),
                                               LabelDistribution({0.9, 0.1}),
                                               LabelDistribution({0.5, 0.5})};
    CHECK(residual(dists[0], SimplexWeights({1.0, 0.0, 0.0}), dists) == 0.0);
    CHECK(residual(LabelDistribution({0.5, 0.5}), SimplexWeights({0.5, 0.5}),
                   {LabelDistribution({1.0, 0.0}), LabelDistribution({0.0, 1.0})}) ==
          doctest::Approx(0.0).epsilon(1e-15));

    // random instance equals the two-step composition
    rng::Rng gen(7);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<LabelDistribution> ds;
        for (int i = 0; i < 3; ++i) ds.emplace_back(oracles::random_simplex_point(gen, 4));
        const LabelDistribution target(oracles::random_simplex_point(gen, 4));
        const SimplexWeights w(oracles::random_simplex_point(gen, 3));
        const auto mixed = oracles::weighted_sum(
            w.values(), {ds[0].probs(), ds[1].probs(), ds[2].probs()});
        double want = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            want += (target[j] - mixed[j]) * (target[j] - mixed[j]);
        }
        want = std::sqrt(want);
        CHECK(residual(target, w, ds) == doctest::Approx(want).epsilon(1e-12));
        // zero iff the mixture reproduces the target
        const double r = residual(target, w, ds);
        const double direct = l2_distance(target, mix_distributions(w, ds));
        CHECK((r <= 1e-9) == (direct <= 1e-9));
    }
}

TEST_CASE("volume-weighted recombination reproduces the pooled curve (many random splits)") {
    rng::Rng gen(99);
    const auto grid = RadiusGrid::uniform(20);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n_clients = 1 + gen.below(10);
        std::vector<std::vector<synth::SampleRecord>> clients(n_clients);
        std::vector<synth::SampleRecord> pooled;
        std::int64_t total = 0;
        for (auto& samples : clients) {
            const std::int64_t n = 1 + static_cast<std::int64_t>(gen.below(1000));
            total += n;
            for (std::int64_t s = 0; s < n; ++s) {
                double radius = synth::kNeverRobust;
                const auto pick = gen.below(grid.size() + 2);
                if (pick < grid.size()) radius = grid[pick];
                samples.push_back({0, radius});
                pooled.push_back(samples.back());
            }
        }
        std::vector<CertifiedCurve> curves;
        std::vector<double> weights;
        for (auto& samples : clients) {
            curves.emplace_back(grid, oracles::pooled_curve(grid, samples));
            weights.push_back(static_cast<double>(samples.size()) / static_cast<double>(total));
        }
        const auto combined = combine_curves(weights, curves);
        const auto want = oracles::pooled_curve(grid, pooled);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            REQUIRE(std::abs(combined[k] - want[k]) <= 1e-12);
        }
    }
}

TEST_CASE("convex combinations preserve the type invariants") {
    rng::Rng gen(5);
    const auto grid = RadiusGrid::uniform(20);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + gen.below(6);
        const auto w = oracles::random_simplex_point(gen, n);
        std::vector<LabelDistribution> dists;
        std::vector<CertifiedCurve> curves;
        for (std::size_t i = 0; i < n; ++i) {
            dists.emplace_back(oracles::random_simplex_point(gen, 5));
            // random non-increasing curve
            std::vector<double> v(grid.size());
            double cur = gen.uniform();
            for (auto& x : v) {
                x = cur;
                cur *= gen.uniform();
            }
            curves.emplace_back(grid, std::move(v));
        }
        // constructors validate: no throw means invariants hold
        CHECK_NOTHROW(mix_distributions(SimplexWeights(w), dists));
        const auto c = combine_curves(w, curves);
        for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k] <= c[k - 1] + 1e-15);
    }
}
