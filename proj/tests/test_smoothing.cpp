#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>

#include "certagg/rng.hpp"
#include "certagg/smoothing.hpp"
#include "oracles.hpp"

using namespace certagg;
using namespace certagg::smoothing;

TEST_CASE("inv_std_normal_cdf examples and symmetry") {
    CHECK(inv_std_normal_cdf(0.5) == 0.0);
    CHECK(inv_std_normal_cdf(0.975) == doctest::Approx(1.9599640).epsilon(1e-7));
    CHECK(std::abs(inv_std_normal_cdf(0.975) - oracles::phi_inv_bisect(0.975)) <= 1e-9);
    rng::Rng gen(3);
    for (int i = 0; i < 200; ++i) {
        const double p = gen.uniform(0.001, 0.999);
        CHECK(inv_std_normal_cdf(p) == doctest::Approx(-inv_std_normal_cdf(1.0 - p)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(inv_std_normal_cdf(0.0), std::domain_error);
    CHECK_THROWS_AS(inv_std_normal_cdf(1.0), std::domain_error);
    CHECK_THROWS_AS(inv_std_normal_cdf(-0.2), std::domain_error);
}

TEST_CASE("inv_std_normal_cdf tracks the bisection oracle across the range") {
    rng::Rng gen(11);
    for (int i = 0; i < 400; ++i) {
        // log-uniform tail sampling plus the central region
        double p;
        if (i % 2 == 0) {
            p = std::pow(10.0, gen.uniform(-12.0, -0.4));
        } else {
            p = gen.uniform(0.01, 0.99);
        }
        if (i % 4 == 1) p = 1.0 - p;
        const double got = inv_std_normal_cdf(p);
        const double want = oracles::phi_inv_bisect(p);
        REQUIRE(std::abs(got - want) <= 1e-9);
    }
}

TEST_CASE("binom_lower_bound conventions and closed form") {
    CHECK(binom_lower_bound(0, 100, 0.05) == 0.0);
    const double closed = std::exp(std::log(0.001) / 1000.0);
    CHECK(binom_lower_bound(1000, 1000, 0.001) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(closed == doctest::Approx(0.9931160).epsilon(1e-6));
    CHECK(std::abs(binom_lower_bound(50, 100, 0.05) - oracles::cp_lower_bisect(50, 100, 0.05)) <=
          1e-9);
    CHECK_THROWS_AS(binom_lower_bound(-1, 10, 0.05), std::domain_error);
    CHECK_THROWS_AS(binom_lower_bound(11, 10, 0.05), std::domain_error);
    CHECK_THROWS_AS(binom_lower_bound(5, 10, 0.0), std::domain_error);
    CHECK_THROWS_AS(binom_lower_bound(5, 10, 1.0), std::domain_error);
}

TEST_CASE("binom_lower_bound agrees with the long-double tail oracle") {
    rng::Rng gen(13);
    for (int i = 0; i < 150; ++i) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(gen.below(2000));
        const std::int64_t k = static_cast<std::int64_t>(gen.below(static_cast<std::uint64_t>(n) + 1));
        const double alpha = gen.uniform(0.0005, 0.2);
        const double got = binom_lower_bound(k, n, alpha);
        const double want = oracles::cp_lower_bisect(k, n, alpha);
        REQUIRE(std::abs(got - want) <= 1e-9);
    }
}

TEST_CASE("binom_lower_bound monotonicity") {
    for (std::int64_t k = 0; k < 50; ++k) {
        CHECK(binom_lower_bound(k, 50, 0.01) <= binom_lower_bound(k + 1, 50, 0.01) + 1e-12);
    }
    const double tighter = binom_lower_bound(40, 50, 0.001);
    const double looser = binom_lower_bound(40, 50, 0.05);
    CHECK(tighter <= looser + 1e-12);
}

namespace {

struct ConstantClassifier : Classifier {
    int label;
    int classes;
    ConstantClassifier(int l, int m) : label(l), classes(m) {}
    int predict(std::span<const double>) const override { return label; }
    int num_classes() const override { return classes; }
};

// label depends on hashed input bits: vote shares land near 1/M
struct HashClassifier : Classifier {
    int classes;
    explicit HashClassifier(int m) : classes(m) {}
    int predict(std::span<const double> x) const override {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (double v : x) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            h = rng::mix64(h ^ bits);
        }
        return static_cast<int>(h % static_cast<std::uint64_t>(classes));
    }
    int num_classes() const override { return classes; }
};

}  // namespace

TEST_CASE("certify_point on a constant classifier hits the closed-form radius") {
    const ConstantClassifier clf(3, 10);
    SmoothingParams params;
    params.sigma = 0.1;
    params.n0 = 100;
    params.n = 1000;
    params.alpha_conf = 0.001;
    const std::vector<double> x{0.4, -0.2};
    const auto outcome = certify_point(clf, x, params, 42);
    REQUIRE(outcome.certified);
    CHECK(outcome.label == 3);
    CHECK(outcome.estimation_votes == 1000);
    // expected radius through the two independent oracles
    const double p_lo = oracles::cp_lower_bisect(1000, 1000, 0.001);
    const double want = 0.1 * oracles::phi_inv_bisect(p_lo);
    CHECK(outcome.radius == doctest::Approx(want).epsilon(1e-6));
    CHECK(outcome.radius == doctest::Approx(0.2462).epsilon(1e-3));

    // radius is linear in sigma
    auto params2 = params;
    params2.sigma = 0.2;
    const auto outcome2 = certify_point(clf, x, params2, 42);
    CHECK(outcome2.radius == doctest::Approx(2.0 * outcome.radius).epsilon(1e-12));
}

TEST_CASE("certify_point abstains when votes are split") {
    const HashClassifier clf(10);
    SmoothingParams params;
    params.sigma = 0.5;
    const std::vector<double> x{0.0, 0.0, 1.0};
    int abstained = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto outcome = certify_point(clf, x, params, seed);
        if (!outcome.certified) ++abstained;
        // never certified with a lower bound at or below 1/2
        if (outcome.certified) {
            CHECK(binom_lower_bound(outcome.estimation_votes, params.n, params.alpha_conf) > 0.5);
        }
    }
    CHECK(abstained == 20);
}

TEST_CASE("certify_point is deterministic given the seed") {
    const HashClassifier clf(4);
    SmoothingParams params;
    const std::vector<double> x{0.3, 0.3};
    const auto a = certify_point(clf, x, params, 123);
    const auto b = certify_point(clf, x, params, 123);
    CHECK(a.certified == b.certified);
    CHECK(a.label == b.label);
    CHECK(a.radius == b.radius);
    CHECK(a.selection_votes == b.selection_votes);
    CHECK(a.estimation_votes == b.estimation_votes);
}

TEST_CASE("curve_from_outcomes counting rule") {
    const auto grid = RadiusGrid::uniform(20);
    // four points: certified at 0.3, certified at 0.6, abstain, wrong class
    std::vector<CertifyOutcome> outcomes(4);
    outcomes[0] = {true, 1, 0.3, 90, 950};
    outcomes[1] = {true, 2, 0.6, 95, 990};
    outcomes[2] = {false, 0, 0.0, 40, 400};
    outcomes[3] = {true, 1, 0.5, 80, 900};
    const std::vector<int> labels{1, 2, 0, 2};  // last one certified the wrong class
    const auto curve = curve_from_outcomes(grid, outcomes, labels);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid[k];
        double want;
        if (r <= 0.3) {
            want = 0.5;
        } else if (r <= 0.6) {
            want = 0.25;
        } else {
            want = 0.0;
        }
        CHECK(curve[k] == doctest::Approx(want).epsilon(1e-15));
    }

    // all certified-correct with radius above the grid: constant 1
    std::vector<CertifyOutcome> all(3, CertifyOutcome{true, 0, 2.0, 100, 1000});
    CHECK(curve_from_outcomes(grid, all, {0, 0, 0}).values() ==
          std::vector<double>(grid.size(), 1.0));
    // all abstain: constant 0
    std::vector<CertifyOutcome> none(3, CertifyOutcome{false, 0, 0.0, 40, 0});
    CHECK(curve_from_outcomes(grid, none, {0, 0, 0}).values() ==
          std::vector<double>(grid.size(), 0.0));
}

TEST_CASE("certify_dataset end to end on separated blobs") {
    const auto centroids = make_circle_centroids(4, 2, 2.0);
    const NearestCentroidClassifier clf(centroids);
    const std::vector<std::int64_t> counts{30, 30, 30, 30};
    const auto points = sample_blob_points(centroids, counts, 0.05, 7);
    SmoothingParams params;
    params.sigma = 0.25;
    params.n0 = 50;
    params.n = 400;
    const auto grid = RadiusGrid::uniform(20);
    const auto [curve, outcomes] = certify_dataset(clf, points, params, grid, 99);
    CHECK(outcomes.size() == points.size());
    // points sit essentially at well-separated centroids: r=0 accuracy is high
    CHECK(curve[0] >= 0.9);
    // and the curve respects its invariants by construction
    for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] <= curve[k - 1]);
    CHECK_THROWS_AS(certify_dataset(clf, {}, params, grid, 1), std::invalid_argument);
}

TEST_CASE("Clopper-Pearson coverage: p_lo rarely exceeds the true p") {
    // synthetic voter with known p_A = 0.9; the lower bound may exceed it
    // with probability at most alpha_conf
    const double p_true = 0.9;
    const double alpha = 0.001;
    const std::int64_t n = 1000;
    const int trials = 10000;
    rng::Rng gen(2718);
    std::map<std::int64_t, double> memo;
    int exceed = 0;
    for (int t = 0; t < trials; ++t) {
        std::int64_t k = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            if (gen.uniform() < p_true) ++k;
        }
        auto it = memo.find(k);
        if (it == memo.end()) it = memo.emplace(k, binom_lower_bound(k, n, alpha)).first;
        if (it->second > p_true) ++exceed;
    }
    const double freq = static_cast<double>(exceed) / trials;
    const double slack = 3.0 * std::sqrt(alpha * (1.0 - alpha) / trials);
    CHECK(freq <= alpha + slack);
}

TEST_CASE("SmoothingParams validation") {
    SmoothingParams p;
    CHECK_NOTHROW(p.validate());
    p.sigma = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = SmoothingParams{};
    p.n = 10;
    p.n0 = 20;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = SmoothingParams{};
    p.alpha_conf = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
