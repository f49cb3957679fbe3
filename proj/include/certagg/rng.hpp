#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace certagg::rng {

// SplitMix64 finalizer, used only to derive sub-seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic per-task sub-seed. Tasks seeded with derive(seed, i) have
// streams that do not depend on execution order, so parallel fan-out gives
// the same result for any worker count.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream));
}

// Deterministic sampler built on std::mt19937_64 (its output sequence is
// fixed by the standard). All distribution transforms are implemented here
// instead of <random>'s distributions, whose algorithms are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // uniform on the open interval (0,1); safe for inverse transforms
    double uniform() { return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x;
        do {
            x = raw();
        } while (x >= limit);
        return x % n;
    }

    // standard normal, Marsaglia polar method
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // Gamma(shape, 1), Marsaglia-Tsang; shapes below 1 go through the
    // usual boost gamma(shape+1) * U^(1/shape).
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("Rng::gamma: shape must be positive");
        if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // symmetric Dirichlet(concentration) over n coordinates
    std::vector<double> dirichlet(double concentration, std::size_t n) {
        std::vector<double> out(n);
        for (;;) {
            double sum = 0.0;
            for (auto& x : out) {
                x = gamma(concentration);
                sum += x;
            }
            if (sum > 0.0) {
                for (auto& x : out) x /= sum;
                return out;
            }
            // all draws underflowed (tiny concentration); redraw
        }
    }

    // Pareto(x_m, shape) via inverse transform
    double pareto(double x_m, double shape) {
        return x_m * std::pow(uniform(), -1.0 / shape);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace certagg::rng
