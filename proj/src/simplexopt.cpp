#include "certagg/simplexopt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace certagg {

SimplexWeights project_simplex(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
    const std::size_t n = v.size();
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t k = 0; k < n; ++k) {
        cumsum += u[k];
        const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) {
            rho = k + 1;
            theta = t;
        }
    }
    (void)rho;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::max(v[i] - theta, 0.0);
    // thresholding leaves the sum within an ulp or two of 1
    return SimplexWeights(std::move(w));
}

namespace {

// Dense least-squares data: columns of D are the candidate distributions.
struct Problem {
    std::size_t m;  // classes
    std::size_t k;  // candidates
    std::vector<double> d;     // m x k, column-major
    std::vector<double> gram;  // k x k, D^T D
    std::vector<double> dt_t;  // k, D^T target
    double tt;                 // target . target

    double objective(const std::vector<double>& a) const {
        // || t - D a ||^2 = a'Ga - 2 (D't)'a + t't
        double quad = 0.0, lin = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double gi = 0.0;
            for (std::size_t j = 0; j < k; ++j) gi += gram[i * k + j] * a[j];
            quad += a[i] * gi;
            lin += dt_t[i] * a[i];
        }
        return quad - 2.0 * lin + tt;
    }

    void gradient(const std::vector<double>& a, std::vector<double>& g) const {
        for (std::size_t i = 0; i < k; ++i) {
            double gi = 0.0;
            for (std::size_t j = 0; j < k; ++j) gi += gram[i * k + j] * a[j];
            g[i] = 2.0 * (gi - dt_t[i]);
        }
    }
};

Problem build_problem(const LabelDistribution& target,
                      const std::vector<LabelDistribution>& dists) {
    Problem p;
    p.m = target.num_classes();
    p.k = dists.size();
    p.d.resize(p.m * p.k);
    for (std::size_t i = 0; i < p.k; ++i) {
        if (dists[i].num_classes() != p.m) {
            throw std::invalid_argument("solve_simplex_ls: class count mismatch");
        }
        for (std::size_t j = 0; j < p.m; ++j) p.d[i * p.m + j] = dists[i][j];
    }
    p.gram.assign(p.k * p.k, 0.0);
    for (std::size_t i = 0; i < p.k; ++i) {
        for (std::size_t j = i; j < p.k; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < p.m; ++r) s += p.d[i * p.m + r] * p.d[j * p.m + r];
            p.gram[i * p.k + j] = s;
            p.gram[j * p.k + i] = s;
        }
    }
    p.dt_t.assign(p.k, 0.0);
    p.tt = 0.0;
    for (std::size_t j = 0; j < p.m; ++j) p.tt += target[j] * target[j];
    for (std::size_t i = 0; i < p.k; ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < p.m; ++r) s += p.d[i * p.m + r] * target[r];
        p.dt_t[i] = s;
    }
    return p;
}

// Largest eigenvalue of the Gram matrix by power iteration.
double gram_spectral_bound(const Problem& p) {
    const std::size_t k = p.k;
    std::vector<double> v(k, 1.0 / std::sqrt(static_cast<double>(k)));
    std::vector<double> gv(k);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        for (std::size_t i = 0; i < k; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += p.gram[i * k + j] * v[j];
            gv[i] = s;
        }
        double norm = 0.0;
        for (double x : gv) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        double rayleigh = 0.0;
        for (std::size_t i = 0; i < k; ++i) rayleigh += v[i] * gv[i];
        if (it > 10 && std::abs(rayleigh - lambda) <= 1e-13 * std::max(1.0, lambda)) {
            lambda = rayleigh;
            break;
        }
        lambda = rayleigh;
        for (std::size_t i = 0; i < k; ++i) v[i] = gv[i] / norm;
    }
    // columns are distributions, so the Gram is never identically zero
    return std::max(lambda, 1e-12);
}

}  // namespace

SolveReport solve_simplex_ls(const LabelDistribution& target,
                             const std::vector<LabelDistribution>& dists, double tol,
                             int max_iter, std::vector<double>* objective_trace) {
    if (dists.empty()) throw std::invalid_argument("solve_simplex_ls: no candidate distributions");
    if (tol <= 0.0 || max_iter < 1) {
        throw std::invalid_argument("solve_simplex_ls: tol and max_iter must be positive");
    }
    if (dists.size() == 1) {
        SimplexWeights w(std::vector<double>{1.0});
        const double r = l2_distance(target, dists[0]);
        return SolveReport{std::move(w), r, 0, true};
    }

    const Problem p = build_problem(target, dists);
    const std::size_t k = p.k;

    double big_l = 2.0 * gram_spectral_bound(p) * 1.01;

    std::vector<double> x(k, 1.0 / static_cast<double>(k));  // uniform start
    std::vector<double> y = x;
    std::vector<double> g(k), trial(k);
    double fx = p.objective(x);
    double t_momentum = 1.0;
    if (objective_trace) objective_trace->push_back(fx);

    auto project_step = [&](const std::vector<double>& from, const std::vector<double>& grad,
                            double step) {
        for (std::size_t i = 0; i < k; ++i) trial[i] = from[i] - step * grad[i];
        auto w = project_simplex(trial);
        return std::vector<double>(w.values());
    };
    auto majorizer_holds = [&](const std::vector<double>& from, double f_from,
                               const std::vector<double>& grad, const std::vector<double>& to,
                               double f_to, double lip) {
        double lin = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = to[i] - from[i];
            lin += grad[i] * d;
            sq += d * d;
        }
        return f_to <= f_from + lin + 0.5 * lip * sq + 1e-15;
    };

    int it = 0;
    bool converged = false;
    for (it = 1; it <= max_iter; ++it) {
        // optimality measure at the accepted iterate
        p.gradient(x, g);
        auto xpg = project_step(x, g, 1.0 / big_l);
        double pg = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double d = x[i] - xpg[i];
            pg += d * d;
        }
        pg = std::sqrt(pg) * big_l;
        if (pg <= tol) {
            converged = true;
            break;
        }

        // accelerated step from y, backtracking on the majorization
        p.gradient(y, g);
        const double fy = p.objective(y);
        std::vector<double> z;
        for (;;) {
            z = project_step(y, g, 1.0 / big_l);
            if (majorizer_holds(y, fy, g, z, p.objective(z), big_l)) break;
            big_l *= 2.0;
            if (!std::isfinite(big_l)) break;
        }
        double fz = p.objective(z);

        if (fz > fx) {
            // momentum overshot: restart with a plain descent step from x
            p.gradient(x, g);
            for (;;) {
                z = project_step(x, g, 1.0 / big_l);
                if (majorizer_holds(x, fx, g, z, p.objective(z), big_l)) break;
                big_l *= 2.0;
                if (!std::isfinite(big_l)) break;
            }
            fz = p.objective(z);
            t_momentum = 1.0;
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        const double beta = (t_momentum - 1.0) / t_next;
        for (std::size_t i = 0; i < k; ++i) y[i] = z[i] + beta * (z[i] - x[i]);
        x = z;
        fx = fz;
        t_momentum = t_next;
        if (objective_trace) objective_trace->push_back(fx);
    }

    SimplexWeights weights(std::move(x));
    const double res = residual(target, weights, dists);
    return SolveReport{std::move(weights), res, std::min(it, max_iter), converged};
}

}  // namespace certagg
