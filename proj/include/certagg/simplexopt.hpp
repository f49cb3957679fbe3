#pragma once

#include <span>
#include <vector>

#include "certagg/core.hpp"

namespace certagg {

struct SolveReport {
    SimplexWeights weights;
    double residual;  // delta = || target - sum_i alpha_i dists[i] ||
    int iterations;
    bool converged;
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
SimplexWeights project_simplex(std::span<const double> v);

/// argmin_alpha || target - sum_i alpha_i dists[i] ||  s.t. alpha on the simplex.
///
/// Accelerated projected gradient with a monotone safeguard; step from a
/// power-iteration bound on the Gram spectrum, halved by backtracking when
/// the quadratic majorization fails. Stops when the projected-gradient norm
/// falls below tol. Non-convergence is reported via converged=false.
///
/// `objective_trace`, when given, receives the objective value after every
/// accepted iterate (used by tests to check monotone descent).
SolveReport solve_simplex_ls(const LabelDistribution& target,
                             const std::vector<LabelDistribution>& dists,
                             double tol = 1e-8, int max_iter = 100000,
                             std::vector<double>* objective_trace = nullptr);

}  // namespace certagg
