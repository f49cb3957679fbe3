#include "certagg/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace certagg {

namespace {

double sum_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

LabelDistribution::LabelDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) {
        throw std::invalid_argument("LabelDistribution: need at least 2 classes, got " +
                                    std::to_string(probs_.size()));
    }
    for (std::size_t j = 0; j < probs_.size(); ++j) {
        if (!(probs_[j] >= 0.0) || !std::isfinite(probs_[j])) {
            throw std::invalid_argument("LabelDistribution: entry " + std::to_string(j) +
                                        " is negative or not finite");
        }
    }
    const double s = sum_of(probs_);
    if (std::abs(s - 1.0) > kDistributionTol) {
        throw std::invalid_argument("LabelDistribution: entries sum to " + std::to_string(s) +
                                    ", not 1 within 1e-9");
    }
}

LabelDistribution LabelDistribution::normalized(std::vector<double> mass) {
    if (mass.size() < 2) {
        throw std::invalid_argument("LabelDistribution::normalized: need at least 2 classes");
    }
    double s = 0.0;
    for (double x : mass) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("LabelDistribution::normalized: negative or non-finite mass");
        }
        s += x;
    }
    if (!(s > 0.0)) {
        throw std::invalid_argument("LabelDistribution::normalized: total mass must be positive");
    }
    for (double& x : mass) x /= s;
    return LabelDistribution(std::move(mass));
}

RadiusGrid::RadiusGrid(std::vector<double> radii, double max_radius) : radii_(std::move(radii)) {
    if (radii_.empty()) throw std::invalid_argument("RadiusGrid: empty grid");
    if (radii_.front() != 0.0) throw std::invalid_argument("RadiusGrid: first radius must be 0");
    for (std::size_t k = 1; k < radii_.size(); ++k) {
        if (!(radii_[k] > radii_[k - 1])) {
            throw std::invalid_argument("RadiusGrid: radii must be strictly increasing");
        }
    }
    if (radii_.back() > max_radius) {
        throw std::invalid_argument("RadiusGrid: final radius " + std::to_string(radii_.back()) +
                                    " exceeds configured max " + std::to_string(max_radius));
    }
}

RadiusGrid RadiusGrid::uniform(std::size_t steps, double max_radius) {
    if (steps < 1) throw std::invalid_argument("RadiusGrid::uniform: steps must be >= 1");
    std::vector<double> r(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        r[k] = max_radius * static_cast<double>(k) / static_cast<double>(steps);
    }
    return RadiusGrid(std::move(r), max_radius);
}

CertifiedCurve::CertifiedCurve(RadiusGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("CertifiedCurve: values/grid length mismatch");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k]) || values_[k] < -kDistributionTol ||
            values_[k] > 1.0 + kDistributionTol) {
            throw std::invalid_argument("CertifiedCurve: value at index " + std::to_string(k) +
                                        " outside [0,1]");
        }
        if (k > 0 && values_[k] > values_[k - 1] + kCurveTol) {
            throw std::invalid_argument("CertifiedCurve: values increase at index " +
                                        std::to_string(k) + " (curve must be non-increasing)");
        }
    }
}

ClientRecord::ClientRecord(ClientId id_, std::int64_t n_, LabelDistribution dist_,
                           CertifiedCurve curve_)
    : id(id_), n(n_), dist(std::move(dist_)), curve(std::move(curve_)) {
    if (n < 1) throw std::invalid_argument("ClientRecord: sample count must be >= 1");
}

SimplexWeights::SimplexWeights(std::vector<double> alphas) : alphas_(std::move(alphas)) {
    if (alphas_.empty()) throw std::invalid_argument("SimplexWeights: empty weight vector");
    for (std::size_t i = 0; i < alphas_.size(); ++i) {
        if (!std::isfinite(alphas_[i]) || alphas_[i] < -kDistributionTol ||
            alphas_[i] > 1.0 + kDistributionTol) {
            throw std::invalid_argument("SimplexWeights: entry " + std::to_string(i) +
                                        " outside [0,1]");
        }
    }
    const double s = sum_of(alphas_);
    if (std::abs(s - 1.0) > kDistributionTol) {
        throw std::invalid_argument("SimplexWeights: entries sum to " + std::to_string(s) +
                                    ", not 1 within 1e-9");
    }
}

LabelDistribution mix_distributions(const SimplexWeights& weights,
                                    const std::vector<LabelDistribution>& dists) {
    if (weights.size() != dists.size()) {
        throw std::invalid_argument("mix_distributions: weights/dists length mismatch");
    }
    const std::size_t m = dists.front().num_classes();
    for (const auto& d : dists) {
        if (d.num_classes() != m) {
            throw std::invalid_argument("mix_distributions: class count mismatch across dists");
        }
    }
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < dists.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) out[j] += weights[i] * dists[i][j];
    }
    return LabelDistribution(std::move(out));
}

CertifiedCurve combine_curves(std::span<const double> weights,
                              const std::vector<CertifiedCurve>& curves) {
    if (weights.size() != curves.size()) {
        throw std::invalid_argument("combine_curves: weights/curves length mismatch");
    }
    if (curves.empty()) throw std::invalid_argument("combine_curves: no curves");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("combine_curves: weights must be non-negative");
        }
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > kDistributionTol) {
        throw std::invalid_argument("combine_curves: weights sum to " + std::to_string(wsum) +
                                    ", not 1 within 1e-9");
    }
    const RadiusGrid& grid = curves.front().grid();
    for (const auto& c : curves) {
        if (!(c.grid() == grid)) {
            throw std::invalid_argument("combine_curves: curves do not share one radius grid");
        }
    }
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights[i] * curves[i][k];
    }
    return CertifiedCurve(grid, std::move(out));
}

double l2_distance(const LabelDistribution& a, const LabelDistribution& b) {
    if (a.num_classes() != b.num_classes()) {
        throw std::invalid_argument("l2_distance: class count mismatch");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < a.num_classes(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return std::sqrt(s);
}

double residual(const LabelDistribution& target, const SimplexWeights& weights,
                const std::vector<LabelDistribution>& dists) {
    return l2_distance(target, mix_distributions(weights, dists));
}

}  // namespace certagg
