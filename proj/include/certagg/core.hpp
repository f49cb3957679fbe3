#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace certagg {

// mass-sum slack accepted on distributions and aggregation weights
inline constexpr double kDistributionTol = 1e-9;
// pointwise slack on curve identities (volume-weighted recombination)
inline constexpr double kCurveTol = 1e-12;

using ClientId = std::uint64_t;

/// Probability vector over a fixed set of classes.
class LabelDistribution {
public:
    // Validates: M >= 2, entries >= 0, sum within kDistributionTol of 1.
    explicit LabelDistribution(std::vector<double> probs);

    // Explicit construction point that rescales non-negative mass to sum 1.
    // Operations never renormalize; violations surface as errors instead.
    static LabelDistribution normalized(std::vector<double> mass);

    std::size_t num_classes() const { return probs_.size(); }
    double operator[](std::size_t j) const { return probs_[j]; }
    const std::vector<double>& probs() const { return probs_; }

    bool operator==(const LabelDistribution&) const = default;

private:
    std::vector<double> probs_;
};

/// Shared evaluation grid of l2 test radii: radii[0] = 0, strictly increasing.
class RadiusGrid {
public:
    explicit RadiusGrid(std::vector<double> radii, double max_radius = 1.0);

    // {0, 1/steps, 2/steps, ..., 1} scaled by max_radius
    static RadiusGrid uniform(std::size_t steps = 20, double max_radius = 1.0);

    std::size_t size() const { return radii_.size(); }
    double operator[](std::size_t k) const { return radii_[k]; }
    const std::vector<double>& radii() const { return radii_; }

    bool operator==(const RadiusGrid&) const = default;

private:
    std::vector<double> radii_;
};

/// Certified accuracy as a function of test radius on a fixed grid.
/// Values lie in [0,1] and are non-increasing in the radius.
class CertifiedCurve {
public:
    CertifiedCurve(RadiusGrid grid, std::vector<double> values);

    const RadiusGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }

    bool operator==(const CertifiedCurve&) const = default;

private:
    RadiusGrid grid_;
    std::vector<double> values_;
};

/// One client's contribution: sample count, class distribution and the
/// certified-accuracy curve measured on the same local test set.
struct ClientRecord {
    ClientId id;
    std::int64_t n;
    LabelDistribution dist;
    CertifiedCurve curve;

    ClientRecord(ClientId id, std::int64_t n, LabelDistribution dist, CertifiedCurve curve);
};

/// Aggregation coefficients on the probability simplex.
class SimplexWeights {
public:
    // Validates: entries in [0,1], sum within kDistributionTol of 1.
    explicit SimplexWeights(std::vector<double> alphas);

    std::size_t size() const { return alphas_.size(); }
    double operator[](std::size_t i) const { return alphas_[i]; }
    const std::vector<double>& values() const { return alphas_; }

    bool operator==(const SimplexWeights&) const = default;

private:
    std::vector<double> alphas_;
};

/// Convex combination of class distributions: sum_i alpha_i * dists[i].
LabelDistribution mix_distributions(const SimplexWeights& weights,
                                    const std::vector<LabelDistribution>& dists);

/// Pointwise convex combination of curves sharing one grid. Weights must be
/// non-negative and sum to 1 within kDistributionTol.
CertifiedCurve combine_curves(std::span<const double> weights,
                              const std::vector<CertifiedCurve>& curves);

/// Euclidean distance between two distributions over the same classes.
double l2_distance(const LabelDistribution& a, const LabelDistribution& b);

/// The matching gap delta = || target - sum_i alpha_i dists[i] ||.
double residual(const LabelDistribution& target, const SimplexWeights& weights,
                const std::vector<LabelDistribution>& dists);

}  // namespace certagg
