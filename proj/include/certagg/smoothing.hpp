#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "certagg/core.hpp"
#include "certagg/parallel.hpp"

namespace certagg::smoothing {

/// Sampling parameters for the two-phase certification procedure.
struct SmoothingParams {
    double sigma = 0.25;       // Gaussian noise level
    int n0 = 100;              // selection samples
    int n = 1000;              // estimation samples
    double alpha_conf = 0.001; // confidence failure probability

    void validate() const;
};

/// Deterministic base classifier. Implementations must be safe to call from
/// concurrent workers.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int predict(std::span<const double> x) const = 0;
    virtual int num_classes() const = 0;
};

struct CertifyOutcome {
    bool certified = false;
    int label = -1;       // top class from the selection round
    double radius = 0.0;  // certified l2 radius; 0 when abstaining
    int selection_votes = 0;   // votes for `label` among n0 selection samples
    int estimation_votes = 0;  // votes for `label` among n estimation samples
};

struct LabeledPoint {
    std::vector<double> x;
    int label;
};

/// Inverse standard normal CDF, absolute error below 1e-9 (rational estimate
/// plus Halley refinement against the erf-based CDF).
double inv_std_normal_cdf(double p);

/// Standard normal CDF via erfc.
double std_normal_cdf(double z);

/// One-sided Clopper-Pearson lower confidence bound for a binomial
/// proportion: the largest p with P(Bin(n,p) >= k) <= alpha_conf.
/// Returns 0 when k = 0; bisection on the exact tail evaluated in log space.
double binom_lower_bound(std::int64_t k, std::int64_t n, double alpha_conf);

/// Two-phase certification of a single input: select the top class from n0
/// noisy votes, then lower-bound its probability from n fresh votes. Returns
/// a certified radius sigma * phi^{-1}(p_lower) when p_lower > 1/2,
/// otherwise abstains. Deterministic given the seed.
CertifyOutcome certify_point(const Classifier& classifier, std::span<const double> x,
                             const SmoothingParams& params, std::uint64_t seed);

/// Certified-accuracy curve from per-point outcomes: at radius r, the
/// fraction of points certified for their true label with radius >= r.
/// Abstentions and wrong-class certifications count as non-robust everywhere.
CertifiedCurve curve_from_outcomes(const RadiusGrid& grid,
                                   const std::vector<CertifyOutcome>& outcomes,
                                   const std::vector<int>& true_labels);

/// Certifies every point (sub-seed derive(seed, index)) and counts the curve.
std::pair<CertifiedCurve, std::vector<CertifyOutcome>> certify_dataset(
    const Classifier& classifier, const std::vector<LabeledPoint>& samples,
    const SmoothingParams& params, const RadiusGrid& grid, std::uint64_t seed,
    par::Exec exec = par::Exec::parallel);

/// (point_index,true_label,verdict,predicted_label,radius) per row.
void write_certify_csv(const std::filesystem::path& path,
                       const std::vector<CertifyOutcome>& outcomes,
                       const std::vector<int>& true_labels);

/// Bundled toy model: nearest centroid over Gaussian blob classes, so the
/// certification path can run end to end without any ML framework.
class NearestCentroidClassifier : public Classifier {
public:
    explicit NearestCentroidClassifier(std::vector<std::vector<double>> centroids);
    int predict(std::span<const double> x) const override;
    int num_classes() const override { return static_cast<int>(centroids_.size()); }
    const std::vector<std::vector<double>>& centroids() const { return centroids_; }

private:
    std::vector<std::vector<double>> centroids_;
};

/// Class centroids on a circle of the given radius in the first two
/// coordinates (dim >= 2).
std::vector<std::vector<double>> make_circle_centroids(int num_classes, int dim, double radius);

/// Draws class_counts[j] points around centroid j with isotropic Gaussian
/// noise of the given standard deviation. Deterministic given the seed.
std::vector<LabeledPoint> sample_blob_points(const std::vector<std::vector<double>>& centroids,
                                             std::span<const std::int64_t> class_counts,
                                             double noise_sd, std::uint64_t seed);

}  // namespace certagg::smoothing
