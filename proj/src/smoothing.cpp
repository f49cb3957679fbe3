#include "certagg/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include "certagg/rng.hpp"

namespace certagg::smoothing {

void SmoothingParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("SmoothingParams: sigma must be positive");
    if (n0 < 1) throw std::invalid_argument("SmoothingParams: n0 must be >= 1");
    if (n < n0) throw std::invalid_argument("SmoothingParams: n must be >= n0");
    if (!(alpha_conf > 0.0 && alpha_conf < 1.0)) {
        throw std::invalid_argument("SmoothingParams: alpha_conf must lie in (0,1)");
    }
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace {

// Acklam's rational approximation for the lower half p <= 0.5.
double acklam_lower(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double inv_std_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("inv_std_normal_cdf: p must lie strictly in (0,1)");
    }
    if (p == 0.5) return 0.0;
    // Work on the lower half; 1-p is exact for p in [0.5, 1].
    const bool flip = p > 0.5;
    const double pp = flip ? 1.0 - p : p;
    double z = acklam_lower(pp);
    // Halley refinement against the erf-based CDF.
    for (int pass = 0; pass < 2; ++pass) {
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        if (pdf <= 0.0) break;  // deep tail: rational estimate already at target
        const double err = std_normal_cdf(z) - pp;
        const double u = err / pdf;
        z -= u / (1.0 + 0.5 * z * u);
    }
    return flip ? -z : z;
}

namespace {

// log of the upper binomial tail P(Bin(n,p) >= k) via log-sum-exp
double log_binom_tail(std::int64_t k, std::int64_t n, double p,
                      const std::vector<double>& log_choose) {
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    auto log_pmf = [&](std::int64_t i) {
        return log_choose[static_cast<std::size_t>(i)] + static_cast<double>(i) * lp +
               static_cast<double>(n - i) * lq;
    };
    // the pmf is unimodal in i, so the largest term sits at the clamped mode
    std::int64_t mode = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p));
    mode = std::clamp(mode, k, n);
    const double max_term = log_pmf(mode);
    if (!std::isfinite(max_term)) return -std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (std::int64_t i = k; i <= n; ++i) s += std::exp(log_pmf(i) - max_term);
    return max_term + std::log(s);
}

}  // namespace

double binom_lower_bound(std::int64_t k, std::int64_t n, double alpha_conf) {
    if (n < 1) throw std::domain_error("binom_lower_bound: n must be >= 1");
    if (k < 0 || k > n) throw std::domain_error("binom_lower_bound: k must lie in [0, n]");
    if (!(alpha_conf > 0.0 && alpha_conf < 1.0)) {
        throw std::domain_error("binom_lower_bound: alpha_conf must lie in (0,1)");
    }
    if (k == 0) return 0.0;
    if (k == n) return std::exp(std::log(alpha_conf) / static_cast<double>(n));

    std::vector<double> log_choose(static_cast<std::size_t>(n) + 1);
    for (std::int64_t i = 0; i <= n; ++i) {
        log_choose[static_cast<std::size_t>(i)] =
            std::lgamma(static_cast<double>(n) + 1.0) -
            std::lgamma(static_cast<double>(i) + 1.0) -
            std::lgamma(static_cast<double>(n - i) + 1.0);
    }
    const double log_alpha = std::log(alpha_conf);
    // tail is increasing in p, so bisect for P(Bin(n,p) >= k) = alpha_conf
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_binom_tail(k, n, mid, log_choose) <= log_alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

CertifyOutcome certify_point(const Classifier& classifier, std::span<const double> x,
                             const SmoothingParams& params, std::uint64_t seed) {
    params.validate();
    const int m = classifier.num_classes();
    if (m < 2) throw std::invalid_argument("certify_point: classifier must have >= 2 classes");

    rng::Rng gen(seed);
    std::vector<double> noisy(x.size());
    auto vote = [&]() {
        for (std::size_t i = 0; i < x.size(); ++i) {
            noisy[i] = x[i] + params.sigma * gen.normal();
        }
        const int c = classifier.predict(noisy);
        if (c < 0 || c >= m) throw std::runtime_error("certify_point: classifier label out of range");
        return c;
    };

    // selection round: majority class, ties to the smallest index
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < params.n0; ++i) ++counts[static_cast<std::size_t>(vote())];
    int top = 0;
    for (int c = 1; c < m; ++c) {
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(top)]) top = c;
    }
    const int selection_votes = counts[static_cast<std::size_t>(top)];

    // estimation round with fresh samples
    int k = 0;
    for (int i = 0; i < params.n; ++i) {
        if (vote() == top) ++k;
    }
    const double p_lower = binom_lower_bound(k, params.n, params.alpha_conf);

    CertifyOutcome out;
    out.label = top;
    out.selection_votes = selection_votes;
    out.estimation_votes = k;
    if (p_lower > 0.5) {
        out.certified = true;
        out.radius = params.sigma * inv_std_normal_cdf(p_lower);
    }
    return out;
}

CertifiedCurve curve_from_outcomes(const RadiusGrid& grid,
                                   const std::vector<CertifyOutcome>& outcomes,
                                   const std::vector<int>& true_labels) {
    if (outcomes.empty()) throw std::invalid_argument("curve_from_outcomes: empty outcome list");
    if (outcomes.size() != true_labels.size()) {
        throw std::invalid_argument("curve_from_outcomes: outcomes/labels length mismatch");
    }
    std::vector<std::int64_t> robust(grid.size(), 0);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.certified || o.label != true_labels[i]) continue;
        for (std::size_t kk = 0; kk < grid.size(); ++kk) {
            if (o.radius >= grid[kk]) ++robust[kk];
        }
    }
    std::vector<double> values(grid.size());
    for (std::size_t kk = 0; kk < grid.size(); ++kk) {
        values[kk] = static_cast<double>(robust[kk]) / static_cast<double>(outcomes.size());
    }
    return CertifiedCurve(grid, std::move(values));
}

std::pair<CertifiedCurve, std::vector<CertifyOutcome>> certify_dataset(
    const Classifier& classifier, const std::vector<LabeledPoint>& samples,
    const SmoothingParams& params, const RadiusGrid& grid, std::uint64_t seed, par::Exec exec) {
    if (samples.empty()) throw std::invalid_argument("certify_dataset: empty sample list");
    params.validate();

    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    std::vector<CertifyOutcome> outcomes(samples.size());
    if (exec == par::Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            outcomes[static_cast<std::size_t>(i)] =
                certify_point(classifier, s.x, params, rng::derive(seed, static_cast<std::uint64_t>(i)));
        }
    } else {
        // sequential reference path
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            outcomes[static_cast<std::size_t>(i)] =
                certify_point(classifier, s.x, params, rng::derive(seed, static_cast<std::uint64_t>(i)));
        }
    }

    std::vector<int> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
    return {curve_from_outcomes(grid, outcomes, labels), std::move(outcomes)};
}

void write_certify_csv(const std::filesystem::path& path,
                       const std::vector<CertifyOutcome>& outcomes,
                       const std::vector<int>& true_labels) {
    if (outcomes.size() != true_labels.size()) {
        throw std::invalid_argument("write_certify_csv: outcomes/labels length mismatch");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_certify_csv: cannot open " + path.string());
    out << "point_index,true_label,verdict,predicted_label,radius\n";
    char buf[64];
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        std::snprintf(buf, sizeof(buf), "%.6f", o.certified ? o.radius : 0.0);
        out << i << ',' << true_labels[i] << ',' << (o.certified ? "certified" : "abstain") << ','
            << o.label << ',' << buf << '\n';
    }
}

NearestCentroidClassifier::NearestCentroidClassifier(std::vector<std::vector<double>> centroids)
    : centroids_(std::move(centroids)) {
    if (centroids_.size() < 2) {
        throw std::invalid_argument("NearestCentroidClassifier: need >= 2 centroids");
    }
    for (const auto& c : centroids_) {
        if (c.size() != centroids_.front().size()) {
            throw std::invalid_argument("NearestCentroidClassifier: centroid dimension mismatch");
        }
    }
}

int NearestCentroidClassifier::predict(std::span<const double> x) const {
    if (x.size() != centroids_.front().size()) {
        throw std::invalid_argument("NearestCentroidClassifier: input dimension mismatch");
    }
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids_.size(); ++c) {
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - centroids_[c][i];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<std::vector<double>> make_circle_centroids(int num_classes, int dim, double radius) {
    if (num_classes < 2) throw std::invalid_argument("make_circle_centroids: need >= 2 classes");
    if (dim < 2) throw std::invalid_argument("make_circle_centroids: need dim >= 2");
    if (!(radius > 0.0)) throw std::invalid_argument("make_circle_centroids: radius must be positive");
    std::vector<std::vector<double>> cs(static_cast<std::size_t>(num_classes),
                                        std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (int j = 0; j < num_classes; ++j) {
        const double angle = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(num_classes);
        cs[static_cast<std::size_t>(j)][0] = radius * std::cos(angle);
        cs[static_cast<std::size_t>(j)][1] = radius * std::sin(angle);
    }
    return cs;
}

std::vector<LabeledPoint> sample_blob_points(const std::vector<std::vector<double>>& centroids,
                                             std::span<const std::int64_t> class_counts,
                                             double noise_sd, std::uint64_t seed) {
    if (class_counts.size() != centroids.size()) {
        throw std::invalid_argument("sample_blob_points: counts/centroids length mismatch");
    }
    if (noise_sd < 0.0) throw std::invalid_argument("sample_blob_points: negative noise");
    rng::Rng gen(seed);
    std::vector<LabeledPoint> pts;
    for (std::size_t j = 0; j < centroids.size(); ++j) {
        for (std::int64_t s = 0; s < class_counts[j]; ++s) {
            LabeledPoint p;
            p.label = static_cast<int>(j);
            p.x = centroids[j];
            for (auto& v : p.x) v += noise_sd * gen.normal();
            pts.push_back(std::move(p));
        }
    }
    return pts;
}

}  // namespace certagg::smoothing
