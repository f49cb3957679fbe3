#include "certagg/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace certagg::metrics {

namespace {
constexpr double kZeroTruth = 1e-12;

void check_grids(const CertifiedCurve& a, const CertifiedCurve& b) {
    if (!(a.grid() == b.grid())) {
        throw std::invalid_argument("metrics: curves do not share one radius grid");
    }
}
}  // namespace

double rmse(const CertifiedCurve& estimate, const CertifiedCurve& truth) {
    check_grids(estimate, truth);
    double ss = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double d = estimate[k] - truth[k];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

MapeResult mape(const CertifiedCurve& estimate, const CertifiedCurve& truth) {
    check_grids(estimate, truth);
    double sum = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k] <= kZeroTruth) {
            ++excluded;
            continue;
        }
        sum += std::abs((estimate[k] - truth[k]) / truth[k]);
        ++included;
    }
    if (included == 0) {
        throw std::runtime_error("mape: undefined, every radius has zero ground truth");
    }
    return MapeResult{sum / static_cast<double>(included), excluded};
}

}  // namespace certagg::metrics
