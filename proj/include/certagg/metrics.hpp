#pragma once

#include <cstddef>

#include "certagg/core.hpp"

namespace certagg::metrics {

/// Root mean squared pointwise gap over all grid radii.
double rmse(const CertifiedCurve& estimate, const CertifiedCurve& truth);

struct MapeResult {
    double value;
    std::size_t excluded;  // radii skipped because the truth value is ~0
};

/// Mean absolute relative error over radii where truth > 1e-12. Throws when
/// every radius is excluded (the metric is undefined, not zero).
MapeResult mape(const CertifiedCurve& estimate, const CertifiedCurve& truth);

}  // namespace certagg::metrics
