#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "certagg/core.hpp"
#include "certagg/parallel.hpp"

namespace certagg::synth {

enum class PartitionScheme { Dirichlet, Pareto };

/// Non-IID population layout: how many samples of each class go to each client.
struct PartitionSpec {
    PartitionScheme scheme = PartitionScheme::Dirichlet;
    double beta = 0.1;   // Dirichlet concentration or Pareto shape
    double x_m = 1.0;    // Pareto scale
    std::size_t num_clients = 1;
    std::vector<std::int64_t> class_totals;  // samples per class to distribute
    std::uint64_t seed = 0;

    void validate() const;
};

using ClassCounts = std::vector<std::int64_t>;  // per-class counts for one client

/// For each class j, draws client proportions from Dirichlet(beta * 1_N) and
/// assigns class_totals[j] samples multinomially. Column sums are exact.
std::vector<ClassCounts> partition_dirichlet(const PartitionSpec& spec);

/// Per-client-per-class independent Pareto(x_m, beta) weights, rounded by
/// largest remainder so each class total is hit exactly.
std::vector<ClassCounts> partition_pareto(const PartitionSpec& spec);

std::vector<ClassCounts> make_partition(const PartitionSpec& spec);

/// Splits `total` into integer counts proportional to non-negative weights
/// (largest-remainder rounding; ties to the lower index). Counts sum to
/// `total` exactly.
std::vector<std::int64_t> proportional_counts(std::span<const double> weights,
                                              std::int64_t total);

/// (client_id,class_id,count) rows, zero counts skipped.
void write_partition_csv(const std::filesystem::path& path,
                         const std::vector<ClassCounts>& counts);

/// Analytic per-class robustness curves L_j(r) on a shared grid. Expected
/// certified accuracy for any class mix is an exact linear combination, which
/// is what makes noise-free ground truth possible.
class OracleModel {
public:
    explicit OracleModel(std::vector<CertifiedCurve> per_class_curves);

    // L_j(r) = a_j * exp(-r / s_j), clamped to [0,1], with per-class (a_j, s_j)
    // drawn uniformly from the given ranges.
    static OracleModel sample(const RadiusGrid& grid, std::size_t num_classes,
                              double accuracy_min, double accuracy_max, double scale_min,
                              double scale_max, std::uint64_t seed);

    std::size_t num_classes() const { return curves_.size(); }
    const RadiusGrid& grid() const { return curves_.front().grid(); }
    const CertifiedCurve& class_curve(std::size_t j) const { return curves_[j]; }

private:
    std::vector<CertifiedCurve> curves_;
};

/// One realized test sample: its class and the largest radius at which it is
/// certifiably robust. robust_radius = -1 marks a sample that is never
/// counted, even at radius 0.
struct SampleRecord {
    int class_label;
    double robust_radius;
};
inline constexpr double kNeverRobust = -1.0;

/// Exact expected curve for a class mix: sum_j p_j L_j(r).
CertifiedCurve ground_truth_curve(const OracleModel& oracle, const LabelDistribution& dist);

/// Empirical fraction of samples with robust_radius >= r at each grid radius.
CertifiedCurve empirical_curve(const RadiusGrid& grid, std::span<const SampleRecord> samples);

struct RealizedClient {
    std::vector<SampleRecord> samples;
    ClientRecord record;
};

/// Draws each sample's robust radius by inverse transform from the survival
/// function L_j (so P(robust_radius >= r) = L_j(r) exactly on the grid) and
/// packages the empirical curve plus normalized class counts. The stream is
/// derive(seed, id), so clients can be realized in any order.
RealizedClient realize_client(const OracleModel& oracle, const ClassCounts& class_counts,
                              ClientId id, std::uint64_t seed);

/// Realizes client i with id i for every row of the partition. Rows whose
/// counts are all zero are skipped: an empty client has no distribution and
/// nothing to certify. Ids still index the original partition rows.
std::vector<RealizedClient> realize_population(const OracleModel& oracle,
                                               const std::vector<ClassCounts>& partition,
                                               std::uint64_t seed,
                                               par::Exec exec = par::Exec::parallel);

}  // namespace certagg::synth
