#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "certagg/core.hpp"

namespace certagg::grouping {

struct GroupingConfig {
    std::int64_t tau = 50;        // minimum reliable test-set size
    bool merge_trailing = false;  // fold an under-threshold final group backward

    void validate() const;
};

/// A singleton group (one large client) or a virtual client merged from
/// several small ones. The virtual record carries the summed volume, the
/// volume-weighted distribution and the volume-weighted curve.
struct ClientGroup {
    std::vector<ClientRecord> members;
    ClientRecord virtual_record;
};

/// Volume-weighted merge of client records; a single member is returned
/// unchanged apart from the id.
ClientRecord virtualize(std::span<const ClientRecord> members, ClientId id);

/// Splits clients at tau: those with n >= tau stay singleton groups (input
/// order), the rest are sorted ascending by (n, id) and greedily packed into
/// virtual clients until each reaches tau or the queue empties. The final
/// virtual group may stay under tau unless merge_trailing folds it into its
/// predecessor. Group record ids are positions in the returned list.
std::vector<ClientGroup> group_clients(const std::vector<ClientRecord>& clients,
                                       const GroupingConfig& config);

/// (group_id,member_client_id,n,n_V) rows.
void write_grouping_csv(const std::filesystem::path& path,
                        const std::vector<ClientGroup>& groups);

}  // namespace certagg::grouping
