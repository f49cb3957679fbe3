#include "certagg/grouping.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace certagg::grouping {

void GroupingConfig::validate() const {
    if (tau < 1) throw std::invalid_argument("GroupingConfig: tau must be >= 1");
}

ClientRecord virtualize(std::span<const ClientRecord> members, ClientId id) {
    if (members.empty()) throw std::invalid_argument("virtualize: no members");
    if (members.size() == 1) {
        ClientRecord r = members.front();
        r.id = id;
        return r;
    }
    std::int64_t n_v = 0;
    for (const auto& m : members) n_v += m.n;
    std::vector<double> weights(members.size());
    std::vector<LabelDistribution> dists;
    std::vector<CertifiedCurve> curves;
    dists.reserve(members.size());
    curves.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        weights[i] = static_cast<double>(members[i].n) / static_cast<double>(n_v);
        dists.push_back(members[i].dist);
        curves.push_back(members[i].curve);
    }
    return ClientRecord(id, n_v, mix_distributions(SimplexWeights(weights), dists),
                        combine_curves(weights, curves));
}

std::vector<ClientGroup> group_clients(const std::vector<ClientRecord>& clients,
                                       const GroupingConfig& config) {
    if (clients.empty()) throw std::invalid_argument("group_clients: empty client list");
    config.validate();

    std::vector<const ClientRecord*> large;
    std::vector<const ClientRecord*> small;
    for (const auto& c : clients) {
        (c.n >= config.tau ? large : small).push_back(&c);
    }
    std::sort(small.begin(), small.end(), [](const ClientRecord* a, const ClientRecord* b) {
        if (a->n != b->n) return a->n < b->n;
        return a->id < b->id;
    });

    std::vector<std::vector<ClientRecord>> member_sets;
    for (const auto* c : large) member_sets.push_back({*c});

    std::deque<const ClientRecord*> queue(small.begin(), small.end());
    std::vector<std::vector<ClientRecord>> virtual_sets;
    while (!queue.empty()) {
        std::vector<ClientRecord> group;
        std::int64_t n_v = 0;
        while (n_v < config.tau && !queue.empty()) {
            group.push_back(*queue.front());
            n_v += queue.front()->n;
            queue.pop_front();
        }
        virtual_sets.push_back(std::move(group));
    }
    if (config.merge_trailing && virtual_sets.size() >= 2) {
        auto& last = virtual_sets.back();
        std::int64_t n_last = 0;
        for (const auto& m : last) n_last += m.n;
        if (n_last < config.tau) {
            auto& prev = virtual_sets[virtual_sets.size() - 2];
            prev.insert(prev.end(), last.begin(), last.end());
            virtual_sets.pop_back();
        }
    }
    for (auto& vs : virtual_sets) member_sets.push_back(std::move(vs));

    std::vector<ClientGroup> groups;
    groups.reserve(member_sets.size());
    for (std::size_t g = 0; g < member_sets.size(); ++g) {
        ClientRecord vr = virtualize(member_sets[g], static_cast<ClientId>(g));
        groups.push_back(ClientGroup{std::move(member_sets[g]), std::move(vr)});
    }
    return groups;
}

void write_grouping_csv(const std::filesystem::path& path,
                        const std::vector<ClientGroup>& groups) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_grouping_csv: cannot open " + path.string());
    out << "group_id,member_client_id,n,n_V\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (const auto& m : groups[g].members) {
            out << g << ',' << m.id << ',' << m.n << ',' << groups[g].virtual_record.n << '\n';
        }
    }
}

}  // namespace certagg::grouping
