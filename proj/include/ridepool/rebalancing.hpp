#pragma once

#include "ridepool/core.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/graphs.hpp"
#include "ridepool/network.hpp"
#include "ridepool/rng.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace ridepool {

struct RebalanceDirective {
    VehicleId vehicle = -1;
    ZoneId zone = -1;
    NodeId target_node = kInvalidNode;  // zone centroid
    std::vector<NodeId> path;
    Seconds expected_arrival = 0;
};

struct RebalancePlan {
    std::vector<RebalanceDirective> directives;  // one per redirected vehicle
    std::map<ZoneId, double> deficit_before;
    std::map<ZoneId, double> deficit_after;  // reduced by capacity per arrival, floored at 0
};

// Benchmark sequential rebalancer: every idle vehicle samples a target zone
// with probability proportional to the zone supply deficits, then sampled
// targets are matched to vehicles greedily by nearest-first travel time.
// Vehicles stay put when no zone has a deficit or when their target is the
// zone they are already in.
inline RebalancePlan probabilistic_rebalance(const std::vector<VehicleSnapshot>& idle,
                                             const TargetSupply& phi,
                                             const std::map<ZoneId, double>& current_supply,
                                             const ZoneSet& zones,
                                             const ShortestPathTables& tables,
                                             uint64_t rng_seed) {
    RebalancePlan plan;
    std::vector<double> deficits(zones.zone_count(), 0.0);
    double total_deficit = 0.0;
    for (const auto& z : zones.zones()) {
        auto it = current_supply.find(z.id);
        double supply = it == current_supply.end() ? 0.0 : it->second;
        double d = std::max(phi.of(z.id) - supply, 0.0);
        deficits[z.id] = d;
        plan.deficit_before[z.id] = d;
        total_deficit += d;
    }
    plan.deficit_after = plan.deficit_before;
    if (total_deficit <= 0.0 || idle.empty()) return plan;

    std::vector<VehicleSnapshot> vehicles = idle;
    std::sort(vehicles.begin(), vehicles.end(),
              [](const VehicleSnapshot& a, const VehicleSnapshot& b) { return a.id < b.id; });

    Rng rng(rng_seed);
    std::map<ZoneId, int> wanted;  // sampled target multiset, grouped by zone
    for (size_t i = 0; i < vehicles.size(); ++i)
        wanted[static_cast<ZoneId>(rng.weighted_index(deficits))] += 1;

    // Greedy nearest-first matching between vehicles and sampled targets.
    // Targets within a zone are interchangeable, so one (vehicle, zone)
    // candidate list sorted by travel time realizes it.
    struct Cand {
        Seconds t;
        int vi;
        ZoneId zone;
    };
    std::vector<Cand> cands;
    for (size_t vi = 0; vi < vehicles.size(); ++vi)
        for (const auto& [z, cnt] : wanted) {
            NodeId centroid = zones.zone(z).centroid_node;
            if (!tables.reachable(vehicles[vi].node, centroid)) continue;
            cands.push_back({tables.time(vehicles[vi].node, centroid),
                             static_cast<int>(vi), z});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.vi != b.vi) return a.vi < b.vi;
        return a.zone < b.zone;
    });
    std::vector<bool> v_used(vehicles.size(), false);
    for (const Cand& c : cands) {
        if (v_used[c.vi] || wanted[c.zone] <= 0) continue;
        v_used[c.vi] = true;
        wanted[c.zone] -= 1;
        const VehicleSnapshot& v = vehicles[c.vi];
        if (zones.zone_of(v.node) == c.zone) continue;  // already there: stay
        RebalanceDirective d;
        d.vehicle = v.id;
        d.zone = c.zone;
        d.target_node = zones.zone(c.zone).centroid_node;
        d.path = tables.path_between(v.node, d.target_node);
        d.expected_arrival = v.available_time + tables.time(v.node, d.target_node);
        plan.deficit_after[c.zone] = std::max(
            plan.deficit_after[c.zone] - static_cast<double>(v.capacity), 0.0);
        plan.directives.push_back(d);
    }
    std::sort(plan.directives.begin(), plan.directives.end(),
              [](const RebalanceDirective& a, const RebalanceDirective& b) {
                  return a.vehicle < b.vehicle;
              });
    return plan;
}

}  // namespace ridepool
