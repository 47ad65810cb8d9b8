#pragma once

#include "ridepool/core.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/network.hpp"
#include "ridepool/routing.hpp"

#include <map>
#include <string>
#include <vector>

namespace ridepool {

// Per-zone supply a route contributes over the rebalancing horizon,
// measured in seats (seat-seconds divided by the horizon).
struct SupplyVector {
    std::map<ZoneId, double> y;

    double of(ZoneId z) const {
        auto it = y.find(z);
        return it == y.end() ? 0.0 : it->second;
    }
    void add(ZoneId z, double v) {
        if (v != 0.0) y[z] += v;
    }
    double total() const {
        double s = 0.0;
        for (const auto& [z, v] : y) s += v;
        return s;
    }
};

// One homogeneous slice of a route: the vehicle spends `duration` seconds
// attributed to `zone` with `available` free seats.
struct SupplySegment {
    ZoneId zone = -1;
    Seconds duration = 0;
    int available = 0;
};

// Chronological slices of a committed schedule, walked edge by edge along
// the driven paths. Each edge's travel time accrues to the zone of the
// edge's destination node; waiting at a stop accrues to the stop's zone at
// the pre-stop availability.
inline std::vector<SupplySegment> trace_schedule(NodeId start_node, Seconds start_time,
                                                 const Schedule& schedule, int capacity,
                                                 int initial_onboard, const ZoneSet& zones,
                                                 const ShortestPathTables& tables) {
    std::vector<SupplySegment> segs;
    NodeId node = start_node;
    Seconds time = start_time;
    int onboard = initial_onboard;
    for (const auto& stop : schedule.stops) {
        std::vector<NodeId> path = tables.path_between(node, stop.node);
        for (size_t h = 1; h < path.size(); ++h) {
            Seconds hop = tables.time(path[h - 1], path[h]);
            segs.push_back({zones.zone_of(path[h]), hop, capacity - onboard});
            time += hop;
        }
        if (stop.planned_time > time) {
            segs.push_back({zones.zone_of(stop.node), stop.planned_time - time,
                            capacity - onboard});
            time = stop.planned_time;
        }
        onboard += stop.kind == StopKind::Pickup ? 1 : -1;
        node = stop.node;
    }
    return segs;
}

// Slices of a bare repositioning drive (no passengers).
inline std::vector<SupplySegment> trace_path(const std::vector<NodeId>& path, int capacity,
                                             const ZoneSet& zones,
                                             const ShortestPathTables& tables) {
    std::vector<SupplySegment> segs;
    for (size_t h = 1; h < path.size(); ++h)
        segs.push_back({zones.zone_of(path[h]), tables.time(path[h - 1], path[h]), capacity});
    return segs;
}

// Weighted time-share supply contribution: y^z = sum_o o * t_o^z / H.
// Routes longer than the horizon are truncated at it; shorter routes park
// the vehicle at the final stop for the remainder, at the post-route
// availability.
inline SupplyVector supply_contribution(const std::vector<SupplySegment>& segments,
                                        ZoneId final_zone, int final_available,
                                        Seconds horizon) {
    if (horizon <= 0) throw ParamViolationError("horizon must be positive");
    SupplyVector out;
    Seconds remaining = horizon;
    for (const auto& seg : segments) {
        if (remaining <= 0) break;
        Seconds used = std::min(seg.duration, remaining);
        out.add(seg.zone, static_cast<double>(seg.available) * static_cast<double>(used) /
                              static_cast<double>(horizon));
        remaining -= used;
    }
    if (remaining > 0)
        out.add(final_zone, static_cast<double>(final_available) *
                                static_cast<double>(remaining) / static_cast<double>(horizon));
    return out;
}

struct CostParams {
    std::map<ZoneId, double> alpha;  // per-zone deviation weight
    double beta = 0.0;               // rejected-request penalty
    double gamma = 1.0;              // single-rider trip multiplier
    Seconds horizon = 600;           // H

    double alpha_of(ZoneId z) const {
        auto it = alpha.find(z);
        return it == alpha.end() ? 0.0 : it->second;
    }
    double alpha_sum() const {
        double s = 0.0;
        for (const auto& [z, a] : alpha) s += a;
        return s;
    }
    void validate() const {
        for (const auto& [z, a] : alpha)
            if (a < 0.0) throw ParamViolationError("alpha must be non-negative");
        if (gamma < 1.0) throw ParamViolationError("gamma must be at least 1");
        if (beta <= alpha_sum())
            throw ParamViolationError("beta must exceed the sum of zone weights");
    }
};

// Linear objective over the decision graph. Edge costs are in kilometers;
// the deviation term contributes alpha_z * |phi_z - sum y x| per listed
// zone via a pair of non-negative deviation variables.
struct ObjectiveSpec {
    struct ZoneTerm {
        ZoneId zone;
        double alpha;
        double phi;
    };
    std::vector<double> edge_cost;  // indexed by edge id
    std::vector<ZoneTerm> zone_terms;
    double beta = 0.0;
};

// Builds Eq. 5 / Eq. 8 coefficients from a built decision graph. The graph
// type provides edges() with: id, u (meters), kind queries, trip size and
// the owning vehicle's idleness; see graphs.hpp. Singleton-trip edges from
// idle or rebalancing vehicles carry gamma times their VMT cost; everything
// else carries plain VMT, dummies carry beta. Zone deviation terms are
// emitted only for the zones passed in `deviation_zones`.
template <typename GraphT>
ObjectiveSpec assemble_objective(const GraphT& graph, const TargetSupply& phi,
                                 const CostParams& params,
                                 const std::vector<ZoneId>& deviation_zones) {
    params.validate();
    ObjectiveSpec spec;
    spec.beta = params.beta;
    spec.edge_cost.resize(graph.edges().size(), 0.0);
    for (const auto& e : graph.edges()) {
        double cost;
        if (e.is_dummy()) {
            cost = params.beta;
        } else {
            double u_km = e.u / 1000.0;
            bool penalized = e.is_trip() && e.trip_size == 1 && e.vehicle_was_idle_or_rebalancing;
            cost = penalized ? params.gamma * u_km : u_km;
        }
        spec.edge_cost[e.id] = cost;
    }
    for (ZoneId z : deviation_zones)
        spec.zone_terms.push_back({z, params.alpha_of(z), phi.of(z)});
    return spec;
}

}  // namespace ridepool
