#pragma once

#include "ridepool/core.hpp"
#include "ridepool/costs.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/network.hpp"
#include "ridepool/routing.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace ridepool {

enum class VehicleClass { Idle, Rebalancing, Active };

// What graph construction needs to know about one vehicle at decision time.
// A vehicle mid-edge is represented by the edge's head node together with
// the time it gets there; new schedules depart from the head.
struct VehicleSnapshot {
    VehicleId id = -1;
    int capacity = 0;
    NodeId node = kInvalidNode;
    Seconds available_time = 0;  // >= now; time the vehicle can leave `node`
    VehicleClass cls = VehicleClass::Idle;
    // Requests any new schedule must keep serving: onboard passengers plus,
    // without reassignment, matched-but-not-picked-up requests.
    std::vector<RoutingRequestSpec> committed;
    Schedule committed_schedule;           // active vehicles
    NodeId rebalance_target = kInvalidNode;  // rebalancing vehicles
    // Matched-but-unpicked requests this vehicle's keep edge still covers
    // when reassignment re-enters them into the outstanding pool.
    std::vector<RequestId> reassignable;

    int onboard_count() const {
        int n = 0;
        for (const auto& r : committed)
            if (r.onboard) ++n;
        return n;
    }
};

struct EpochParams {
    int capacity = 4;
    Seconds max_wait = 420;    // Omega
    Seconds max_delay = 900;   // Delta
    Seconds horizon = 600;     // H
    int max_trips_per_size = 10000;
    bool include_zone_edges = true;
};

// Feasibility of adding `trip` to the vehicle's committed work, and the
// resulting optimal schedule. Infeasible is a normal outcome.
inline std::optional<Schedule> insertion_feasible(const VehicleSnapshot& vehicle,
                                                  const std::vector<Request>& trip,
                                                  const EpochParams& params,
                                                  const ShortestPathTables& tables) {
    RoutingInstance inst;
    inst.depot = vehicle.node;
    inst.start_time = vehicle.available_time;
    inst.capacity = vehicle.capacity;
    inst.max_wait = params.max_wait;
    inst.max_delay = params.max_delay;
    inst.requests = vehicle.committed;
    for (const auto& r : trip)
        inst.requests.push_back(
            {r.id, r.origin, r.destination, r.arrival_time, r.direct_time, false, 0});
    return solve_darp(inst, tables);
}

// Pairwise request shareability graph over the outstanding requests.
class PRSGraph {
public:
    explicit PRSGraph(std::vector<RequestId> vertices) : vertices_(std::move(vertices)) {}

    void add_edge(RequestId a, RequestId b) {
        if (a == b) return;
        edges_.insert(normalize(a, b));
    }
    bool adjacent(RequestId a, RequestId b) const { return edges_.count(normalize(a, b)) > 0; }
    const std::vector<RequestId>& vertices() const { return vertices_; }
    size_t edge_count() const { return edges_.size(); }

private:
    static std::pair<RequestId, RequestId> normalize(RequestId a, RequestId b) {
        return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    }
    std::vector<RequestId> vertices_;
    std::set<std::pair<RequestId, RequestId>> edges_;
};

inline PRSGraph build_prs_graph(const std::vector<Request>& outstanding, Seconds now,
                                const EpochParams& params, const ShortestPathTables& tables) {
    std::vector<RequestId> ids;
    for (const auto& r : outstanding) ids.push_back(r.id);
    PRSGraph prs(std::move(ids));
    for (size_t i = 0; i < outstanding.size(); ++i)
        for (size_t j = i + 1; j < outstanding.size(); ++j)
            if (pairwise_shareable(outstanding[i], outstanding[j], now, params.capacity,
                                   params.max_wait, params.max_delay, tables))
                prs.add_edge(outstanding[i].id, outstanding[j].id);
    return prs;
}

struct Trip {
    TripId id = -1;
    std::vector<RequestId> requests;  // sorted
    int size() const { return static_cast<int>(requests.size()); }
};

// Trips plus every feasible (vehicle, trip) schedule discovered while
// enumerating them; graph construction reuses these rather than re-solving.
struct TripCatalog {
    std::vector<Trip> trips;
    std::map<std::pair<VehicleId, TripId>, Schedule> feasible;
};

// Grows trips incrementally: a size-k candidate is a retained (k-1)-trip
// plus one PRS-adjacent request, kept only when all its (k-1)-subsets were
// retained and at least one vehicle can serve it. Requests restricted to a
// vehicle (reassignment mode) only pair with that vehicle.
inline TripCatalog enumerate_trips(const PRSGraph& prs, const std::vector<Request>& outstanding,
                                   const std::vector<VehicleSnapshot>& fleet,
                                   const EpochParams& params, const ShortestPathTables& tables,
                                   const std::map<RequestId, VehicleId>& restricted_to = {}) {
    TripCatalog catalog;
    std::map<RequestId, const Request*> by_id;
    for (const auto& r : outstanding) by_id[r.id] = &r;

    auto eligible = [&](const std::vector<RequestId>& reqs, const VehicleSnapshot& v) {
        for (RequestId r : reqs) {
            auto it = restricted_to.find(r);
            if (it != restricted_to.end() && it->second != v.id) return false;
        }
        return true;
    };

    std::set<std::vector<RequestId>> retained;
    std::vector<std::vector<RequestId>> prev_level;

    auto try_retain = [&](const std::vector<RequestId>& reqs) {
        std::vector<Request> members;
        for (RequestId r : reqs) members.push_back(*by_id.at(r));
        bool any = false;
        TripId tid = static_cast<TripId>(catalog.trips.size());
        for (const auto& v : fleet) {
            if (!eligible(reqs, v)) continue;
            auto schedule = insertion_feasible(v, members, params, tables);
            if (schedule) {
                catalog.feasible[{v.id, tid}] = std::move(*schedule);
                any = true;
            }
        }
        if (any) {
            catalog.trips.push_back(Trip{tid, reqs});
            retained.insert(reqs);
            prev_level.push_back(reqs);
        } else {
            // Drop any cached schedules written under the provisional id.
            for (const auto& v : fleet) catalog.feasible.erase({v.id, tid});
        }
        return any;
    };

    // Size 1.
    int kept = 0;
    for (const auto& r : outstanding) {
        if (kept >= params.max_trips_per_size) break;
        if (try_retain({r.id})) ++kept;
    }

    // Sizes 2..capacity.
    for (int size = 2; size <= params.capacity; ++size) {
        std::set<std::vector<RequestId>> candidates;
        for (const auto& base : prev_level) {
            if (static_cast<int>(base.size()) != size - 1) continue;
            for (const auto& r : outstanding) {
                if (r.id <= base.back()) continue;
                bool clique = true;
                for (RequestId m : base)
                    if (!prs.adjacent(m, r.id)) {
                        clique = false;
                        break;
                    }
                if (!clique) continue;
                std::vector<RequestId> cand = base;
                cand.push_back(r.id);
                candidates.insert(cand);
            }
        }
        std::vector<std::vector<RequestId>> level(candidates.begin(), candidates.end());
        prev_level.clear();
        kept = 0;
        for (const auto& cand : level) {
            if (kept >= params.max_trips_per_size) break;
            bool subsets_ok = true;
            for (size_t drop = 0; drop < cand.size() && subsets_ok; ++drop) {
                std::vector<RequestId> sub;
                for (size_t i = 0; i < cand.size(); ++i)
                    if (i != drop) sub.push_back(cand[i]);
                subsets_ok = retained.count(sub) > 0;
            }
            if (!subsets_ok) continue;
            if (try_retain(cand)) ++kept;
        }
        if (prev_level.empty()) break;
    }
    return catalog;
}

enum class EdgeKind { Trip, Zone, Keep, Dummy };

struct RtvzEdge {
    int id = -1;
    VehicleId vehicle = -1;  // -1 for dummy edges
    EdgeKind kind = EdgeKind::Keep;
    TripId trip = -1;
    ZoneId zone = -1;       // zone edges; for keep/self edges, the stay zone
    RequestId request = -1; // dummy edges
    Meters u = 0.0;
    SupplyVector y;
    Schedule schedule;  // trip edges: the new schedule; keep edges (active): current
    std::vector<RequestId> covers;  // outstanding requests this edge serves
    int trip_size = 0;
    bool vehicle_was_idle_or_rebalancing = false;
    bool noop = false;  // stay idle / continue rebalance / keep schedule

    bool is_trip() const { return kind == EdgeKind::Trip; }
    bool is_zone() const { return kind == EdgeKind::Zone; }
    bool is_keep() const { return kind == EdgeKind::Keep; }
    bool is_dummy() const { return kind == EdgeKind::Dummy; }
    bool is_noop() const { return noop; }
};

// The per-epoch decision graph: every vehicle's feasible trip insertions,
// idle vehicles' zone repositioning options, one no-op edge per vehicle
// (stay idle / continue rebalancing / keep schedule) and one dummy edge per
// outstanding request. Each edge carries its additional VMT u and its
// supply contribution vector Y.
class RTVZGraph {
public:
    std::vector<VehicleSnapshot> vehicles;
    std::vector<Trip> trips;
    std::vector<RequestId> outstanding;  // sorted request ids
    std::vector<RtvzEdge> edge_list;
    Seconds decision_time = 0;
    Seconds horizon = 0;

    const std::vector<RtvzEdge>& edges() const { return edge_list; }

    std::vector<int> edges_of_vehicle(VehicleId v) const {
        std::vector<int> out;
        for (const auto& e : edge_list)
            if (e.vehicle == v) out.push_back(e.id);
        return out;
    }

    void dump(std::ostream& os) const;
};

namespace detail {

inline Meters remaining_schedule_vmt(NodeId node, const Schedule& schedule,
                                     const ShortestPathTables& tables) {
    Meters vmt = 0.0;
    NodeId cur = node;
    for (const auto& stop : schedule.stops) {
        vmt += tables.distance(cur, stop.node);
        cur = stop.node;
    }
    return vmt;
}

// Lead slice for a vehicle still finishing its current edge: the seconds
// until it reaches the head node, attributed to the head's zone.
inline void prepend_lead(std::vector<SupplySegment>& segs, const VehicleSnapshot& v, Seconds now,
                         const ZoneSet& zones) {
    if (v.available_time > now)
        segs.insert(segs.begin(), SupplySegment{zones.zone_of(v.node), v.available_time - now,
                                                v.capacity - v.onboard_count()});
}

inline SupplyVector edge_supply_for_schedule(const VehicleSnapshot& v, const Schedule& schedule,
                                             Seconds now, const ZoneSet& zones,
                                             const ShortestPathTables& tables, Seconds horizon) {
    std::vector<SupplySegment> segs = trace_schedule(v.node, v.available_time, schedule,
                                                     v.capacity, v.onboard_count(), zones, tables);
    prepend_lead(segs, v, now, zones);
    NodeId final_node = schedule.stops.empty() ? v.node : schedule.stops.back().node;
    return supply_contribution(segs, zones.zone_of(final_node), v.capacity, horizon);
}

}  // namespace detail

inline RTVZGraph build_rtvz_graph(const TripCatalog& catalog,
                                  const std::vector<VehicleSnapshot>& fleet,
                                  const std::vector<Request>& outstanding, const ZoneSet& zones,
                                  const ShortestPathTables& tables, Seconds now,
                                  const EpochParams& params) {
    RTVZGraph g;
    g.vehicles = fleet;
    g.trips = catalog.trips;
    g.decision_time = now;
    g.horizon = params.horizon;
    for (const auto& r : outstanding) g.outstanding.push_back(r.id);

    auto add_edge = [&g](RtvzEdge e) {
        e.id = static_cast<int>(g.edge_list.size());
        g.edge_list.push_back(std::move(e));
    };

    for (const auto& v : g.vehicles) {
        bool idle_or_reb = v.cls != VehicleClass::Active;

        // No-op edge: stay idle, continue the current rebalance, or keep the
        // committed schedule. Always u = 0.
        {
            RtvzEdge e;
            e.vehicle = v.id;
            e.u = 0.0;
            e.trip_size = 0;
            e.noop = true;
            e.vehicle_was_idle_or_rebalancing = idle_or_reb;
            if (v.cls == VehicleClass::Idle) {
                ZoneId own = zones.zone_of(v.node);
                e.kind = params.include_zone_edges ? EdgeKind::Zone : EdgeKind::Keep;
                e.zone = own;
                e.y.add(own, static_cast<double>(v.capacity));
            } else if (v.cls == VehicleClass::Rebalancing) {
                e.kind = EdgeKind::Keep;
                e.zone = zones.zone_of(v.rebalance_target);
                std::vector<SupplySegment> segs =
                    trace_path(tables.path_between(v.node, v.rebalance_target), v.capacity,
                               zones, tables);
                detail::prepend_lead(segs, v, now, zones);
                e.y = supply_contribution(segs, zones.zone_of(v.rebalance_target), v.capacity,
                                          params.horizon);
            } else {
                e.kind = EdgeKind::Keep;
                e.schedule = v.committed_schedule;
                e.zone = zones.zone_of(v.committed_schedule.stops.empty()
                                           ? v.node
                                           : v.committed_schedule.stops.back().node);
                e.y = detail::edge_supply_for_schedule(v, v.committed_schedule, now, zones,
                                                       tables, params.horizon);
                e.covers = v.reassignable;
            }
            add_edge(std::move(e));
        }

        // Trip insertion edges.
        for (const auto& trip : g.trips) {
            auto it = catalog.feasible.find({v.id, trip.id});
            if (it == catalog.feasible.end()) continue;
            const Schedule& schedule = it->second;
            RtvzEdge e;
            e.vehicle = v.id;
            e.kind = EdgeKind::Trip;
            e.trip = trip.id;
            e.trip_size = trip.size();
            e.vehicle_was_idle_or_rebalancing = idle_or_reb;
            e.schedule = schedule;
            if (v.cls == VehicleClass::Active)
                e.u = schedule.total_vmt -
                      detail::remaining_schedule_vmt(v.node, v.committed_schedule, tables);
            else
                e.u = schedule.total_vmt;
            e.y = detail::edge_supply_for_schedule(v, schedule, now, zones, tables,
                                                   params.horizon);
            e.covers = trip.requests;
            add_edge(std::move(e));
        }

        // Zone repositioning edges for idle vehicles (other zones; the own
        // zone is the self edge above).
        if (v.cls == VehicleClass::Idle && params.include_zone_edges) {
            ZoneId own = zones.zone_of(v.node);
            for (const auto& z : zones.zones()) {
                if (z.id == own) continue;
                if (!tables.reachable(v.node, z.centroid_node)) continue;
                RtvzEdge e;
                e.vehicle = v.id;
                e.kind = EdgeKind::Zone;
                e.zone = z.id;
                e.vehicle_was_idle_or_rebalancing = true;
                e.u = tables.distance(v.node, z.centroid_node);
                std::vector<SupplySegment> segs = trace_path(
                    tables.path_between(v.node, z.centroid_node), v.capacity, zones, tables);
                e.y = supply_contribution(segs, z.id, v.capacity, params.horizon);
                add_edge(std::move(e));
            }
        }
    }

    // Dummy edges: one per outstanding request.
    for (const auto& r : outstanding) {
        RtvzEdge e;
        e.kind = EdgeKind::Dummy;
        e.request = r.id;
        e.covers = {r.id};
        add_edge(std::move(e));
    }
    return g;
}

inline void RTVZGraph::dump(std::ostream& os) const {
    os << "rtvz-graph t=" << decision_time << " H=" << horizon << "\n";
    os << "vehicles " << vehicles.size() << "\n";
    for (const auto& v : vehicles) {
        const char* cls = v.cls == VehicleClass::Idle
                              ? "idle"
                              : (v.cls == VehicleClass::Rebalancing ? "rebalancing" : "active");
        os << "  v" << v.id << " node=" << v.node << " class=" << cls
           << " onboard=" << v.onboard_count() << " committed=" << v.committed.size() << "\n";
    }
    os << "trips " << trips.size() << "\n";
    for (const auto& t : trips) {
        os << "  T" << t.id << " {";
        for (size_t i = 0; i < t.requests.size(); ++i)
            os << (i ? "," : "") << t.requests[i];
        os << "}\n";
    }
    os << "requests " << outstanding.size() << "\n";
    os << "edges " << edge_list.size() << "\n";
    for (const auto& e : edge_list) {
        os << "  e" << e.id;
        switch (e.kind) {
            case EdgeKind::Trip:
                os << " v" << e.vehicle << " -> T" << e.trip;
                break;
            case EdgeKind::Zone:
                os << " v" << e.vehicle << " -> Z" << e.zone;
                break;
            case EdgeKind::Keep:
                os << " v" << e.vehicle << " -> keep";
                break;
            case EdgeKind::Dummy:
                os << " L -> r" << e.request;
                break;
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", e.u / 1000.0);
        os << " u_km=" << buf << " y={";
        bool first = true;
        for (const auto& [z, val] : e.y.y) {
            std::snprintf(buf, sizeof(buf), "%.6f", val);
            os << (first ? "" : " ") << z << ":" << buf;
            first = false;
        }
        os << "}\n";
    }
}

}  // namespace ridepool
