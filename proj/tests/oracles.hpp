#pragma once

#include "ridepool/assignment.hpp"
#include "ridepool/graphs.hpp"
#include "ridepool/network.hpp"
#include "ridepool/routing.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

// Independent reference implementations used to pin expected values. They
// deliberately share no code with the engine paths they check.
namespace oracles {

using namespace ridepool;

// Single-source lexicographic (time, distance) shortest paths by plain
// Dijkstra over an adjacency list.
struct SsspResult {
    std::vector<Seconds> time;
    std::vector<double> dist;
};

inline SsspResult dijkstra(const RoadNetwork& net, NodeId source) {
    const int n = net.node_count();
    SsspResult res;
    res.time.assign(n, kInfTime);
    res.dist.assign(n, std::numeric_limits<double>::infinity());
    std::vector<bool> done(n, false);
    res.time[source] = 0;
    res.dist[source] = 0.0;
    for (int iter = 0; iter < n; ++iter) {
        int best = -1;
        for (int i = 0; i < n; ++i) {
            if (done[i] || res.time[i] >= kInfTime) continue;
            if (best < 0 || res.time[i] < res.time[best] ||
                (res.time[i] == res.time[best] && res.dist[i] < res.dist[best]))
                best = i;
        }
        if (best < 0) break;
        done[best] = true;
        for (int e : net.out_edges(best)) {
            const NetEdge& edge = net.edges()[e];
            Seconds t = res.time[best] + edge.travel_time;
            double d = res.dist[best] + edge.length;
            if (t < res.time[edge.to] || (t == res.time[edge.to] && d < res.dist[edge.to])) {
                res.time[edge.to] = t;
                res.dist[edge.to] = d;
            }
        }
    }
    return res;
}

// Unpruned permutation oracle for the single-vehicle routing problem:
// enumerates every precedence-valid stop ordering, simulates it naively and
// keeps the best (vmt, completion) with the engine's tie-break.
struct DarpOracleResult {
    bool feasible = false;
    double vmt = 0.0;
    Seconds completion = 0;
};

inline DarpOracleResult darp_oracle(const RoutingInstance& inst,
                                    const ShortestPathTables& tables) {
    struct OStop {
        NodeId node;
        bool pickup;
        int req;
    };
    std::vector<OStop> stops;
    std::vector<int> order;  // request-id order mirrors the engine's indexing
    for (size_t i = 0; i < inst.requests.size(); ++i) order.push_back(static_cast<int>(i));
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return inst.requests[a].id < inst.requests[b].id; });
    for (int ri : order) {
        const auto& r = inst.requests[ri];
        if (!r.onboard) stops.push_back({r.pickup_node, true, ri});
        stops.push_back({r.dropoff_node, false, ri});
    }

    DarpOracleResult best;
    std::vector<int> perm(stops.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::sort(perm.begin(), perm.end());
    do {
        // Precedence: each pickup before its dropoff.
        std::map<int, int> seen_pickup;
        bool ok = true;
        for (int idx : perm) {
            const OStop& s = stops[idx];
            if (s.pickup) seen_pickup[s.req] = 1;
            else if (!inst.requests[s.req].onboard && !seen_pickup.count(s.req)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;

        // Naive simulation.
        NodeId node = inst.depot;
        Seconds time = inst.start_time;
        double vmt = 0.0;
        int onboard = 0;
        for (const auto& r : inst.requests)
            if (r.onboard) ++onboard;
        std::map<int, Seconds> picked_at;
        for (const auto& r : inst.requests)
            if (r.onboard) picked_at[static_cast<int>(&r - inst.requests.data())] =
                r.actual_pickup;
        bool first = true;
        for (int idx : perm) {
            const OStop& s = stops[idx];
            Seconds leg_t;
            double leg_d;
            if (first && inst.virtual_depot) {
                leg_t = 0;
                leg_d = 0.0;
            } else {
                if (!tables.reachable(node, s.node)) {
                    ok = false;
                    break;
                }
                leg_t = tables.time(node, s.node);
                leg_d = tables.distance(node, s.node);
            }
            first = false;
            time += leg_t;
            vmt += leg_d;
            const RoutingRequestSpec& req = inst.requests[s.req];
            if (s.pickup) {
                if (time < req.arrival_time) time = req.arrival_time;
                if (time > req.arrival_time + inst.max_wait) {
                    ok = false;
                    break;
                }
                picked_at[s.req] = time;
                ++onboard;
                if (onboard > inst.capacity) {
                    ok = false;
                    break;
                }
            } else {
                if (time > picked_at.at(s.req) + req.direct_time + inst.max_delay) {
                    ok = false;
                    break;
                }
                --onboard;
            }
            node = s.node;
        }
        if (!ok) continue;
        if (!best.feasible || vmt < best.vmt - 1e-9 ||
            (vmt <= best.vmt + 1e-9 && time < best.completion)) {
            best.feasible = true;
            best.vmt = vmt;
            best.completion = time;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Four-ordering shareability check: the interleaved orderings of two
// requests, with plain window arithmetic (the vehicle starts at the first
// pickup for free at the decision time).
inline bool pairwise_oracle(const Request& a, const Request& b, Seconds now, Seconds max_wait,
                            Seconds max_delay, const ShortestPathTables& tables) {
    struct P {
        NodeId n[4];
        const Request* owner[4];
        bool pickup[4];
    };
    auto try_order = [&](const Request& r1, const Request& r2, bool d1_first) {
        // Order: P1 P2 then D1 D2 or D2 D1.
        Seconds t = std::max(now, r1.arrival_time);
        if (t > r1.arrival_time + max_wait) return false;
        Seconds t_p1 = t;
        if (!tables.reachable(r1.origin, r2.origin)) return false;
        t += tables.time(r1.origin, r2.origin);
        if (t < r2.arrival_time) t = r2.arrival_time;
        if (t > r2.arrival_time + max_wait) return false;
        Seconds t_p2 = t;
        NodeId first_drop = d1_first ? r1.destination : r2.destination;
        NodeId second_drop = d1_first ? r2.destination : r1.destination;
        if (!tables.reachable(r2.origin, first_drop)) return false;
        t += tables.time(r2.origin, first_drop);
        Seconds lim_first = d1_first ? t_p1 + r1.direct_time + max_delay
                                     : t_p2 + r2.direct_time + max_delay;
        if (t > lim_first) return false;
        if (!tables.reachable(first_drop, second_drop)) return false;
        t += tables.time(first_drop, second_drop);
        Seconds lim_second = d1_first ? t_p2 + r2.direct_time + max_delay
                                      : t_p1 + r1.direct_time + max_delay;
        return t <= lim_second;
    };
    // P1P2D1D2, P1P2D2D1, P2P1D2D1, P2P1D1D2
    return try_order(a, b, true) || try_order(a, b, false) || try_order(b, a, true) ||
           try_order(b, a, false);
}

// Exhaustive assignment oracle: every combination of one edge per vehicle,
// dummy edges auto-filled for uncovered requests, objective recomputed
// directly from the cost function.
struct AssignmentOracleResult {
    double objective = std::numeric_limits<double>::infinity();
};

inline AssignmentOracleResult enumerate_assignments(const RTVZGraph& graph,
                                                    const ObjectiveSpec& objective) {
    std::vector<std::vector<const RtvzEdge*>> options;
    for (const auto& v : graph.vehicles) {
        std::vector<const RtvzEdge*> opts;
        for (const auto& e : graph.edges())
            if (e.vehicle == v.id) opts.push_back(&e);
        options.push_back(opts);
    }
    std::map<RequestId, double> dummy_cost;
    for (const auto& e : graph.edges())
        if (e.is_dummy()) dummy_cost[e.request] = objective.edge_cost[e.id];

    AssignmentOracleResult best;
    std::vector<size_t> pick(options.size(), 0);
    for (;;) {
        // Evaluate this combination.
        std::map<RequestId, int> covered;
        double cost = 0.0;
        std::map<ZoneId, double> supply;
        for (size_t vi = 0; vi < options.size(); ++vi) {
            const RtvzEdge* e = options[vi][pick[vi]];
            cost += objective.edge_cost[e->id];
            for (RequestId r : e->covers) covered[r] += 1;
            for (const auto& [z, yv] : e->y.y) supply[z] += yv;
        }
        bool valid = true;
        for (const auto& [r, cnt] : covered)
            if (cnt > 1) valid = false;
        if (valid) {
            for (RequestId r : graph.outstanding)
                if (!covered.count(r)) cost += dummy_cost.at(r);
            for (const auto& zt : objective.zone_terms) {
                if (zt.alpha <= 0.0) continue;
                auto it = supply.find(zt.zone);
                double s = it == supply.end() ? 0.0 : it->second;
                cost += zt.alpha * std::abs(zt.phi - s);
            }
            best.objective = std::min(best.objective, cost);
        }
        // Advance the mixed-radix counter.
        size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < options[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    if (options.empty()) {
        best.objective = 0.0;
        for (RequestId r : graph.outstanding) best.objective += dummy_cost.at(r);
        for (const auto& zt : objective.zone_terms)
            if (zt.alpha > 0.0) best.objective += zt.alpha * std::abs(zt.phi);
    }
    return best;
}

}  // namespace oracles
