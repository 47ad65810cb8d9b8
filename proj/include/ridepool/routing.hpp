#pragma once

#include "ridepool/core.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/network.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace ridepool {

enum class StopKind { Pickup, Dropoff };

struct Stop {
    NodeId node = kInvalidNode;
    StopKind kind = StopKind::Pickup;
    RequestId request = -1;
    Seconds planned_time = 0;
    int load_after = 0;
};

struct Schedule {
    std::vector<Stop> stops;
    Meters total_vmt = 0.0;   // depot through last stop; no return leg
    Seconds duration = 0;     // last stop time minus start time

    bool empty() const { return stops.empty(); }
    Seconds completion_time(Seconds start) const { return start + duration; }
};

// One request inside a routing instance. Onboard requests contribute a
// dropoff stop only; their pickup time is the recorded actual one.
struct RoutingRequestSpec {
    RequestId id = -1;
    NodeId pickup_node = kInvalidNode;
    NodeId dropoff_node = kInvalidNode;
    Seconds arrival_time = 0;  // request t^a
    Seconds direct_time = 0;   // tau*
    bool onboard = false;
    Seconds actual_pickup = 0;  // meaningful when onboard
};

// Single-vehicle dial-a-ride instance: a depot (the vehicle position), the
// pickup/dropoff stops of new plus already-committed requests, and the LOS
// windows. The net load over all stops plus the initial onboard count is
// zero by construction: every pickup has its dropoff and every onboard
// passenger contributes exactly one dropoff.
struct RoutingInstance {
    NodeId depot = kInvalidNode;
    Seconds start_time = 0;
    bool virtual_depot = false;  // depot-to-first-stop leg free (PRS mode)
    int capacity = 0;
    Seconds max_wait = 0;   // Omega
    Seconds max_delay = 0;  // Delta
    std::vector<RoutingRequestSpec> requests;
};

struct DarpOptions {
    bool feasibility_only = false;
    // Reject schedules where the vehicle goes empty with stops remaining.
    // Used by the pairwise shareability check, which asks whether two
    // requests can actually ride together rather than be chained.
    bool forbid_empty_midroute = false;
};

namespace detail {

struct DarpStopRef {
    NodeId node;
    StopKind kind;
    int request_index;
};

class DarpSearch {
public:
    DarpSearch(const RoutingInstance& inst, const ShortestPathTables& tables,
               const DarpOptions& opts)
        : inst_(inst), tables_(tables), opts_(opts) {
        // Stop order fixes all tie-breaking: sorted by request id, pickup
        // before dropoff. The DFS visits candidate stops in this order, so
        // among schedules of equal cost and completion time the first one
        // found is the lexicographically smallest.
        std::vector<int> order(inst.requests.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return inst.requests[a].id < inst.requests[b].id;
        });
        for (int ri : order) {
            const auto& r = inst_.requests[ri];
            if (!r.onboard) stops_.push_back({r.pickup_node, StopKind::Pickup, ri});
            stops_.push_back({r.dropoff_node, StopKind::Dropoff, ri});
        }
        picked_time_.assign(inst_.requests.size(), 0);
        onboard_ = 0;
        for (size_t i = 0; i < inst_.requests.size(); ++i) {
            const auto& r = inst_.requests[i];
            if (r.onboard) {
                picked_time_[i] = r.actual_pickup;
                ++onboard_;
            }
        }
        initial_onboard_ = onboard_;
        visited_.assign(stops_.size(), false);
        sequence_.reserve(stops_.size());
    }

    std::optional<Schedule> run() {
        if (initial_onboard_ > inst_.capacity) return std::nullopt;
        if (stops_.empty()) {
            Schedule s;
            return s;  // nothing to do, zero-cost empty schedule
        }
        dfs(inst_.depot, inst_.start_time, 0.0, true);
        if (!found_) return std::nullopt;
        return best_;
    }

private:
    void dfs(NodeId node, Seconds time, Meters vmt, bool first_leg) {
        if (found_ && opts_.feasibility_only) return;
        if (sequence_.size() == stops_.size()) {
            record(time, vmt);
            return;
        }
        if (found_ && vmt > best_.total_vmt + kVmtEps) return;

        for (size_t s = 0; s < stops_.size(); ++s) {
            if (visited_[s]) continue;
            const DarpStopRef& stop = stops_[s];
            const RoutingRequestSpec& req = inst_.requests[stop.request_index];

            if (stop.kind == StopKind::Pickup) {
                if (onboard_ >= inst_.capacity) continue;
            } else {
                bool is_onboard = req.onboard || picked_[stop.request_index];
                if (!is_onboard) continue;  // pickup must precede dropoff
            }

            Seconds leg_time;
            Meters leg_dist;
            if (first_leg && inst_.virtual_depot) {
                leg_time = 0;
                leg_dist = 0.0;
            } else {
                if (!tables_.reachable(node, stop.node)) continue;
                leg_time = tables_.time(node, stop.node);
                leg_dist = tables_.distance(node, stop.node);
            }
            Seconds arrive = time + leg_time;
            Meters next_vmt = vmt + leg_dist;
            if (found_ && !opts_.feasibility_only && next_vmt > best_.total_vmt + kVmtEps)
                continue;

            Seconds stop_time;
            if (stop.kind == StopKind::Pickup) {
                // The vehicle may arrive early and wait at the node.
                stop_time = std::max(arrive, req.arrival_time);
                if (stop_time > req.arrival_time + inst_.max_wait) continue;
            } else {
                stop_time = arrive;
                if (stop_time > picked_time_[stop.request_index] + req.direct_time +
                                    inst_.max_delay)
                    continue;
            }

            // Apply.
            visited_[s] = true;
            sequence_.push_back(static_cast<int>(s));
            Seconds saved_pick = picked_time_[stop.request_index];
            if (stop.kind == StopKind::Pickup) {
                picked_[stop.request_index] = true;
                picked_time_[stop.request_index] = stop_time;
                ++onboard_;
            } else {
                --onboard_;
            }
            times_.push_back(stop_time);

            bool prune_empty = opts_.forbid_empty_midroute && onboard_ == 0 &&
                               sequence_.size() < stops_.size();
            if (!prune_empty) dfs(stop.node, stop_time, next_vmt, false);

            // Undo.
            times_.pop_back();
            if (stop.kind == StopKind::Pickup) {
                picked_[stop.request_index] = false;
                picked_time_[stop.request_index] = saved_pick;
                --onboard_;
            } else {
                ++onboard_;
            }
            sequence_.pop_back();
            visited_[s] = false;

            if (found_ && opts_.feasibility_only) return;
        }
    }

    void record(Seconds completion, Meters vmt) {
        Seconds duration = completion - inst_.start_time;
        bool better = !found_ || vmt < best_.total_vmt - kVmtEps ||
                      (vmt <= best_.total_vmt + kVmtEps && duration < best_.duration);
        if (!better) return;
        found_ = true;
        best_.total_vmt = vmt;
        best_.duration = duration;
        best_.stops.clear();
        int load = initial_onboard_;
        for (size_t i = 0; i < sequence_.size(); ++i) {
            const DarpStopRef& stop = stops_[sequence_[i]];
            load += stop.kind == StopKind::Pickup ? 1 : -1;
            best_.stops.push_back(Stop{stop.node, stop.kind,
                                       inst_.requests[stop.request_index].id, times_[i], load});
        }
    }

    static constexpr double kVmtEps = 1e-9;

    const RoutingInstance& inst_;
    const ShortestPathTables& tables_;
    const DarpOptions& opts_;
    std::vector<DarpStopRef> stops_;
    std::vector<bool> visited_;
    std::vector<int> sequence_;
    std::vector<Seconds> times_;
    std::vector<Seconds> picked_time_;
    std::vector<bool> picked_ = std::vector<bool>(64, false);
    int onboard_ = 0;
    int initial_onboard_ = 0;
    bool found_ = false;
    Schedule best_;
};

}  // namespace detail

// Exact minimum-VMT schedule for the instance, or nullopt when no stop
// ordering satisfies the time windows and capacity. Infeasibility is a
// normal outcome. Ties in VMT break toward earlier completion, then toward
// the lexicographically smallest stop order.
inline std::optional<Schedule> solve_darp(const RoutingInstance& inst,
                                          const ShortestPathTables& tables,
                                          const DarpOptions& opts = {}) {
    if (inst.requests.size() > 64) throw InternalFault("routing instance too large");
    detail::DarpSearch search(inst, tables, opts);
    return search.run();
}

// Can the two requests ride together in one vehicle? Checked on the virtual
// instance whose depot-to-first-pickup leg is free, restricted to schedules
// where the riders actually overlap.
inline bool pairwise_shareable(const Request& r1, const Request& r2, Seconds now,
                               int capacity, Seconds max_wait, Seconds max_delay,
                               const ShortestPathTables& tables) {
    RoutingInstance inst;
    inst.depot = r1.origin;  // irrelevant: first leg is free
    inst.start_time = now;
    inst.virtual_depot = true;
    inst.capacity = capacity;
    inst.max_wait = max_wait;
    inst.max_delay = max_delay;
    inst.requests.push_back(
        {r1.id, r1.origin, r1.destination, r1.arrival_time, r1.direct_time, false, 0});
    inst.requests.push_back(
        {r2.id, r2.origin, r2.destination, r2.arrival_time, r2.direct_time, false, 0});
    DarpOptions opts;
    opts.feasibility_only = true;
    opts.forbid_empty_midroute = true;
    return solve_darp(inst, tables, opts).has_value();
}

}  // namespace ridepool
