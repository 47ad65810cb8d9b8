#pragma once

#include "ridepool/assignment.hpp"
#include "ridepool/core.hpp"
#include "ridepool/costs.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/graphs.hpp"
#include "ridepool/network.hpp"
#include "ridepool/rebalancing.hpp"
#include "ridepool/rng.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace ridepool {

enum class Variant {
    Sequential,            // RTV matching + probabilistic rebalancing
    SQBase,                // RTV matching only
    Integrated,            // RTVZ matching with zone edges and deviation term
    IntegratedBase,        // deviation term but no zone edges
    IntegratedSequential,  // IntegratedBase + probabilistic rebalancing
    IntegratedIS,          // Integrated, conventionally run with gamma > 1
};

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Sequential: return "sequential";
        case Variant::SQBase: return "sq-base";
        case Variant::Integrated: return "integrated";
        case Variant::IntegratedBase: return "integrated-base";
        case Variant::IntegratedSequential: return "integrated-sequential";
        case Variant::IntegratedIS: return "integrated-is";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& s) {
    for (Variant v : {Variant::Sequential, Variant::SQBase, Variant::Integrated,
                      Variant::IntegratedBase, Variant::IntegratedSequential,
                      Variant::IntegratedIS})
        if (s == variant_name(v)) return v;
    throw InputError("unknown variant: " + s);
}

// Does the variant attach zone edges / the deviation term / a sequential
// rebalancing pass?
inline bool variant_zone_edges(Variant v) {
    return v == Variant::Integrated || v == Variant::IntegratedIS;
}
inline bool variant_deviation(Variant v) {
    return v != Variant::Sequential && v != Variant::SQBase;
}
inline bool variant_sequential_rebalance(Variant v) {
    return v == Variant::Sequential || v == Variant::IntegratedSequential;
}

struct SimConfig {
    Seconds epoch = 30;        // decision interval
    Seconds horizon = 600;     // H
    Seconds max_wait = 420;    // Omega
    Seconds max_delay = 900;   // Delta
    int capacity = 4;          // O
    int fleet_size = 0;        // F
    Variant variant = Variant::Integrated;
    double alpha = 1.0;
    std::map<ZoneId, double> alpha_by_zone;  // overrides the uniform alpha
    double beta = 0.0;                       // 0: derived as sum(alpha) + 1000
    double gamma = 1.0;
    double solver_budget_s = 10.0;
    int max_trips_per_size = 10000;
    bool allow_reassignment = false;
    Seconds start_time = 0;
    Seconds end_time = 0;
    Seconds measure_start = 0;
    Seconds measure_end = 0;
    uint64_t seed = 1;

    void validate() const {
        if (epoch <= 0) throw ParamViolationError("epoch must be positive");
        if (max_wait <= 0 || max_delay < 0)
            throw ParamViolationError("LOS bounds must be positive");
        if (capacity < 1) throw ParamViolationError("capacity must be at least 1");
        if (end_time <= start_time) throw ParamViolationError("empty simulation window");
        if (measure_start < start_time || measure_end > end_time ||
            measure_end < measure_start)
            throw ParamViolationError("measurement window outside the simulation window");
    }

    CostParams cost_params(const ZoneSet& zones) const {
        CostParams p;
        for (const auto& z : zones.zones()) {
            auto it = alpha_by_zone.find(z.id);
            p.alpha[z.id] = it != alpha_by_zone.end() ? it->second : alpha;
        }
        p.gamma = gamma;
        p.horizon = horizon;
        p.beta = beta > 0.0 ? beta : p.alpha_sum() + 1000.0;
        return p;
    }
};

enum class EventKind {
    Init,
    Arrive,
    Expire,
    Unmatch,
    Match,
    RebStart,
    MoveActive,
    MoveDeadhead,
    MoveReb,
    RebEnd,
    Pickup,
    Dropoff,
    Idle,
};

inline const char* event_name(EventKind k) {
    switch (k) {
        case EventKind::Init: return "init";
        case EventKind::Arrive: return "arrive";
        case EventKind::Expire: return "expire";
        case EventKind::Unmatch: return "unmatch";
        case EventKind::Match: return "match";
        case EventKind::RebStart: return "reb_start";
        case EventKind::MoveActive: return "move_active";
        case EventKind::MoveDeadhead: return "move_deadhead";
        case EventKind::MoveReb: return "move_reb";
        case EventKind::RebEnd: return "reb_end";
        case EventKind::Pickup: return "pickup";
        case EventKind::Dropoff: return "dropoff";
        case EventKind::Idle: return "idle";
    }
    return "?";
}

struct JournalRecord {
    Seconds time = 0;
    EventKind kind = EventKind::Init;
    VehicleId vehicle = -1;   // -1: not vehicle related
    RequestId request = -1;   // -1: not request related
    NodeId node = kInvalidNode;
    int occupancy = -1;       // -1: not applicable
};

// The journal is the contract all metrics are computed from:
// time,event_kind,vehicle_id,request_id,node,occupancy with empty fields
// where not applicable. Node ids are the external ids of the network file.
inline void write_journal(const std::vector<JournalRecord>& records, const RoadNetwork& net,
                          std::ostream& os) {
    os << "time,event_kind,vehicle_id,request_id,node,occupancy\n";
    for (const auto& r : records) {
        os << r.time << ',' << event_name(r.kind) << ',';
        if (r.vehicle >= 0) os << r.vehicle;
        os << ',';
        if (r.request >= 0) os << r.request;
        os << ',';
        if (r.node != kInvalidNode) os << net.external_id(r.node);
        os << ',';
        if (r.occupancy >= 0) os << r.occupancy;
        os << '\n';
    }
}

struct SimVehicle {
    VehicleId id = -1;
    int capacity = 0;
    NodeId node = kInvalidNode;  // last node reached
    Seconds time = 0;            // timestamp of that arrival
    bool mid_hop = false;
    NodeId hop_from = kInvalidNode, hop_to = kInvalidNode;
    Seconds hop_arrive = 0;
    EventKind hop_kind = EventKind::MoveActive;
    VehicleClass cls = VehicleClass::Idle;
    Schedule schedule;                      // remaining committed stops
    std::vector<std::vector<NodeId>> legs;  // per stop, nodes after current position
    std::vector<RequestId> matched;
    std::vector<RequestId> onboard;
    NodeId reb_target = kInvalidNode;
    std::deque<NodeId> reb_path;  // remaining nodes toward the target
    Meters odo_active = 0.0, odo_deadhead = 0.0, odo_reb = 0.0;

    NodeId position_node() const { return mid_hop ? hop_to : node; }
    Meters odometer_total() const { return odo_active + odo_deadhead + odo_reb; }
};

enum class RequestState { Outstanding, Matched, Onboard, Served, Expired };

struct RequestRecord {
    Request req;
    RequestState state = RequestState::Outstanding;
    VehicleId vehicle = -1;
};

struct EpochState {
    Seconds clock = 0;
    std::vector<SimVehicle> fleet;
    std::map<RequestId, RequestRecord> requests;
    std::vector<RequestId> outstanding;  // sorted
    std::vector<JournalRecord> journal;
    int epochs_run = 0;
    int solver_fallbacks = 0;  // epochs where the budget cut optimality
};

// Vehicles spread over zones proportionally to the demand rate of the start
// interval (largest-remainder rounding, ties to the lower zone id), each
// placed uniformly at random on a node of its zone.
inline std::vector<SimVehicle> initialize_fleet(const RoadNetwork& net, const ZoneSet& zones,
                                                const RateTable& rates, int fleet_size,
                                                int capacity, Seconds start_time,
                                                uint64_t seed) {
    if (zones.zone_count() == 0) throw EmptyZoneSetError("cannot initialize fleet: no zones");
    (void)net;
    int64_t k0 = rates.interval_of(start_time);
    std::vector<double> weights;
    double total = 0.0;
    for (const auto& z : zones.zones()) {
        double w = rates.rate(z.id, k0);
        weights.push_back(w);
        total += w;
    }
    if (total <= 0.0) {
        weights.assign(zones.zone_count(), 1.0);
        total = static_cast<double>(zones.zone_count());
    }

    std::vector<int> counts(zones.zone_count(), 0);
    std::vector<std::pair<double, ZoneId>> remainders;
    int assigned = 0;
    for (int z = 0; z < zones.zone_count(); ++z) {
        double exact = fleet_size * weights[z] / total;
        counts[z] = static_cast<int>(std::floor(exact + 1e-12));
        assigned += counts[z];
        remainders.push_back({exact - counts[z], z});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (int i = 0; assigned < fleet_size; ++i, ++assigned) {
        counts[remainders[i % remainders.size()].second] += 1;
    }

    Rng rng(seed);
    std::vector<SimVehicle> fleet;
    VehicleId id = 0;
    for (int z = 0; z < zones.zone_count(); ++z) {
        const auto& zone_nodes = zones.zone(z).nodes;
        for (int i = 0; i < counts[z]; ++i) {
            SimVehicle v;
            v.id = id++;
            v.capacity = capacity;
            v.node = zone_nodes[rng.next_below(zone_nodes.size())];
            v.time = start_time;
            fleet.push_back(v);
        }
    }
    return fleet;
}

class Simulator {
public:
    Simulator(const SimConfig& config, const RoadNetwork& net, const ShortestPathTables& tables,
              const ZoneSet& zones, const RateTable& rates)
        : Simulator(config, net, tables, zones, rates,
                    initialize_fleet(net, zones, rates, config.fleet_size, config.capacity,
                                     config.start_time, config.seed)) {}

    // Explicit starting fleet, for fixtures and debugging.
    Simulator(const SimConfig& config, const RoadNetwork& net, const ShortestPathTables& tables,
              const ZoneSet& zones, const RateTable& rates, std::vector<SimVehicle> fleet)
        : cfg_(config), net_(net), tables_(tables), zones_(zones), rates_(rates) {
        cfg_.validate();
        cost_params_ = cfg_.cost_params(zones_);
        cost_params_.validate();
        state_.clock = cfg_.start_time;
        state_.fleet = std::move(fleet);
        for (const auto& v : state_.fleet)
            state_.journal.push_back(
                {cfg_.start_time, EventKind::Init, v.id, -1, v.node, 0});
    }

    const EpochState& state() const { return state_; }
    EpochState& mutable_state() { return state_; }

    // One decision epoch: ingest the batch, expire hopeless requests, run
    // the variant's matching pipeline, commit, advance every vehicle to
    // clock + epoch and journal what happened.
    void step_epoch(const std::vector<Request>& batch) {
        const Seconds now = state_.clock;
        const Seconds until = now + cfg_.epoch;
        epoch_events_.clear();

        ingest(batch, now, until);
        expire_hopeless(now);
        run_matching(now);
        for (auto& v : state_.fleet) advance_vehicle(v, until);

        std::stable_sort(epoch_events_.begin(), epoch_events_.end(),
                         [](const JournalRecord& a, const JournalRecord& b) {
                             return a.time < b.time;
                         });
        state_.journal.insert(state_.journal.end(), epoch_events_.begin(),
                              epoch_events_.end());
        state_.clock = until;
        state_.epochs_run += 1;
    }

    void run(const std::vector<Request>& all_requests) {
        size_t next = 0;
        // Requests are already sorted by arrival time.
        while (state_.clock < cfg_.end_time) {
            Seconds until = state_.clock + cfg_.epoch;
            std::vector<Request> batch;
            while (next < all_requests.size() &&
                   all_requests[next].arrival_time <= until) {
                if (all_requests[next].arrival_time > state_.clock)
                    batch.push_back(all_requests[next]);
                ++next;
            }
            step_epoch(batch);
        }
    }

    // Builds the graph of the upcoming epoch without committing anything.
    RTVZGraph build_epoch_graph() {
        const Seconds now = state_.clock;
        std::vector<Request> outstanding = outstanding_requests();
        EpochParams params = epoch_params();
        PRSGraph prs = build_prs_graph(outstanding, now, params, tables_);
        std::vector<VehicleSnapshot> snaps = snapshots(now);
        TripCatalog catalog =
            enumerate_trips(prs, outstanding, snaps, params, tables_, restrictions());
        return build_rtvz_graph(catalog, snaps, outstanding, zones_, tables_, now, params);
    }

    AssignmentModel build_epoch_model(const RTVZGraph& graph) {
        TargetSupply phi = target_supply(rates_, zones_, state_.clock, cfg_.horizon);
        std::vector<ZoneId> dev_zones;
        if (variant_deviation(cfg_.variant))
            for (const auto& z : zones_.zones()) dev_zones.push_back(z.id);
        ObjectiveSpec objective = assemble_objective(graph, phi, cost_params_, dev_zones);
        return build_assignment_model(graph, objective);
    }

private:
    EpochParams epoch_params() const {
        EpochParams p;
        p.capacity = cfg_.capacity;
        p.max_wait = cfg_.max_wait;
        p.max_delay = cfg_.max_delay;
        p.horizon = cfg_.horizon;
        p.max_trips_per_size = cfg_.max_trips_per_size;
        p.include_zone_edges = variant_zone_edges(cfg_.variant);
        return p;
    }

    void emit(JournalRecord r) { epoch_events_.push_back(r); }

    void ingest(const std::vector<Request>& batch, Seconds now, Seconds until) {
        for (const auto& r : batch) {
            if (r.arrival_time <= now || r.arrival_time > until)
                throw InternalFault("batched request outside the epoch window");
            if (state_.requests.count(r.id))
                throw DuplicateIdError("request id repeats: " + std::to_string(r.id));
            state_.requests[r.id] = RequestRecord{r, RequestState::Outstanding, -1};
            state_.outstanding.push_back(r.id);
            emit({r.arrival_time, EventKind::Arrive, -1, r.id, r.origin, -1});
        }
        std::sort(state_.outstanding.begin(), state_.outstanding.end());
    }

    // A request expires when even the best-placed vehicle, dropping
    // everything, could no longer reach its origin inside the wait window.
    void expire_hopeless(Seconds now) {
        std::vector<RequestId> keep;
        for (RequestId id : state_.outstanding) {
            RequestRecord& rec = state_.requests.at(id);
            Seconds best = kInfTime;
            for (const auto& v : state_.fleet) {
                NodeId pos = v.position_node();
                Seconds avail = v.mid_hop ? v.hop_arrive : now;
                if (!tables_.reachable(pos, rec.req.origin)) continue;
                best = std::min(best, avail + tables_.time(pos, rec.req.origin));
            }
            if (best > rec.req.arrival_time + cfg_.max_wait) {
                rec.state = RequestState::Expired;
                emit({std::max(now, rec.req.arrival_time), EventKind::Expire, -1, id,
                      rec.req.origin, -1});
            } else {
                keep.push_back(id);
            }
        }
        state_.outstanding = keep;
    }

    std::vector<Request> outstanding_requests() const {
        std::vector<Request> out;
        for (RequestId id : state_.outstanding) out.push_back(state_.requests.at(id).req);
        return out;
    }

    std::map<RequestId, VehicleId> restrictions() const {
        std::map<RequestId, VehicleId> out;
        if (!cfg_.allow_reassignment) return out;
        for (const auto& v : state_.fleet)
            for (RequestId r : v.matched) out[r] = v.id;
        return out;
    }

    std::vector<VehicleSnapshot> snapshots(Seconds now) const {
        std::vector<VehicleSnapshot> out;
        for (const auto& v : state_.fleet) {
            VehicleSnapshot s;
            s.id = v.id;
            s.capacity = v.capacity;
            s.node = v.position_node();
            s.available_time = v.mid_hop ? v.hop_arrive : now;
            s.cls = v.cls;
            s.rebalance_target = v.reb_target;
            s.committed_schedule = v.schedule;
            for (RequestId id : v.onboard) {
                const Request& r = state_.requests.at(id).req;
                s.committed.push_back({r.id, r.origin, r.destination, r.arrival_time,
                                       r.direct_time, true, *r.pickup_time});
            }
            if (cfg_.allow_reassignment) {
                s.reassignable = v.matched;
            } else {
                for (RequestId id : v.matched) {
                    const Request& r = state_.requests.at(id).req;
                    s.committed.push_back({r.id, r.origin, r.destination, r.arrival_time,
                                           r.direct_time, false, 0});
                }
            }
            out.push_back(std::move(s));
        }
        return out;
    }

    void run_matching(Seconds now) {
        std::vector<Request> outstanding = outstanding_requests();
        if (cfg_.allow_reassignment)
            for (const auto& v : state_.fleet)
                for (RequestId id : v.matched) outstanding.push_back(state_.requests.at(id).req);
        std::sort(outstanding.begin(), outstanding.end(),
                  [](const Request& a, const Request& b) { return a.id < b.id; });

        bool need_solver = !outstanding.empty() || variant_zone_edges(cfg_.variant) ||
                           variant_deviation(cfg_.variant);
        std::map<ZoneId, double> committed_supply;

        if (need_solver) {
            EpochParams params = epoch_params();
            PRSGraph prs = build_prs_graph(outstanding, now, params, tables_);
            std::vector<VehicleSnapshot> snaps = snapshots(now);
            TripCatalog catalog =
                enumerate_trips(prs, outstanding, snaps, params, tables_, restrictions());
            RTVZGraph graph = build_rtvz_graph(catalog, snaps, outstanding, zones_, tables_,
                                               now, params);
            AssignmentModel model = build_epoch_model(graph);
            Assignment assignment = solve_assignment(model, cfg_.solver_budget_s);
            if (!assignment.optimal) state_.solver_fallbacks += 1;
            commit(assignment, graph, now, committed_supply);
        } else {
            // Nothing to decide: everyone keeps. The committed supply still
            // matters for the sequential rebalancer below; staying idle
            // contributes full capacity to the current zone.
            EpochParams params = epoch_params();
            for (const auto& s : snapshots(now)) {
                SupplyVector y;
                if (s.cls == VehicleClass::Idle) {
                    y.add(zones_.zone_of(s.node), static_cast<double>(s.capacity));
                } else if (s.cls == VehicleClass::Rebalancing) {
                    std::vector<SupplySegment> segs = trace_path(
                        tables_.path_between(s.node, s.rebalance_target), s.capacity, zones_,
                        tables_);
                    detail::prepend_lead(segs, s, now, zones_);
                    y = supply_contribution(segs, zones_.zone_of(s.rebalance_target),
                                            s.capacity, params.horizon);
                } else {
                    y = detail::edge_supply_for_schedule(s, s.committed_schedule, now, zones_,
                                                         tables_, params.horizon);
                }
                for (const auto& [z, val] : y.y) committed_supply[z] += val;
            }
        }

        if (variant_sequential_rebalance(cfg_.variant)) {
            std::vector<VehicleSnapshot> idle;
            for (const auto& s : snapshots(now))
                if (s.cls == VehicleClass::Idle) idle.push_back(s);
            TargetSupply phi = target_supply(rates_, zones_, now, cfg_.horizon);
            uint64_t epoch_seed = mix_seed(cfg_.seed, state_.epochs_run);
            RebalancePlan plan = probabilistic_rebalance(idle, phi, committed_supply, zones_,
                                                         tables_, epoch_seed);
            for (const auto& d : plan.directives)
                commit_rebalance(vehicle(d.vehicle), d.zone, d.target_node, now);
        }
    }

    static uint64_t mix_seed(uint64_t seed, int epoch) {
        uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(epoch + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    SimVehicle& vehicle(VehicleId id) {
        for (auto& v : state_.fleet)
            if (v.id == id) return v;
        throw InternalFault("unknown vehicle " + std::to_string(id));
    }

    void commit(const Assignment& assignment, const RTVZGraph& graph, Seconds now,
                std::map<ZoneId, double>& committed_supply) {
        std::map<VehicleId, std::vector<RequestId>> prev_matched;
        if (cfg_.allow_reassignment)
            for (const auto& v : state_.fleet) prev_matched[v.id] = v.matched;

        std::set<RequestId> matched_now;
        for (const auto& d : assignment.decisions) {
            SimVehicle& v = vehicle(d.vehicle);
            switch (d.kind) {
                case VehicleDecision::Kind::Match: {
                    commit_match(v, d, graph, now);
                    for (RequestId r : graph.trips[d.trip].requests) matched_now.insert(r);
                    break;
                }
                case VehicleDecision::Kind::Rebalance: {
                    commit_rebalance(v, d.zone, zones_.zone(d.zone).centroid_node, now);
                    break;
                }
                case VehicleDecision::Kind::NoOp:
                    break;
            }
            // Every vehicle's committed choice contributes supply; a vehicle
            // staying idle commits full capacity to the zone it sits in.
            const RtvzEdge& e = graph.edges()[d.edge];
            for (const auto& [z, val] : e.y.y) committed_supply[z] += val;
        }

        // Requests matched this epoch leave the outstanding pool.
        std::vector<RequestId> keep;
        for (RequestId id : state_.outstanding)
            if (!matched_now.count(id)) keep.push_back(id);
        state_.outstanding = keep;

        // With reassignment, a previously matched request the solver left
        // unserved drops back into the outstanding pool.
        if (cfg_.allow_reassignment) {
            std::set<RequestId> unserved(assignment.unserved.begin(),
                                         assignment.unserved.end());
            for (auto& [vid, prev] : prev_matched) {
                SimVehicle& v = vehicle(vid);
                for (RequestId id : prev) {
                    if (!unserved.count(id)) continue;
                    auto it = std::find(v.matched.begin(), v.matched.end(), id);
                    if (it != v.matched.end()) v.matched.erase(it);
                    RequestRecord& rec = state_.requests.at(id);
                    rec.state = RequestState::Outstanding;
                    rec.vehicle = -1;
                    state_.outstanding.push_back(id);
                    emit({now, EventKind::Unmatch, vid, id, rec.req.origin, -1});
                }
            }
            std::sort(state_.outstanding.begin(), state_.outstanding.end());
        }
    }

    void commit_match(SimVehicle& v, const VehicleDecision& d, const RTVZGraph& graph,
                      Seconds now) {
        const Trip& trip = graph.trips[d.trip];
        v.cls = VehicleClass::Active;
        v.reb_target = kInvalidNode;
        v.reb_path.clear();
        v.schedule = d.schedule;
        if (!v.mid_hop) v.time = std::max(v.time, now);
        rebuild_legs(v);

        std::set<RequestId> pickups;
        for (const auto& stop : v.schedule.stops)
            if (stop.kind == StopKind::Pickup) pickups.insert(stop.request);
        v.matched.assign(pickups.begin(), pickups.end());

        for (RequestId id : trip.requests) {
            RequestRecord& rec = state_.requests.at(id);
            bool newly_matched = rec.state == RequestState::Outstanding;
            rec.state = RequestState::Matched;
            rec.vehicle = v.id;
            if (newly_matched)
                emit({now, EventKind::Match, v.id, id, rec.req.origin, -1});
        }
        for (RequestId id : v.matched) state_.requests.at(id).vehicle = v.id;
    }

    void commit_rebalance(SimVehicle& v, ZoneId zone, NodeId centroid, Seconds now) {
        if (v.cls != VehicleClass::Idle)
            throw InternalFault("rebalance directive for a non-idle vehicle");
        v.cls = VehicleClass::Rebalancing;
        v.reb_target = centroid;
        std::vector<NodeId> path = tables_.path_between(v.position_node(), centroid);
        v.reb_path.assign(path.begin() + 1, path.end());
        v.time = std::max(v.time, now);
        emit({now, EventKind::RebStart, v.id, -1, centroid, -1});
        (void)zone;
    }

    void rebuild_legs(SimVehicle& v) {
        v.legs.clear();
        NodeId from = v.position_node();
        for (const auto& stop : v.schedule.stops) {
            std::vector<NodeId> path = tables_.path_between(from, stop.node);
            v.legs.emplace_back(path.begin() + 1, path.end());
            from = stop.node;
        }
    }

    void start_hop(SimVehicle& v, NodeId to) {
        v.hop_from = v.node;
        v.hop_to = to;
        v.hop_arrive = v.time + tables_.time(v.node, to);
        v.mid_hop = true;
        if (v.cls == VehicleClass::Rebalancing)
            v.hop_kind = EventKind::MoveReb;
        else
            v.hop_kind = v.onboard.empty() ? EventKind::MoveDeadhead : EventKind::MoveActive;
    }

    void finish_hop(SimVehicle& v) {
        Meters d = tables_.distance(v.hop_from, v.hop_to);
        switch (v.hop_kind) {
            case EventKind::MoveActive: v.odo_active += d; break;
            case EventKind::MoveDeadhead: v.odo_deadhead += d; break;
            case EventKind::MoveReb: v.odo_reb += d; break;
            default: throw InternalFault("bad hop kind");
        }
        v.node = v.hop_to;
        v.time = v.hop_arrive;
        v.mid_hop = false;
        emit({v.time, v.hop_kind, v.id, -1, v.node, static_cast<int>(v.onboard.size())});
    }

    void advance_vehicle(SimVehicle& v, Seconds until) {
        for (;;) {
            if (v.mid_hop) {
                if (v.hop_arrive > until) return;
                finish_hop(v);
                continue;
            }
            if (v.cls == VehicleClass::Idle) return;

            if (v.cls == VehicleClass::Rebalancing) {
                if (!v.reb_path.empty()) {
                    if (v.time >= until) return;
                    NodeId next = v.reb_path.front();
                    v.reb_path.pop_front();
                    start_hop(v, next);
                    continue;
                }
                emit({v.time, EventKind::RebEnd, v.id, -1, v.node,
                      static_cast<int>(v.onboard.size())});
                emit({v.time, EventKind::Idle, v.id, -1, v.node, 0});
                v.cls = VehicleClass::Idle;
                v.reb_target = kInvalidNode;
                continue;
            }

            // Active.
            if (v.schedule.stops.empty()) {
                emit({v.time, EventKind::Idle, v.id, -1, v.node, 0});
                v.cls = VehicleClass::Idle;
                continue;
            }
            if (!v.legs.front().empty()) {
                if (v.time >= until) return;
                NodeId next = v.legs.front().front();
                v.legs.front().erase(v.legs.front().begin());
                start_hop(v, next);
                continue;
            }
            const Stop stop = v.schedule.stops.front();
            if (v.node != stop.node) throw InternalFault("vehicle off its committed path");
            if (stop.planned_time > until) return;
            if (stop.planned_time < v.time)
                throw InternalFault("schedule time inconsistent with execution");
            v.time = stop.planned_time;
            execute_stop(v, stop);
            v.schedule.stops.erase(v.schedule.stops.begin());
            v.legs.erase(v.legs.begin());
        }
    }

    void execute_stop(SimVehicle& v, const Stop& stop) {
        RequestRecord& rec = state_.requests.at(stop.request);
        if (stop.kind == StopKind::Pickup) {
            auto it = std::find(v.matched.begin(), v.matched.end(), stop.request);
            if (it == v.matched.end()) throw InternalFault("pickup of an unmatched request");
            v.matched.erase(it);
            v.onboard.push_back(stop.request);
            rec.state = RequestState::Onboard;
            rec.req.pickup_time = v.time;
            if (rec.req.wait_time() < 0 || rec.req.wait_time() > cfg_.max_wait)
                throw InternalFault("wait-time bound violated at execution");
            emit({v.time, EventKind::Pickup, v.id, stop.request, stop.node,
                  static_cast<int>(v.onboard.size())});
        } else {
            auto it = std::find(v.onboard.begin(), v.onboard.end(), stop.request);
            if (it == v.onboard.end()) throw InternalFault("dropoff of an absent request");
            v.onboard.erase(it);
            rec.state = RequestState::Served;
            rec.req.dropoff_time = v.time;
            if (rec.req.trip_delay() < 0 || rec.req.trip_delay() > cfg_.max_delay)
                throw InternalFault("trip-delay bound violated at execution");
            emit({v.time, EventKind::Dropoff, v.id, stop.request, stop.node,
                  static_cast<int>(v.onboard.size())});
        }
        if (static_cast<int>(v.onboard.size()) > v.capacity)
            throw InternalFault("capacity exceeded");
    }

    SimConfig cfg_;
    const RoadNetwork& net_;
    const ShortestPathTables& tables_;
    const ZoneSet& zones_;
    const RateTable& rates_;
    CostParams cost_params_;
    EpochState state_;
    std::vector<JournalRecord> epoch_events_;
};

}  // namespace ridepool
