#pragma once

#include "ridepool/core.hpp"
#include "ridepool/csv.hpp"
#include "ridepool/network.hpp"
#include "ridepool/simulator.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ridepool {

struct MetricsWindow {
    Seconds measure_start = 0;
    Seconds measure_end = 0;
    int capacity = 4;
};

struct TourStats {
    std::vector<int> sizes;
    std::vector<double> distances_km;

    double mean_size() const {
        if (sizes.empty()) return 0.0;
        double s = 0.0;
        for (int x : sizes) s += x;
        return s / static_cast<double>(sizes.size());
    }
    double mean_distance_km() const {
        if (distances_km.empty()) return 0.0;
        double s = 0.0;
        for (double x : distances_km) s += x;
        return s / static_cast<double>(distances_km.size());
    }
};

struct MetricsReport {
    long requests = 0;
    long served = 0;
    long expired = 0;
    std::optional<double> service_rate;
    std::optional<double> vmr;  // km per served request, decomposed below
    std::optional<double> active_vmr;
    std::optional<double> idle_vmr;  // deadheading
    std::optional<double> rebalancing_vmr;
    std::optional<double> shared_trip_ratio;
    std::optional<double> avg_wait_s;
    std::optional<double> avg_delay_s;
    std::optional<double> avg_occupancy;  // fraction of capacity, active time only
    double total_vmt_km = 0.0;
    double active_vmt_km = 0.0;
    double deadhead_vmt_km = 0.0;
    double rebalancing_vmt_km = 0.0;
    TourStats tours;
};

// Reads a journal written by write_journal back into records.
inline std::vector<JournalRecord> parse_journal(const std::string& text,
                                                const RoadNetwork& net) {
    std::map<int64_t, NodeId> by_external;
    for (NodeId i = 0; i < net.node_count(); ++i) by_external[net.external_id(i)] = i;
    CsvTable t = CsvTable::from_string(text, "<journal>");
    int c_time = t.column("time"), c_kind = t.column("event_kind"),
        c_veh = t.column("vehicle_id"), c_req = t.column("request_id"),
        c_node = t.column("node"), c_occ = t.column("occupancy");
    std::vector<JournalRecord> out;
    for (size_t r = 0; r < t.row_count(); ++r) {
        JournalRecord rec;
        rec.time = t.integer(r, c_time);
        std::string kind = t.cell(r, c_kind);
        bool known = false;
        for (EventKind k :
             {EventKind::Init, EventKind::Arrive, EventKind::Expire, EventKind::Unmatch,
              EventKind::Match, EventKind::RebStart, EventKind::MoveActive,
              EventKind::MoveDeadhead, EventKind::MoveReb, EventKind::RebEnd,
              EventKind::Pickup, EventKind::Dropoff, EventKind::Idle}) {
            if (kind == event_name(k)) {
                rec.kind = k;
                known = true;
                break;
            }
        }
        if (!known) throw MalformedRecordError(t.where(r) + ": unknown event " + kind);
        if (!t.cell(r, c_veh).empty()) rec.vehicle = static_cast<VehicleId>(t.integer(r, c_veh));
        if (!t.cell(r, c_req).empty()) rec.request = static_cast<RequestId>(t.integer(r, c_req));
        if (!t.cell(r, c_node).empty()) {
            auto it = by_external.find(t.integer(r, c_node));
            if (it == by_external.end())
                throw UnknownNodeError(t.where(r) + ": node not in network");
            rec.node = it->second;
        }
        if (!t.cell(r, c_occ).empty()) rec.occupancy = static_cast<int>(t.integer(r, c_occ));
        out.push_back(rec);
    }
    return out;
}

namespace metrics_detail {

struct RequestTrace {
    Seconds arrive = -1;
    Seconds pickup = -1;
    Seconds dropoff = -1;
    Seconds expire = -1;
    VehicleId vehicle = -1;
    NodeId origin = kInvalidNode;
    NodeId destination = kInvalidNode;
};

struct OccupancyPiece {
    Seconds from, to;
    int occupancy;
};

}  // namespace metrics_detail

// All performance measures, computed purely from the journal. Requests are
// attributed to the measurement window by arrival time; traveled distance
// by hop arrival time. Direct times come from the arrive and dropoff nodes,
// so the journal is self-sufficient. Undefined ratios (no requests or no
// served requests in the window) are reported as nulls.
inline MetricsReport compute_metrics(const std::vector<JournalRecord>& journal,
                                     const MetricsWindow& window,
                                     const ShortestPathTables& tables) {
    MetricsReport rep;
    const Seconds m0 = window.measure_start, m1 = window.measure_end;
    auto in_window = [&](Seconds t) { return t > m0 && t <= m1; };

    std::map<RequestId, metrics_detail::RequestTrace> reqs;
    std::map<VehicleId, std::vector<const JournalRecord*>> per_vehicle;
    for (const auto& rec : journal) {
        if (rec.request >= 0) {
            auto& tr = reqs[rec.request];
            switch (rec.kind) {
                case EventKind::Arrive:
                    tr.arrive = rec.time;
                    tr.origin = rec.node;
                    break;
                case EventKind::Expire: tr.expire = rec.time; break;
                case EventKind::Pickup:
                    tr.pickup = rec.time;
                    tr.vehicle = rec.vehicle;
                    break;
                case EventKind::Dropoff:
                    tr.dropoff = rec.time;
                    tr.destination = rec.node;
                    break;
                default: break;
            }
        }
        if (rec.vehicle >= 0) per_vehicle[rec.vehicle].push_back(&rec);
    }

    // Traveled distance by kind, plus per-vehicle occupancy timelines.
    std::map<VehicleId, std::vector<metrics_detail::OccupancyPiece>> occupancy;
    for (auto& [vid, events] : per_vehicle) {
        NodeId pos = kInvalidNode;
        Seconds occ_since = 0;
        int occ = 0;
        auto& pieces = occupancy[vid];
        for (const JournalRecord* rec : events) {
            switch (rec->kind) {
                case EventKind::Init:
                    pos = rec->node;
                    occ_since = rec->time;
                    occ = 0;
                    break;
                case EventKind::MoveActive:
                case EventKind::MoveDeadhead:
                case EventKind::MoveReb: {
                    double km = tables.distance(pos, rec->node) / 1000.0;
                    pos = rec->node;
                    if (in_window(rec->time)) {
                        if (rec->kind == EventKind::MoveActive) rep.active_vmt_km += km;
                        else if (rec->kind == EventKind::MoveDeadhead) rep.deadhead_vmt_km += km;
                        else rep.rebalancing_vmt_km += km;
                    }
                    break;
                }
                case EventKind::Pickup:
                case EventKind::Dropoff:
                    if (rec->time > occ_since) pieces.push_back({occ_since, rec->time, occ});
                    occ_since = rec->time;
                    occ = rec->occupancy;
                    break;
                default: break;
            }
        }
        if (!events.empty() && m1 > occ_since) pieces.push_back({occ_since, m1, occ});
    }
    rep.total_vmt_km = rep.active_vmt_km + rep.deadhead_vmt_km + rep.rebalancing_vmt_km;

    // Request aggregates over the measurement window.
    double wait_sum = 0.0, delay_sum = 0.0;
    long shared = 0;
    for (const auto& [id, tr] : reqs) {
        if (tr.arrive < 0 || !in_window(tr.arrive)) continue;
        rep.requests += 1;
        if (tr.expire >= 0) rep.expired += 1;
        if (tr.dropoff < 0) continue;
        rep.served += 1;
        wait_sum += static_cast<double>(tr.pickup - tr.arrive);
        delay_sum += static_cast<double>(tr.dropoff - tr.pickup -
                                         tables.time(tr.origin, tr.destination));
        for (const auto& piece : occupancy[tr.vehicle]) {
            Seconds a = std::max(piece.from, tr.pickup);
            Seconds b = std::min(piece.to, tr.dropoff);
            if (b > a && piece.occupancy >= 2) {
                shared += 1;
                break;
            }
        }
    }

    if (rep.requests > 0)
        rep.service_rate = static_cast<double>(rep.served) / static_cast<double>(rep.requests);
    if (rep.served > 0) {
        double n = static_cast<double>(rep.served);
        rep.vmr = rep.total_vmt_km / n;
        rep.active_vmr = rep.active_vmt_km / n;
        rep.idle_vmr = rep.deadhead_vmt_km / n;
        rep.rebalancing_vmr = rep.rebalancing_vmt_km / n;
        rep.shared_trip_ratio = static_cast<double>(shared) / n;
        rep.avg_wait_s = wait_sum / n;
        rep.avg_delay_s = delay_sum / n;
    }

    // Occupancy averaged over active vehicle time inside the window.
    double occ_time = 0.0, occ_weighted = 0.0;
    for (const auto& [vid, events] : per_vehicle) {
        enum class St { Idle, Reb, Active };
        St st = St::Idle;
        Seconds st_since = 0;
        int occ = 0;
        auto account = [&](Seconds from, Seconds to) {
            Seconds a = std::max(from, m0), b = std::min(to, m1);
            if (b > a && st == St::Active) {
                occ_time += static_cast<double>(b - a);
                occ_weighted += static_cast<double>(b - a) * occ;
            }
        };
        for (const JournalRecord* rec : events) {
            switch (rec->kind) {
                case EventKind::Init:
                    st = St::Idle;
                    st_since = rec->time;
                    occ = 0;
                    break;
                case EventKind::Match:
                    account(st_since, rec->time);
                    st = St::Active;
                    st_since = rec->time;
                    break;
                case EventKind::RebStart:
                    account(st_since, rec->time);
                    st = St::Reb;
                    st_since = rec->time;
                    break;
                case EventKind::Idle:
                    account(st_since, rec->time);
                    st = St::Idle;
                    st_since = rec->time;
                    break;
                case EventKind::Pickup:
                case EventKind::Dropoff:
                    account(st_since, rec->time);
                    st_since = rec->time;
                    occ = rec->occupancy;
                    break;
                default: break;
            }
        }
        account(st_since, m1);
    }
    if (occ_time > 0.0)
        rep.avg_occupancy = occ_weighted / occ_time / static_cast<double>(window.capacity);

    return rep;
}

// Vehicle tours: service periods between two consecutive idle states. Tour
// size counts distinct passengers picked up within the tour; tour distance
// is the active plus deadheading VMT inside it (rebalancing legs are not
// part of a tour). A tour is attributed to the window by its first pickup.
inline TourStats tour_statistics(const std::vector<JournalRecord>& journal,
                                 const MetricsWindow& window,
                                 const ShortestPathTables& tables) {
    TourStats out;
    std::map<VehicleId, std::vector<const JournalRecord*>> per_vehicle;
    for (const auto& rec : journal)
        if (rec.vehicle >= 0) per_vehicle[rec.vehicle].push_back(&rec);

    for (const auto& [vid, events] : per_vehicle) {
        NodeId pos = kInvalidNode;
        bool in_tour = false;
        double dist_km = 0.0;
        Seconds first_pickup = -1;
        std::set<RequestId> pax;
        auto close_tour = [&]() {
            if (in_tour && !pax.empty() && first_pickup > window.measure_start &&
                first_pickup <= window.measure_end) {
                out.sizes.push_back(static_cast<int>(pax.size()));
                out.distances_km.push_back(dist_km);
            }
            in_tour = false;
            dist_km = 0.0;
            first_pickup = -1;
            pax.clear();
        };
        for (const JournalRecord* rec : events) {
            switch (rec->kind) {
                case EventKind::Init:
                    pos = rec->node;
                    break;
                case EventKind::Match:
                    in_tour = true;
                    break;
                case EventKind::MoveActive:
                case EventKind::MoveDeadhead: {
                    double km = tables.distance(pos, rec->node) / 1000.0;
                    pos = rec->node;
                    if (in_tour) dist_km += km;
                    break;
                }
                case EventKind::MoveReb:
                    pos = rec->node;  // rebalancing legs stay outside tours
                    break;
                case EventKind::Pickup:
                    in_tour = true;
                    if (first_pickup < 0) first_pickup = rec->time;
                    pax.insert(rec->request);
                    break;
                case EventKind::Idle:
                    close_tour();
                    break;
                default: break;
            }
        }
        close_tour();
    }
    return out;
}

}  // namespace ridepool
