#pragma once

#include "ridepool/core.hpp"
#include "ridepool/csv.hpp"
#include "ridepool/network.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ridepool {

struct Request {
    RequestId id = -1;
    NodeId origin = kInvalidNode;
    NodeId destination = kInvalidNode;
    Seconds arrival_time = 0;            // t^a
    Seconds direct_time = 0;             // tau*, time(origin, destination)
    std::optional<Seconds> pickup_time;  // t^p, set when picked up
    std::optional<Seconds> dropoff_time; // t^d, set when dropped off

    Seconds wait_time() const { return *pickup_time - arrival_time; }
    Seconds trip_delay() const { return *dropoff_time - *pickup_time - direct_time; }
};

// Requests sorted by arrival time (ties by id), direct times filled in from
// the path tables. Rows may give nodes directly or coordinates that are
// snapped to the nearest network node.
inline std::vector<Request> load_requests(const CsvTable& table, const RoadNetwork& net,
                                          const ShortestPathTables& tables) {
    bool by_node = table.has_column("origin_node");
    int c_id = table.column("id");
    int c_time = table.column("time_s");
    int c_on = -1, c_dn = -1, c_ox = -1, c_oy = -1, c_dx = -1, c_dy = -1;
    if (by_node) {
        c_on = table.column("origin_node");
        c_dn = table.column("dest_node");
    } else {
        c_ox = table.column("origin_x");
        c_oy = table.column("origin_y");
        c_dx = table.column("dest_x");
        c_dy = table.column("dest_y");
    }

    std::map<int64_t, NodeId> by_external;
    for (NodeId i = 0; i < net.node_count(); ++i) by_external[net.external_id(i)] = i;

    std::set<int64_t> seen;
    std::vector<Request> out;
    for (size_t r = 0; r < table.row_count(); ++r) {
        Request q;
        int64_t ext_id = table.integer(r, c_id);
        if (!seen.insert(ext_id).second)
            throw DuplicateIdError(table.where(r) + ": duplicate request id " +
                                   std::to_string(ext_id));
        q.id = static_cast<RequestId>(ext_id);
        q.arrival_time = table.integer(r, c_time);
        if (by_node) {
            auto o = by_external.find(table.integer(r, c_on));
            auto d = by_external.find(table.integer(r, c_dn));
            if (o == by_external.end())
                throw UnknownNodeError(table.where(r) + ": unknown origin node");
            if (d == by_external.end())
                throw UnknownNodeError(table.where(r) + ": unknown destination node");
            q.origin = o->second;
            q.destination = d->second;
        } else {
            q.origin = net.nearest_node(table.number(r, c_ox), table.number(r, c_oy));
            q.destination = net.nearest_node(table.number(r, c_dx), table.number(r, c_dy));
        }
        if (q.origin == q.destination)
            throw InputError(table.where(r) + ": origin equals destination after snapping");
        q.direct_time = tables.time(q.origin, q.destination);
        out.push_back(q);
    }
    std::sort(out.begin(), out.end(), [](const Request& a, const Request& b) {
        return a.arrival_time != b.arrival_time ? a.arrival_time < b.arrival_time : a.id < b.id;
    });
    return out;
}

inline std::vector<Request> load_requests_file(const std::string& path, const RoadNetwork& net,
                                               const ShortestPathTables& tables) {
    return load_requests(CsvTable::from_file(path), net, tables);
}

// Historical request rate per zone per demand interval (lambda). Missing
// cells read as zero.
class RateTable {
public:
    explicit RateTable(Seconds interval_length = 900) : interval_length_(interval_length) {}

    Seconds interval_length() const { return interval_length_; }

    double rate(ZoneId z, int64_t interval) const {
        auto it = lambda_.find({z, interval});
        return it == lambda_.end() ? 0.0 : it->second;
    }

    void set_rate(ZoneId z, int64_t interval, double value) {
        if (value < 0.0) throw InputError("negative demand rate");
        lambda_[{z, interval}] = value;
    }

    const std::map<std::pair<ZoneId, int64_t>, double>& cells() const { return lambda_; }

    int64_t interval_of(Seconds t) const { return t / interval_length_; }

    static RateTable from_file(const std::string& path, Seconds interval_length = 900) {
        CsvTable t = CsvTable::from_file(path);
        int c_zone = t.column("zone_id"), c_int = t.column("interval_index"),
            c_lam = t.column("lambda");
        RateTable out(interval_length);
        for (size_t r = 0; r < t.row_count(); ++r)
            out.set_rate(static_cast<ZoneId>(t.integer(r, c_zone)), t.integer(r, c_int),
                         t.number(r, c_lam));
        return out;
    }

    void to_file(const std::string& path, const std::string& preamble = "") const;

private:
    Seconds interval_length_;
    std::map<std::pair<ZoneId, int64_t>, double> lambda_;
};

inline void RateTable::to_file(const std::string& path, const std::string& preamble) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    if (!preamble.empty()) out << "# " << preamble << "\n";
    out << "zone_id,interval_index,lambda\n";
    for (const auto& [key, v] : lambda_) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        out << key.first << "," << key.second << "," << buf << "\n";
    }
}

// Mean over days of request counts originating in each zone per interval.
inline RateTable estimate_rates(const std::vector<std::vector<Request>>& days,
                                const ZoneSet& zones, Seconds interval_length = 900) {
    if (days.empty()) throw EmptyHistoryError("rate estimation needs at least one day");
    std::map<std::pair<ZoneId, int64_t>, double> counts;
    for (const auto& day : days)
        for (const auto& r : day)
            counts[{zones.zone_of(r.origin), r.arrival_time / interval_length}] += 1.0;
    RateTable out(interval_length);
    double n_days = static_cast<double>(days.size());
    for (const auto& [key, c] : counts) out.set_rate(key.first, key.second, c / n_days);
    return out;
}

struct TargetSupply {
    std::map<ZoneId, double> phi;  // seats-equivalent per zone over [t, t+H]
    Seconds horizon = 0;

    double of(ZoneId z) const {
        auto it = phi.find(z);
        return it == phi.end() ? 0.0 : it->second;
    }
};

// Weighted average of the two demand intervals the window [t, t+H] touches:
// phi = theta * lambda_k + (1 - theta) * lambda_{k+1}, theta being the share
// of the window inside interval k.
inline TargetSupply target_supply(const RateTable& rates, const ZoneSet& zones, Seconds t,
                                  Seconds horizon) {
    Seconds len = rates.interval_length();
    if (horizon <= 0) throw ParamViolationError("rebalancing horizon must be positive");
    if (horizon > 2 * len)
        throw HorizonTooLongError("horizon " + std::to_string(horizon) +
                                  "s spans more than two " + std::to_string(len) +
                                  "s demand intervals");
    int64_t k = t / len;
    Seconds interval_end = (k + 1) * len;
    Seconds inside = std::min(horizon, interval_end - t);
    double theta = static_cast<double>(inside) / static_cast<double>(horizon);

    TargetSupply out;
    out.horizon = horizon;
    for (const auto& z : zones.zones())
        out.phi[z.id] = theta * rates.rate(z.id, k) + (1.0 - theta) * rates.rate(z.id, k + 1);
    return out;
}

}  // namespace ridepool
