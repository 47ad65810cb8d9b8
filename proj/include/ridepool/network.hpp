#pragma once

#include "ridepool/core.hpp"
#include "ridepool/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace ridepool {

struct NetNode {
    NodeId id = kInvalidNode;
    double x = 0.0;  // meters
    double y = 0.0;  // meters
};

struct NetEdge {
    NodeId from = kInvalidNode;
    NodeId to = kInvalidNode;
    Meters length = 0.0;
    Seconds travel_time = 0;
};

// Directed road graph. Node ids are dense [0, n) after loading; the loader
// remaps arbitrary external ids and keeps the mapping for file round-trips.
class RoadNetwork {
public:
    RoadNetwork(std::vector<NetNode> nodes, std::vector<NetEdge> edges,
                std::vector<int64_t> external_ids)
        : nodes_(std::move(nodes)), edges_(std::move(edges)),
          external_ids_(std::move(external_ids)) {
        adjacency_.assign(nodes_.size(), {});
        for (size_t e = 0; e < edges_.size(); ++e)
            adjacency_[edges_[e].from].push_back(static_cast<int>(e));
    }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    const std::vector<NetNode>& nodes() const { return nodes_; }
    const std::vector<NetEdge>& edges() const { return edges_; }
    const NetNode& node(NodeId i) const { return nodes_[i]; }
    const std::vector<int>& out_edges(NodeId i) const { return adjacency_[i]; }
    int64_t external_id(NodeId i) const { return external_ids_[i]; }

    NodeId nearest_node(double x, double y) const {
        NodeId best = kInvalidNode;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (const auto& n : nodes_) {
            double dx = n.x - x, dy = n.y - y;
            double d2 = dx * dx + dy * dy;
            if (d2 < best_d2 || (d2 == best_d2 && n.id < best)) {
                best_d2 = d2;
                best = n.id;
            }
        }
        return best;
    }

private:
    std::vector<NetNode> nodes_;
    std::vector<NetEdge> edges_;
    std::vector<int64_t> external_ids_;
    std::vector<std::vector<int>> adjacency_;
};

struct NodeRecord {
    int64_t node_id;
    double x;
    double y;
};

struct EdgeRecord {
    int64_t from;
    int64_t to;
    double length_m;
    double time_s;
};

inline RoadNetwork load_network(const std::vector<NodeRecord>& node_records,
                                const std::vector<EdgeRecord>& edge_records) {
    std::map<int64_t, NodeId> remap;
    std::vector<NetNode> nodes;
    std::vector<int64_t> external_ids;
    nodes.reserve(node_records.size());
    for (size_t i = 0; i < node_records.size(); ++i) {
        const auto& r = node_records[i];
        if (remap.count(r.node_id))
            throw MalformedRecordError("node row " + std::to_string(i) + ": duplicate node id " +
                                       std::to_string(r.node_id));
        if (!std::isfinite(r.x) || !std::isfinite(r.y))
            throw MalformedRecordError("node row " + std::to_string(i) + ": non-finite coordinate");
        NodeId id = static_cast<NodeId>(nodes.size());
        remap[r.node_id] = id;
        nodes.push_back(NetNode{id, r.x, r.y});
        external_ids.push_back(r.node_id);
    }

    // Parallel edges collapse to the fastest (then shortest) one; the engine
    // only ever drives time-optimal paths.
    std::map<std::pair<NodeId, NodeId>, NetEdge> best;
    for (size_t i = 0; i < edge_records.size(); ++i) {
        const auto& r = edge_records[i];
        auto from_it = remap.find(r.from);
        auto to_it = remap.find(r.to);
        if (from_it == remap.end())
            throw DanglingEdgeError("edge row " + std::to_string(i) + ": unknown node " +
                                    std::to_string(r.from));
        if (to_it == remap.end())
            throw DanglingEdgeError("edge row " + std::to_string(i) + ": unknown node " +
                                    std::to_string(r.to));
        if (!(r.length_m > 0.0) || !std::isfinite(r.length_m))
            throw NonPositiveWeightError("edge row " + std::to_string(i) + ": length " +
                                         std::to_string(r.length_m));
        Seconds t = static_cast<Seconds>(std::llround(r.time_s));
        if (std::abs(r.time_s - static_cast<double>(t)) > 1e-6)
            throw MalformedRecordError("edge row " + std::to_string(i) +
                                       ": travel time must be integer seconds");
        if (t <= 0)
            throw NonPositiveWeightError("edge row " + std::to_string(i) + ": travel time " +
                                         std::to_string(r.time_s));
        NetEdge e{from_it->second, to_it->second, r.length_m, t};
        auto key = std::make_pair(e.from, e.to);
        auto it = best.find(key);
        if (it == best.end() || e.travel_time < it->second.travel_time ||
            (e.travel_time == it->second.travel_time && e.length < it->second.length))
            best[key] = e;
    }
    std::vector<NetEdge> edges;
    edges.reserve(best.size());
    for (const auto& [k, e] : best) edges.push_back(e);
    return RoadNetwork(std::move(nodes), std::move(edges), std::move(external_ids));
}

inline RoadNetwork load_network_files(const std::string& node_path, const std::string& edge_path) {
    CsvTable nt = CsvTable::from_file(node_path);
    int c_id = nt.column("node_id"), c_x = nt.column("x"), c_y = nt.column("y");
    std::vector<NodeRecord> nodes;
    for (size_t r = 0; r < nt.row_count(); ++r)
        nodes.push_back({nt.integer(r, c_id), nt.number(r, c_x), nt.number(r, c_y)});

    CsvTable et = CsvTable::from_file(edge_path);
    int c_from = et.column("from"), c_to = et.column("to");
    int c_len = et.column("length_m"), c_time = et.column("time_s");
    std::vector<EdgeRecord> edges;
    for (size_t r = 0; r < et.row_count(); ++r)
        edges.push_back({et.integer(r, c_from), et.integer(r, c_to), et.number(r, c_len),
                         et.number(r, c_time)});
    return load_network(nodes, edges);
}

// All-pairs travel times and travel distances. Distances are measured along
// the time-optimal path (time ties broken toward the shorter path), so a
// vehicle that drives the reconstructed path accumulates exactly
// distance(i, j) meters and time(i, j) seconds. Computed with Floyd-Warshall
// over the (time, distance) lexicographic weight.
class ShortestPathTables {
public:
    explicit ShortestPathTables(const RoadNetwork& net) : n_(net.node_count()) {
        time_.assign(static_cast<size_t>(n_) * n_, kInfTime);
        dist_.assign(static_cast<size_t>(n_) * n_, std::numeric_limits<double>::infinity());
        pred_.assign(static_cast<size_t>(n_) * n_, kInvalidNode);
        for (int i = 0; i < n_; ++i) {
            at(time_, i, i) = 0;
            at(dist_, i, i) = 0.0;
            at(pred_, i, i) = i;
        }
        for (const auto& e : net.edges()) {
            Seconds& t = at(time_, e.from, e.to);
            double& d = at(dist_, e.from, e.to);
            if (e.travel_time < t || (e.travel_time == t && e.length < d)) {
                t = e.travel_time;
                d = e.length;
                at(pred_, e.from, e.to) = e.from;
            }
        }
        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < n_; ++i) {
                Seconds tik = at(time_, i, k);
                if (tik >= kInfTime) continue;
                double dik = at(dist_, i, k);
                for (int j = 0; j < n_; ++j) {
                    Seconds tkj = at(time_, k, j);
                    if (tkj >= kInfTime) continue;
                    Seconds cand_t = tik + tkj;
                    double cand_d = dik + at(dist_, k, j);
                    Seconds& t = at(time_, i, j);
                    double& d = at(dist_, i, j);
                    if (cand_t < t || (cand_t == t && cand_d < d)) {
                        t = cand_t;
                        d = cand_d;
                        at(pred_, i, j) = at(pred_, k, j);
                    }
                }
            }
    }

    int node_count() const { return n_; }

    bool reachable(NodeId i, NodeId j) const { return at(time_, i, j) < kInfTime; }

    Seconds time(NodeId i, NodeId j) const {
        Seconds t = at(time_, i, j);
        if (t >= kInfTime)
            throw UnreachableError("no path " + std::to_string(i) + " -> " + std::to_string(j));
        return t;
    }

    Meters distance(NodeId i, NodeId j) const {
        if (!reachable(i, j))
            throw UnreachableError("no path " + std::to_string(i) + " -> " + std::to_string(j));
        return at(dist_, i, j);
    }

    // Node sequence of the time-optimal path, inclusive of both endpoints.
    std::vector<NodeId> path_between(NodeId i, NodeId j) const {
        if (!reachable(i, j))
            throw UnreachableError("no path " + std::to_string(i) + " -> " + std::to_string(j));
        std::vector<NodeId> rev;
        NodeId cur = j;
        while (cur != i) {
            rev.push_back(cur);
            cur = at(pred_, i, cur);
        }
        rev.push_back(i);
        std::reverse(rev.begin(), rev.end());
        return rev;
    }

    // Fails fast if any origin-destination or vehicle-origin pair a scenario
    // touches is unreachable.
    void require_reachable(const std::vector<std::pair<NodeId, NodeId>>& pairs) const {
        for (const auto& [i, j] : pairs)
            if (!reachable(i, j))
                throw DisconnectedError("scenario touches unreachable pair " + std::to_string(i) +
                                        " -> " + std::to_string(j));
    }

private:
    template <typename T>
    T& at(std::vector<T>& m, NodeId i, NodeId j) {
        return m[static_cast<size_t>(i) * n_ + j];
    }
    template <typename T>
    const T& at(const std::vector<T>& m, NodeId i, NodeId j) const {
        return m[static_cast<size_t>(i) * n_ + j];
    }

    int n_;
    std::vector<Seconds> time_;
    std::vector<double> dist_;
    std::vector<NodeId> pred_;
};

inline ShortestPathTables all_pairs_shortest(const RoadNetwork& net) {
    return ShortestPathTables(net);
}

struct Zone {
    ZoneId id = -1;
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;
    NodeId centroid_node = kInvalidNode;
    std::vector<NodeId> nodes;  // sorted by node id
};

// Partition of the network nodes into rebalancing zones.
class ZoneSet {
public:
    ZoneSet(std::vector<Zone> zones, std::vector<ZoneId> node_to_zone, double cell_size)
        : zones_(std::move(zones)), node_to_zone_(std::move(node_to_zone)),
          cell_size_(cell_size) {}

    int zone_count() const { return static_cast<int>(zones_.size()); }
    const std::vector<Zone>& zones() const { return zones_; }
    const Zone& zone(ZoneId z) const { return zones_[z]; }
    ZoneId zone_of(NodeId n) const { return node_to_zone_[n]; }
    double cell_size() const { return cell_size_; }

private:
    std::vector<Zone> zones_;
    std::vector<ZoneId> node_to_zone_;
    double cell_size_;
};

namespace detail {

inline ZoneSet finish_zones(const RoadNetwork& net, std::vector<Zone> zones,
                            std::vector<ZoneId> node_to_zone, double cell_size) {
    for (auto& z : zones) {
        double cx = 0.5 * (z.x_min + z.x_max);
        double cy = 0.5 * (z.y_min + z.y_max);
        NodeId best = kInvalidNode;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (NodeId n : z.nodes) {
            double dx = net.node(n).x - cx, dy = net.node(n).y - cy;
            double d2 = dx * dx + dy * dy;
            if (d2 < best_d2 || (d2 == best_d2 && n < best)) {
                best_d2 = d2;
                best = n;
            }
        }
        z.centroid_node = best;
    }
    return ZoneSet(std::move(zones), std::move(node_to_zone), cell_size);
}

}  // namespace detail

// Grid partition of the node bounding box. Cells without nodes are dropped;
// a node exactly on a grid line belongs to the lower-indexed cell.
inline ZoneSet build_grid_zones(const RoadNetwork& net, double cell_size) {
    if (!(cell_size > 0.0)) throw ParamViolationError("cell_size must be positive");
    if (net.node_count() == 0) throw NoNodesInBoundingBoxError("network has no nodes");

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& n : net.nodes()) {
        x_min = std::min(x_min, n.x);
        x_max = std::max(x_max, n.x);
        y_min = std::min(y_min, n.y);
        y_max = std::max(y_max, n.y);
    }

    auto cell_index = [cell_size](double v, double lo) {
        double offset = v - lo;
        long idx = static_cast<long>(std::floor(offset / cell_size));
        // Border tie-break: a node sitting exactly on a grid line goes to the
        // lower cell.
        if (idx > 0 && offset == static_cast<double>(idx) * cell_size) --idx;
        return idx < 0 ? 0L : idx;
    };

    std::map<std::pair<long, long>, std::vector<NodeId>> cells;  // (row, col) -> nodes
    for (const auto& n : net.nodes()) {
        long row = cell_index(n.y, y_min);
        long col = cell_index(n.x, x_min);
        cells[{row, col}].push_back(n.id);
    }

    std::vector<Zone> zones;
    std::vector<ZoneId> node_to_zone(net.node_count(), -1);
    for (auto& [rc, nodes] : cells) {
        Zone z;
        z.id = static_cast<ZoneId>(zones.size());
        z.x_min = x_min + static_cast<double>(rc.second) * cell_size;
        z.x_max = z.x_min + cell_size;
        z.y_min = y_min + static_cast<double>(rc.first) * cell_size;
        z.y_max = z.y_min + cell_size;
        std::sort(nodes.begin(), nodes.end());
        z.nodes = nodes;
        for (NodeId n : nodes) node_to_zone[n] = z.id;
        zones.push_back(std::move(z));
    }
    return detail::finish_zones(net, std::move(zones), std::move(node_to_zone), cell_size);
}

struct ZoneRect {
    double x_min, y_min, x_max, y_max;
};

// Explicit rectangle partition. Rectangles are taken in order; a node goes
// to the first rectangle containing it. Every node must be covered.
inline ZoneSet build_rect_zones(const RoadNetwork& net, const std::vector<ZoneRect>& rects) {
    if (rects.empty()) throw EmptyZoneSetError("no zone rectangles given");
    std::vector<Zone> zones;
    std::vector<ZoneId> node_to_zone(net.node_count(), -1);
    std::vector<std::vector<NodeId>> members(rects.size());
    for (const auto& n : net.nodes()) {
        bool placed = false;
        for (size_t i = 0; i < rects.size(); ++i) {
            const auto& r = rects[i];
            if (n.x >= r.x_min && n.x <= r.x_max && n.y >= r.y_min && n.y <= r.y_max) {
                members[i].push_back(n.id);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw InputError("node " + std::to_string(n.id) + " not covered by any zone rectangle");
    }
    for (size_t i = 0; i < rects.size(); ++i) {
        if (members[i].empty()) continue;
        Zone z;
        z.id = static_cast<ZoneId>(zones.size());
        z.x_min = rects[i].x_min;
        z.x_max = rects[i].x_max;
        z.y_min = rects[i].y_min;
        z.y_max = rects[i].y_max;
        z.nodes = members[i];
        for (NodeId n : z.nodes) node_to_zone[n] = z.id;
        zones.push_back(std::move(z));
    }
    if (zones.empty()) throw EmptyZoneSetError("all zone rectangles are empty");
    return detail::finish_zones(net, std::move(zones), std::move(node_to_zone), 0.0);
}

}  // namespace ridepool
