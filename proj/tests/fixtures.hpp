#pragma once

#include "ridepool/demand.hpp"
#include "ridepool/network.hpp"
#include "ridepool/rng.hpp"

#include <vector>

namespace fixtures {

using namespace ridepool;

// Line of n nodes spaced `spacing_m` apart on the x axis, bidirectional
// edges, `hop_s` seconds per hop.
inline RoadNetwork line_network(int n, double spacing_m = 1000.0, int64_t hop_s = 60) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int i = 0; i < n; ++i) nodes.push_back({i, i * spacing_m, 0.0});
    for (int i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1, spacing_m, static_cast<double>(hop_s)});
        edges.push_back({i + 1, i, spacing_m, static_cast<double>(hop_s)});
    }
    return load_network(nodes, edges);
}

// n x n grid with 4-neighbor bidirectional edges.
inline RoadNetwork grid_network(int n, double spacing_m = 500.0, int64_t hop_s = 50) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            nodes.push_back({r * n + c, c * spacing_m, r * spacing_m});
    auto both = [&](int a, int b) {
        edges.push_back({a, b, spacing_m, static_cast<double>(hop_s)});
        edges.push_back({b, a, spacing_m, static_cast<double>(hop_s)});
    };
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            if (c + 1 < n) both(r * n + c, r * n + c + 1);
            if (r + 1 < n) both(r * n + c, (r + 1) * n + c);
        }
    return load_network(nodes, edges);
}

// Strongly connected random graph: a ring plus random chords, integer
// weights so distance sums are exact.
inline RoadNetwork random_network(Rng& rng, int n, int extra_edges) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int i = 0; i < n; ++i)
        nodes.push_back({i, static_cast<double>(rng.next_below(10000)),
                         static_cast<double>(rng.next_below(10000))});
    for (int i = 0; i < n; ++i) {
        int t = static_cast<int>(rng.next_int(10, 120));
        int len = static_cast<int>(rng.next_int(50, 2000));
        edges.push_back({i, (i + 1) % n, static_cast<double>(len), static_cast<double>(t)});
    }
    for (int e = 0; e < extra_edges; ++e) {
        int a = static_cast<int>(rng.next_below(n));
        int b = static_cast<int>(rng.next_below(n));
        if (a == b) continue;
        int t = static_cast<int>(rng.next_int(10, 120));
        int len = static_cast<int>(rng.next_int(50, 2000));
        edges.push_back({a, b, static_cast<double>(len), static_cast<double>(t)});
    }
    return load_network(nodes, edges);
}

inline Request make_request(RequestId id, NodeId o, NodeId d, Seconds t,
                            const ShortestPathTables& tables) {
    Request r;
    r.id = id;
    r.origin = o;
    r.destination = d;
    r.arrival_time = t;
    r.direct_time = tables.time(o, d);
    return r;
}

}  // namespace fixtures
