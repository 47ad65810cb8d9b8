#include "ridepool/graphs.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <catch.hpp>
#include <sstream>

using namespace ridepool;

namespace {

VehicleSnapshot idle_vehicle(VehicleId id, NodeId node, int capacity = 4) {
    VehicleSnapshot v;
    v.id = id;
    v.capacity = capacity;
    v.node = node;
    v.available_time = 0;
    v.cls = VehicleClass::Idle;
    return v;
}

}  // namespace

TEST_CASE("PRS graph holds exactly the shareable pairs") {
    RoadNetwork net = fixtures::line_network(11, 1000.0, 60);
    ShortestPathTables t(net);
    EpochParams params;

    SECTION("one request, no edges") {
        std::vector<Request> reqs = {fixtures::make_request(0, 1, 5, 0, t)};
        PRSGraph prs = build_prs_graph(reqs, 0, params, t);
        REQUIRE(prs.edge_count() == 0);
    }
    SECTION("identical requests form a complete graph") {
        std::vector<Request> reqs;
        for (int i = 0; i < 5; ++i) reqs.push_back(fixtures::make_request(i, 2, 8, 0, t));
        PRSGraph prs = build_prs_graph(reqs, 0, params, t);
        REQUIRE(prs.edge_count() == 10);
    }
    SECTION("random request sets match the exhaustive pairwise oracle") {
        Rng rng(3);
        RoadNetwork rnet = fixtures::random_network(rng, 15, 40);
        ShortestPathTables rt(rnet);
        std::vector<Request> reqs;
        for (int i = 0; i < 50; ++i) {
            NodeId o = static_cast<NodeId>(rng.next_below(15));
            NodeId d = static_cast<NodeId>(rng.next_below(15));
            if (o == d) d = (d + 1) % 15;
            reqs.push_back(fixtures::make_request(i, o, d,
                                                  static_cast<Seconds>(rng.next_below(120)), rt));
        }
        EpochParams p;
        p.max_wait = 300;
        p.max_delay = 400;
        PRSGraph prs = build_prs_graph(reqs, 120, p, rt);
        int edges = 0;
        for (size_t i = 0; i < reqs.size(); ++i)
            for (size_t j = i + 1; j < reqs.size(); ++j) {
                bool ref = oracles::pairwise_oracle(reqs[i], reqs[j], 120, p.max_wait,
                                                    p.max_delay, rt);
                REQUIRE(prs.adjacent(reqs[i].id, reqs[j].id) == ref);
                if (ref) ++edges;
            }
        REQUIRE(static_cast<size_t>(edges) == prs.edge_count());
        REQUIRE(edges > 0);
    }
}

TEST_CASE("trip enumeration grows cliques that some vehicle can serve") {
    RoadNetwork net = fixtures::line_network(11, 1000.0, 60);
    ShortestPathTables t(net);
    EpochParams params;
    params.max_wait = 1200;
    params.max_delay = 1800;

    SECTION("no PRS edges leaves singletons") {
        std::vector<Request> reqs;
        for (int i = 0; i < 5; ++i)
            reqs.push_back(fixtures::make_request(i, i, 10 - i, 0, t));
        PRSGraph prs(std::vector<RequestId>{0, 1, 2, 3, 4});  // no edges
        std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 5)};
        TripCatalog cat = enumerate_trips(prs, reqs, fleet, params, t);
        REQUIRE(cat.trips.size() == 5);
        for (const auto& trip : cat.trips) REQUIRE(trip.size() == 1);
    }
    SECTION("a PRS triangle with a nearby empty vehicle yields all subsets") {
        std::vector<Request> reqs = {fixtures::make_request(0, 2, 8, 0, t),
                                     fixtures::make_request(1, 3, 9, 0, t),
                                     fixtures::make_request(2, 4, 10, 0, t)};
        PRSGraph prs = build_prs_graph(reqs, 0, params, t);
        REQUIRE(prs.edge_count() == 3);
        std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 2)};
        TripCatalog cat = enumerate_trips(prs, reqs, fleet, params, t);
        REQUIRE(cat.trips.size() == 7);  // 3 singles, 3 pairs, 1 triple
        int by_size[4] = {0, 0, 0, 0};
        for (const auto& trip : cat.trips) by_size[trip.size()] += 1;
        REQUIRE(by_size[1] == 3);
        REQUIRE(by_size[2] == 3);
        REQUIRE(by_size[3] == 1);
        // Every retained trip is backed by a feasible insertion.
        for (const auto& trip : cat.trips)
            REQUIRE(cat.feasible.count({0, trip.id}) == 1);
    }
    SECTION("unreachable pickups leave no trips") {
        EpochParams tight = params;
        tight.max_wait = 30;  // vehicle cannot reach any origin in time
        std::vector<Request> reqs = {fixtures::make_request(0, 9, 10, 0, t),
                                     fixtures::make_request(1, 8, 10, 0, t)};
        PRSGraph prs = build_prs_graph(reqs, 0, tight, t);
        std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 0)};
        TripCatalog cat = enumerate_trips(prs, reqs, fleet, tight, t);
        REQUIRE(cat.trips.empty());
    }
    SECTION("per-size budget caps are honored") {
        std::vector<Request> reqs;
        for (int i = 0; i < 6; ++i) reqs.push_back(fixtures::make_request(i, 2, 8, 0, t));
        PRSGraph prs = build_prs_graph(reqs, 0, params, t);
        EpochParams capped = params;
        capped.max_trips_per_size = 4;
        std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 2)};
        TripCatalog cat = enumerate_trips(prs, reqs, fleet, capped, t);
        int by_size[5] = {0, 0, 0, 0, 0};
        for (const auto& trip : cat.trips) by_size[std::min(trip.size(), 4)] += 1;
        REQUIRE(by_size[1] == 4);
        REQUIRE(by_size[2] <= 4);
    }
}

TEST_CASE("RTVZ graph shape") {
    RoadNetwork net = fixtures::grid_network(9, 500.0, 50);
    ShortestPathTables t(net);
    ZoneSet zones = build_grid_zones(net, 1500.0);
    REQUIRE(zones.zone_count() == 9);
    EpochParams params;
    params.horizon = 600;

    SECTION("idle vehicle with no requests gets one edge per zone") {
        std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 0)};
        TripCatalog empty_cat;
        RTVZGraph g = build_rtvz_graph(empty_cat, fleet, {}, zones, t, 0, params);
        int zone_edges = 0;
        for (const auto& e : g.edges())
            if (e.is_zone()) ++zone_edges;
        REQUIRE(zone_edges == 9);
        // Self-zone edge: zero cost, full capacity in the own zone.
        const RtvzEdge& self = g.edges()[0];
        REQUIRE(self.is_zone());
        REQUIRE(self.is_noop());
        REQUIRE(self.u == 0.0);
        REQUIRE(self.y.of(zones.zone_of(0)) == Approx(4.0));
        // Other-zone edges cost the distance to the centroid.
        for (const auto& e : g.edges()) {
            if (!e.is_zone() || e.is_noop()) continue;
            REQUIRE(e.u ==
                    Approx(t.distance(0, zones.zone(e.zone).centroid_node)).margin(1e-9));
        }
    }
    SECTION("idle vehicle at a request origin gets the direct trip edge") {
        std::vector<Request> reqs = {fixtures::make_request(0, 10, 60, 0, t)};
        std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 10)};
        PRSGraph prs = build_prs_graph(reqs, 0, params, t);
        TripCatalog cat = enumerate_trips(prs, reqs, fleet, params, t);
        RTVZGraph g = build_rtvz_graph(cat, fleet, reqs, zones, t, 0, params);
        bool found = false;
        for (const auto& e : g.edges()) {
            if (!e.is_trip()) continue;
            REQUIRE(e.u == Approx(t.distance(10, 60)).margin(1e-9));
            found = true;
        }
        REQUIRE(found);
        // A dummy edge exists for the request.
        int dummies = 0;
        for (const auto& e : g.edges())
            if (e.is_dummy()) ++dummies;
        REQUIRE(dummies == 1);
    }
    SECTION("zones missing when disabled, keep edge appears instead") {
        EpochParams noz = params;
        noz.include_zone_edges = false;
        std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 0)};
        TripCatalog empty_cat;
        RTVZGraph g = build_rtvz_graph(empty_cat, fleet, {}, zones, t, 0, noz);
        REQUIRE(g.edges().size() == 1);
        REQUIRE(g.edges()[0].is_keep());
        REQUIRE(g.edges()[0].is_noop());
        REQUIRE(g.edges()[0].y.of(zones.zone_of(0)) == Approx(4.0));
    }
}

TEST_CASE("RTVZ invariants on randomized instances") {
    Rng rng(8);
    RoadNetwork net = fixtures::grid_network(7, 500.0, 50);
    ShortestPathTables t(net);
    ZoneSet zones = build_grid_zones(net, 1500.0);
    EpochParams params;
    params.max_wait = 600;
    params.max_delay = 900;

    for (int rep = 0; rep < 20; ++rep) {
        Seconds now = 100;
        std::vector<VehicleSnapshot> fleet;
        int n_vehicles = 2 + static_cast<int>(rng.next_below(3));
        for (int i = 0; i < n_vehicles; ++i) {
            VehicleSnapshot v = idle_vehicle(i, static_cast<NodeId>(rng.next_below(49)));
            v.available_time = now;
            int cls = static_cast<int>(rng.next_below(3));
            if (cls == 1) {
                v.cls = VehicleClass::Rebalancing;
                v.rebalance_target = zones.zone(rng.next_below(zones.zone_count())).centroid_node;
            } else if (cls == 2) {
                // Active vehicle with one onboard passenger on a committed
                // direct dropoff.
                v.cls = VehicleClass::Active;
                NodeId dest = static_cast<NodeId>(rng.next_below(49));
                if (dest == v.node) dest = (dest + 1) % 49;
                v.committed.push_back({100 + i, kInvalidNode, dest, now - 60,
                                       t.time(v.node, dest), true, now - 30});
                Stop stop;
                stop.node = dest;
                stop.kind = StopKind::Dropoff;
                stop.request = 100 + i;
                stop.planned_time = now + t.time(v.node, dest);
                stop.load_after = 0;
                v.committed_schedule.stops = {stop};
                v.committed_schedule.total_vmt = t.distance(v.node, dest);
                v.committed_schedule.duration = t.time(v.node, dest);
            }
            fleet.push_back(v);
        }
        std::vector<Request> reqs;
        int n_reqs = 1 + static_cast<int>(rng.next_below(4));
        for (int i = 0; i < n_reqs; ++i) {
            NodeId o = static_cast<NodeId>(rng.next_below(49));
            NodeId d = static_cast<NodeId>(rng.next_below(49));
            if (o == d) d = (d + 1) % 49;
            reqs.push_back(fixtures::make_request(i, o, d,
                                                  static_cast<Seconds>(rng.next_below(100)), t));
        }
        PRSGraph prs = build_prs_graph(reqs, now, params, t);
        TripCatalog cat = enumerate_trips(prs, reqs, fleet, params, t);
        RTVZGraph g = build_rtvz_graph(cat, fleet, reqs, zones, t, now, params);

        std::map<VehicleId, const VehicleSnapshot*> by_id;
        for (const auto& v : fleet) by_id[v.id] = &v;

        int noops = 0;
        for (const auto& e : g.edges()) {
            if (e.is_noop()) {
                ++noops;
                REQUIRE(e.u == 0.0);
            }
            if (e.is_zone() && !e.is_noop())
                REQUIRE(by_id.at(e.vehicle)->cls == VehicleClass::Idle);
            if (e.is_trip()) {
                // Present trip edges are certified by a feasible insertion.
                std::vector<Request> members;
                for (RequestId rid : g.trips[e.trip].requests)
                    for (const auto& r : reqs)
                        if (r.id == rid) members.push_back(r);
                auto s = insertion_feasible(*by_id.at(e.vehicle), members, params, t);
                REQUIRE(s.has_value());
                REQUIRE(s->total_vmt == Approx(e.schedule.total_vmt).margin(1e-9));
            }
            // Supply vectors stay within physical bounds.
            double total = 0.0;
            for (const auto& [z, yv] : e.y.y) {
                REQUIRE(yv >= -1e-9);
                REQUIRE(yv <= 4.0 + 1e-9);
                total += yv;
            }
            REQUIRE(total <= 4.0 + 1e-9);
        }
        REQUIRE(noops == n_vehicles);

        // Absent singleton edges really are infeasible.
        for (const auto& v : fleet)
            for (const auto& trip : g.trips) {
                if (trip.size() != 1) continue;
                bool present = false;
                for (const auto& e : g.edges())
                    if (e.is_trip() && e.vehicle == v.id && e.trip == trip.id) present = true;
                std::vector<Request> members;
                for (const auto& r : reqs)
                    if (r.id == trip.requests[0]) members.push_back(r);
                bool feasible = insertion_feasible(v, members, params, t).has_value();
                REQUIRE(present == feasible);
            }

        // Deterministic rebuild.
        RTVZGraph g2 = build_rtvz_graph(cat, fleet, reqs, zones, t, now, params);
        REQUIRE(g2.edges().size() == g.edges().size());
        for (size_t i = 0; i < g.edges().size(); ++i) {
            REQUIRE(g2.edges()[i].vehicle == g.edges()[i].vehicle);
            REQUIRE(g2.edges()[i].kind == g.edges()[i].kind);
            REQUIRE(g2.edges()[i].u == g.edges()[i].u);
        }
    }
}

TEST_CASE("graph dump is readable text") {
    RoadNetwork net = fixtures::line_network(5, 1000.0, 60);
    ShortestPathTables t(net);
    ZoneSet zones = build_grid_zones(net, 10000.0);
    EpochParams params;
    std::vector<VehicleSnapshot> fleet = {idle_vehicle(0, 0)};
    std::vector<Request> reqs = {fixtures::make_request(0, 1, 3, 0, t)};
    PRSGraph prs = build_prs_graph(reqs, 0, params, t);
    TripCatalog cat = enumerate_trips(prs, reqs, fleet, params, t);
    RTVZGraph g = build_rtvz_graph(cat, fleet, reqs, zones, t, 0, params);
    std::ostringstream os;
    g.dump(os);
    std::string text = os.str();
    REQUIRE(text.find("rtvz-graph") != std::string::npos);
    REQUIRE(text.find("L -> r0") != std::string::npos);
    REQUIRE(text.find("u_km=") != std::string::npos);
}
