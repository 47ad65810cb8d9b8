#include "ridepool/routing.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <catch.hpp>

using namespace ridepool;

namespace {

RoutingInstance single_request_instance(const ShortestPathTables& t) {
    RoutingInstance inst;
    inst.depot = 2;
    inst.start_time = 0;
    inst.capacity = 4;
    inst.max_wait = 420;
    inst.max_delay = 900;
    inst.requests.push_back({0, 2, 6, 0, t.time(2, 6), false, 0});
    return inst;
}

// Random instances with 2-4 requests, sometimes onboard passengers, windows
// tight enough that a healthy share comes out infeasible.
RoutingInstance random_instance(fixtures::Rng& rng, const ShortestPathTables& t, int n_nodes) {
    RoutingInstance inst;
    inst.depot = static_cast<NodeId>(rng.next_below(n_nodes));
    inst.start_time = static_cast<Seconds>(rng.next_below(100));
    inst.capacity = 2 + static_cast<int>(rng.next_below(3));
    inst.max_wait = 120 + static_cast<Seconds>(rng.next_below(500));
    inst.max_delay = 120 + static_cast<Seconds>(rng.next_below(900));
    int n_requests = 2 + static_cast<int>(rng.next_below(3));
    int onboard = static_cast<int>(rng.next_below(2));
    for (int i = 0; i < n_requests; ++i) {
        RoutingRequestSpec r;
        r.id = i;
        r.dropoff_node = static_cast<NodeId>(rng.next_below(n_nodes));
        if (i < onboard && static_cast<int>(rng.next_below(2)) == 0) {
            r.onboard = true;
            r.pickup_node = kInvalidNode;
            NodeId origin = static_cast<NodeId>(rng.next_below(n_nodes));
            while (origin == r.dropoff_node)
                origin = static_cast<NodeId>(rng.next_below(n_nodes));
            r.direct_time = t.time(origin, r.dropoff_node);
            r.actual_pickup = -static_cast<Seconds>(rng.next_below(200));
            r.arrival_time = r.actual_pickup - static_cast<Seconds>(rng.next_below(100));
        } else {
            r.pickup_node = static_cast<NodeId>(rng.next_below(n_nodes));
            while (r.pickup_node == r.dropoff_node)
                r.pickup_node = static_cast<NodeId>(rng.next_below(n_nodes));
            r.arrival_time = static_cast<Seconds>(rng.next_below(300));
            r.direct_time = t.time(r.pickup_node, r.dropoff_node);
        }
        inst.requests.push_back(r);
    }
    return inst;
}

}  // namespace

TEST_CASE("solve_darp on a single request from its origin") {
    RoadNetwork net = fixtures::line_network(11, 1000.0, 60);
    ShortestPathTables t(net);
    RoutingInstance inst = single_request_instance(t);
    auto s = solve_darp(inst, t);
    REQUIRE(s.has_value());
    REQUIRE(s->stops.size() == 2);
    REQUIRE(s->stops[0].kind == StopKind::Pickup);
    REQUIRE(s->stops[1].kind == StopKind::Dropoff);
    REQUIRE(s->total_vmt == Approx(t.distance(2, 6)).margin(1e-9));
    REQUIRE(s->stops[0].load_after == 1);
    REQUIRE(s->stops[1].load_after == 0);
}

TEST_CASE("solve_darp returns infeasible when windows forbid any order") {
    RoadNetwork net = fixtures::line_network(11, 1000.0, 60);
    ShortestPathTables t(net);
    RoutingInstance inst;
    inst.depot = 0;
    inst.start_time = 0;
    inst.capacity = 4;
    inst.max_wait = 60;
    inst.max_delay = 0;
    // Opposite directions, zero delay allowed, a 60 s wait window: no order
    // can serve both.
    inst.requests.push_back({0, 1, 5, 0, t.time(1, 5), false, 0});
    inst.requests.push_back({1, 9, 5, 0, t.time(9, 5), false, 0});
    REQUIRE_FALSE(solve_darp(inst, t).has_value());
}

TEST_CASE("solve_darp equals the unpruned permutation oracle") {
    Rng rng(101);
    RoadNetwork net = fixtures::random_network(rng, 15, 40);
    ShortestPathTables t(net);
    int feasible = 0, infeasible = 0;
    for (int rep = 0; rep < 1200; ++rep) {
        RoutingInstance inst = random_instance(rng, t, 15);
        auto mine = solve_darp(inst, t);
        oracles::DarpOracleResult ref = oracles::darp_oracle(inst, t);
        REQUIRE(mine.has_value() == ref.feasible);
        if (ref.feasible) {
            ++feasible;
            REQUIRE(mine->total_vmt == Approx(ref.vmt).margin(1e-6));
            REQUIRE(inst.start_time + mine->duration == ref.completion);
        } else {
            ++infeasible;
        }
    }
    // The generator must exercise both outcomes.
    REQUIRE(feasible > 100);
    REQUIRE(infeasible > 100);
}

TEST_CASE("solve_darp is deterministic and monotone under request removal") {
    Rng rng(55);
    RoadNetwork net = fixtures::random_network(rng, 12, 30);
    ShortestPathTables t(net);
    for (int rep = 0; rep < 200; ++rep) {
        RoutingInstance inst = random_instance(rng, t, 12);
        auto a = solve_darp(inst, t);
        auto b = solve_darp(inst, t);
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            REQUIRE(a->total_vmt == b->total_vmt);
            REQUIRE(a->duration == b->duration);
            REQUIRE(a->stops.size() == b->stops.size());
            for (size_t i = 0; i < a->stops.size(); ++i) {
                REQUIRE(a->stops[i].node == b->stops[i].node);
                REQUIRE(a->stops[i].request == b->stops[i].request);
                REQUIRE(a->stops[i].planned_time == b->stops[i].planned_time);
            }
            // Removing any non-onboard request keeps the rest feasible.
            for (size_t drop = 0; drop < inst.requests.size(); ++drop) {
                if (inst.requests[drop].onboard) continue;
                RoutingInstance smaller = inst;
                smaller.requests.erase(smaller.requests.begin() + drop);
                REQUIRE(solve_darp(smaller, t).has_value());
            }
        }
    }
}

TEST_CASE("schedules re-simulate to their planned times") {
    Rng rng(77);
    RoadNetwork net = fixtures::random_network(rng, 15, 40);
    ShortestPathTables t(net);
    int checked = 0;
    for (int rep = 0; rep < 300 && checked < 100; ++rep) {
        RoutingInstance inst = random_instance(rng, t, 15);
        auto s = solve_darp(inst, t);
        if (!s) continue;
        ++checked;
        NodeId node = inst.depot;
        Seconds time = inst.start_time;
        for (const auto& stop : s->stops) {
            std::vector<NodeId> path = t.path_between(node, stop.node);
            for (size_t h = 1; h < path.size(); ++h) time += t.time(path[h - 1], path[h]);
            if (stop.kind == StopKind::Pickup)
                time = std::max(time, inst.requests[stop.request].arrival_time);
            REQUIRE(time == stop.planned_time);
            node = stop.node;
        }
    }
    REQUIRE(checked == 100);
}

TEST_CASE("pairwise_shareable basics") {
    RoadNetwork net = fixtures::line_network(11, 1000.0, 60);
    ShortestPathTables t(net);
    SECTION("identical requests share") {
        Request a = fixtures::make_request(0, 2, 7, 0, t);
        Request b = fixtures::make_request(1, 2, 7, 0, t);
        REQUIRE(pairwise_shareable(a, b, 0, 4, 420, 900, t));
    }
    SECTION("opposite directions with zero delay do not share") {
        Request a = fixtures::make_request(0, 4, 0, 0, t);
        Request b = fixtures::make_request(1, 6, 10, 0, t);
        REQUIRE_FALSE(pairwise_shareable(a, b, 0, 4, 420, 0, t));
    }
}

TEST_CASE("pairwise_shareable agrees with the four-ordering oracle") {
    Rng rng(19);
    RoadNetwork net = fixtures::random_network(rng, 15, 40);
    ShortestPathTables t(net);
    int shareable = 0;
    for (int rep = 0; rep < 500; ++rep) {
        NodeId o1 = static_cast<NodeId>(rng.next_below(15));
        NodeId d1 = static_cast<NodeId>(rng.next_below(15));
        NodeId o2 = static_cast<NodeId>(rng.next_below(15));
        NodeId d2 = static_cast<NodeId>(rng.next_below(15));
        if (o1 == d1 || o2 == d2) continue;
        Seconds now = 200;
        Request a = fixtures::make_request(0, o1, d1, static_cast<Seconds>(rng.next_below(200)), t);
        Request b = fixtures::make_request(1, o2, d2, static_cast<Seconds>(rng.next_below(200)), t);
        Seconds omega = 100 + static_cast<Seconds>(rng.next_below(400));
        Seconds delta = static_cast<Seconds>(rng.next_below(600));
        bool mine = pairwise_shareable(a, b, now, 4, omega, delta, t);
        bool ref = oracles::pairwise_oracle(a, b, now, omega, delta, t);
        REQUIRE(mine == ref);
        if (mine) ++shareable;
    }
    REQUIRE(shareable > 20);
}

TEST_CASE("insertion_feasible delegates to the routing solver") {
    RoadNetwork net = fixtures::line_network(11, 1000.0, 60);
    ShortestPathTables t(net);
    EpochParams params;
    params.capacity = 4;
    params.max_wait = 420;
    params.max_delay = 900;

    SECTION("idle vehicle at the origin") {
        VehicleSnapshot v;
        v.id = 0;
        v.capacity = 4;
        v.node = 3;
        v.available_time = 0;
        Request r = fixtures::make_request(0, 3, 8, 0, t);
        auto s = insertion_feasible(v, {r}, params, t);
        REQUIRE(s.has_value());
        REQUIRE(s->total_vmt == Approx(t.distance(3, 8)).margin(1e-9));
    }
    SECTION("full vehicle cannot pick up before required dropoffs") {
        VehicleSnapshot v;
        v.id = 0;
        v.capacity = 2;
        v.node = 0;
        v.available_time = 0;
        // Two passengers onboard heading far right with tight delay; the new
        // pickup at the left would push them over their delay bound.
        v.committed.push_back({10, kInvalidNode, 10, 0, t.time(0, 10), true, 0});
        v.committed.push_back({11, kInvalidNode, 9, 0, t.time(0, 9), true, 0});
        Request r = fixtures::make_request(0, 0, 5, 0, t);
        EpochParams tight = params;
        tight.max_delay = 0;
        auto s = insertion_feasible(v, {r}, tight, t);
        REQUIRE_FALSE(s.has_value());
    }
    SECTION("randomized states match the oracle") {
        Rng rng(33);
        RoadNetwork rnet = fixtures::random_network(rng, 12, 30);
        ShortestPathTables rt(rnet);
        for (int rep = 0; rep < 300; ++rep) {
            RoutingInstance inst = random_instance(rng, rt, 12);
            VehicleSnapshot v;
            v.id = 0;
            v.capacity = inst.capacity;
            v.node = inst.depot;
            v.available_time = inst.start_time;
            std::vector<Request> trip;
            for (const auto& r : inst.requests) {
                if (r.onboard) {
                    v.committed.push_back(r);
                } else {
                    Request q;
                    q.id = r.id;
                    q.origin = r.pickup_node;
                    q.destination = r.dropoff_node;
                    q.arrival_time = r.arrival_time;
                    q.direct_time = r.direct_time;
                    trip.push_back(q);
                }
            }
            EpochParams p;
            p.capacity = inst.capacity;
            p.max_wait = inst.max_wait;
            p.max_delay = inst.max_delay;
            auto mine = insertion_feasible(v, trip, p, rt);
            oracles::DarpOracleResult ref = oracles::darp_oracle(inst, rt);
            REQUIRE(mine.has_value() == ref.feasible);
            if (ref.feasible) REQUIRE(mine->total_vmt == Approx(ref.vmt).margin(1e-6));
        }
    }
}
