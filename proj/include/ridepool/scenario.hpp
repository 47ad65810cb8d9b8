#pragma once

#include "ridepool/core.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/metrics.hpp"
#include "ridepool/network.hpp"
#include "ridepool/rng.hpp"
#include "ridepool/simulator.hpp"

#include "json.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ridepool {

using json = nlohmann::json;

struct ZoneConfig {
    double grid_cell_m = 0.0;          // > 0: grid partition
    std::vector<ZoneRect> rectangles;  // else explicit rectangles
};

struct Scenario {
    std::string nodes_path;
    std::string edges_path;
    std::string requests_path;
    std::string rates_path;
    Seconds rates_interval = 900;
    ZoneConfig zones;
    SimConfig sim;
};

inline json sim_config_to_json(const SimConfig& c) {
    json j;
    j["variant"] = variant_name(c.variant);
    j["fleet"] = c.fleet_size;
    j["seed"] = c.seed;
    j["params"] = {{"epoch_s", c.epoch},
                   {"horizon_s", c.horizon},
                   {"max_wait_s", c.max_wait},
                   {"max_delay_s", c.max_delay},
                   {"capacity", c.capacity},
                   {"alpha", c.alpha},
                   {"beta", c.beta},
                   {"gamma", c.gamma},
                   {"solver_budget_s", c.solver_budget_s},
                   {"max_trips_per_size", c.max_trips_per_size},
                   {"allow_reassignment", c.allow_reassignment}};
    if (!c.alpha_by_zone.empty()) {
        json az;
        for (const auto& [z, a] : c.alpha_by_zone) az[std::to_string(z)] = a;
        j["params"]["alpha_by_zone"] = az;
    }
    j["sim"] = {{"start_s", c.start_time},
                {"end_s", c.end_time},
                {"measure_start_s", c.measure_start},
                {"measure_end_s", c.measure_end}};
    return j;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scenario config: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw MalformedRecordError(path + ": " + e.what());
    }
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    Scenario s;
    s.nodes_path = resolve(j.at("network").at("nodes").get<std::string>());
    s.edges_path = resolve(j.at("network").at("edges").get<std::string>());
    s.requests_path = resolve(j.at("requests").get<std::string>());
    s.rates_path = resolve(j.at("rates").get<std::string>());
    s.rates_interval = j.value("rates_interval_s", 900);

    const json& jz = j.at("zones");
    if (jz.contains("grid_cell_m")) {
        s.zones.grid_cell_m = jz.at("grid_cell_m").get<double>();
    } else {
        for (const auto& r : jz.at("rectangles"))
            s.zones.rectangles.push_back(
                {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                 r.at(3).get<double>()});
    }

    SimConfig& c = s.sim;
    c.variant = variant_from_name(j.value("variant", std::string("integrated")));
    c.fleet_size = j.at("fleet").get<int>();
    c.seed = j.value("seed", 1ULL);
    if (j.contains("params")) {
        const json& p = j.at("params");
        c.epoch = p.value("epoch_s", c.epoch);
        c.horizon = p.value("horizon_s", c.horizon);
        c.max_wait = p.value("max_wait_s", c.max_wait);
        c.max_delay = p.value("max_delay_s", c.max_delay);
        c.capacity = p.value("capacity", c.capacity);
        c.alpha = p.value("alpha", c.alpha);
        c.beta = p.value("beta", c.beta);
        c.gamma = p.value("gamma", c.gamma);
        c.solver_budget_s = p.value("solver_budget_s", c.solver_budget_s);
        c.max_trips_per_size = p.value("max_trips_per_size", c.max_trips_per_size);
        c.allow_reassignment = p.value("allow_reassignment", c.allow_reassignment);
        if (p.contains("alpha_by_zone"))
            for (const auto& [k, v] : p.at("alpha_by_zone").items())
                c.alpha_by_zone[static_cast<ZoneId>(std::stoi(k))] = v.get<double>();
    }
    const json& w = j.at("sim");
    c.start_time = w.at("start_s").get<Seconds>();
    c.end_time = w.at("end_s").get<Seconds>();
    c.measure_start = w.value("measure_start_s", c.start_time);
    c.measure_end = w.value("measure_end_s", c.end_time);
    return s;
}

struct LoadedScenario {
    RoadNetwork net;
    ShortestPathTables tables;
    ZoneSet zones;
    RateTable rates;
    std::vector<Request> requests;
};

inline LoadedScenario load_scenario_data(const Scenario& s) {
    RoadNetwork net = load_network_files(s.nodes_path, s.edges_path);
    ShortestPathTables tables(net);
    ZoneSet zones = s.zones.grid_cell_m > 0.0 ? build_grid_zones(net, s.zones.grid_cell_m)
                                              : build_rect_zones(net, s.zones.rectangles);
    RateTable rates = RateTable::from_file(s.rates_path, s.rates_interval);
    std::vector<Request> requests = load_requests_file(s.requests_path, net, tables);
    return LoadedScenario{std::move(net), std::move(tables), std::move(zones),
                          std::move(rates), std::move(requests)};
}

// Input lint: every check the engine would otherwise fail on mid-run.
inline std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> findings;
    try {
        LoadedScenario data = load_scenario_data(s);
        for (NodeId i = 0; i < data.net.node_count(); ++i)
            for (NodeId j = 0; j < data.net.node_count(); ++j)
                if (!data.tables.reachable(i, j)) {
                    findings.push_back("network not strongly connected: no path " +
                                       std::to_string(data.net.external_id(i)) + " -> " +
                                       std::to_string(data.net.external_id(j)));
                    i = data.net.node_count();
                    break;
                }
        SimConfig c = s.sim;
        c.validate();
        c.cost_params(data.zones).validate();
        if (c.horizon > 2 * data.rates.interval_length())
            findings.push_back("horizon spans more than two demand intervals");
        for (const auto& r : data.requests)
            if (r.arrival_time <= c.start_time || r.arrival_time > c.end_time)
                findings.push_back("request " + std::to_string(r.id) +
                                   " arrives outside the simulation window");
    } catch (const std::exception& e) {
        findings.push_back(e.what());
    }
    return findings;
}

struct RunResult {
    bool ok = false;
    std::string error;
    MetricsReport report;
    int solver_fallbacks = 0;
};

inline json report_to_json(const MetricsReport& r) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    json j;
    j["requests"] = r.requests;
    j["served"] = r.served;
    j["expired"] = r.expired;
    j["service_rate"] = opt(r.service_rate);
    j["vmr_km"] = opt(r.vmr);
    j["active_vmr_km"] = opt(r.active_vmr);
    j["idle_vmr_km"] = opt(r.idle_vmr);
    j["rebalancing_vmr_km"] = opt(r.rebalancing_vmr);
    j["shared_trip_ratio"] = opt(r.shared_trip_ratio);
    j["avg_wait_s"] = opt(r.avg_wait_s);
    j["avg_delay_s"] = opt(r.avg_delay_s);
    j["avg_occupancy"] = opt(r.avg_occupancy);
    j["total_vmt_km"] = r.total_vmt_km;
    j["active_vmt_km"] = r.active_vmt_km;
    j["deadhead_vmt_km"] = r.deadhead_vmt_km;
    j["rebalancing_vmt_km"] = r.rebalancing_vmt_km;
    j["tours"] = {{"count", r.tours.sizes.size()},
                  {"mean_size", r.tours.mean_size()},
                  {"mean_distance_km", r.tours.mean_distance_km()},
                  {"sizes", r.tours.sizes},
                  {"distances_km", r.tours.distances_km}};
    return j;
}

inline std::string csv_header() {
    return "label,variant,fleet,seed,gamma,alpha,beta,status,requests,served,expired,"
           "service_rate,vmr_km,active_vmr_km,idle_vmr_km,rebalancing_vmr_km,"
           "shared_trip_ratio,avg_wait_s,avg_delay_s,avg_occupancy,mean_tour_size,"
           "mean_tour_km,solver_fallbacks,error";
}

inline std::string csv_row(const std::string& label, const SimConfig& c, const RunResult& r) {
    auto num = [](const std::optional<double>& v) {
        if (!v) return std::string();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", *v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << label << ',' << variant_name(c.variant) << ',' << c.fleet_size << ',' << c.seed
       << ',' << c.gamma << ',' << c.alpha << ',' << c.beta << ','
       << (r.ok ? "ok" : "failed") << ',';
    if (r.ok) {
        const MetricsReport& m = r.report;
        os << m.requests << ',' << m.served << ',' << m.expired << ',' << num(m.service_rate)
           << ',' << num(m.vmr) << ',' << num(m.active_vmr) << ',' << num(m.idle_vmr) << ','
           << num(m.rebalancing_vmr) << ',' << num(m.shared_trip_ratio) << ','
           << num(m.avg_wait_s) << ',' << num(m.avg_delay_s) << ',' << num(m.avg_occupancy)
           << ',' << m.tours.mean_size() << ',' << m.tours.mean_distance_km() << ','
           << r.solver_fallbacks << ',';
    } else {
        os << ",,,,,,,,,,,,,," << r.solver_fallbacks << ',';
        std::string e = r.error;
        for (char& ch : e)
            if (ch == ',' || ch == '\n') ch = ';';
        os << e;
    }
    return os.str();
}

// Runs one scenario end to end: simulate, write the journal, compute the
// metrics from the written journal and emit report.json.
inline RunResult run_single(const Scenario& s, const LoadedScenario& data,
                            const std::string& out_dir, const std::string& label) {
    RunResult result;
    try {
        std::filesystem::create_directories(out_dir);
        Simulator sim(s.sim, data.net, data.tables, data.zones, data.rates);
        sim.run(data.requests);

        std::string journal_path = out_dir + "/journal.csv";
        {
            std::ofstream jf(journal_path);
            jf << "# config: " << sim_config_to_json(s.sim).dump() << "\n";
            write_journal(sim.state().journal, data.net, jf);
        }

        MetricsWindow window{s.sim.measure_start, s.sim.measure_end, s.sim.capacity};
        std::ifstream jf(journal_path);
        std::stringstream buf;
        buf << jf.rdbuf();
        std::vector<JournalRecord> journal = parse_journal(buf.str(), data.net);
        result.report = compute_metrics(journal, window, data.tables);
        result.report.tours = tour_statistics(journal, window, data.tables);
        result.solver_fallbacks = sim.state().solver_fallbacks;

        json rj;
        rj["label"] = label;
        rj["config"] = sim_config_to_json(s.sim);
        rj["metrics"] = report_to_json(result.report);
        rj["solver_fallbacks"] = result.solver_fallbacks;
        std::ofstream rf(out_dir + "/report.json");
        rf << rj.dump(2) << "\n";
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
    return result;
}

struct MatrixRun {
    std::string label;
    std::string config_path;
    json overrides;
};

struct RunMatrix {
    std::vector<MatrixRun> runs;
    int parallelism = 1;
};

inline RunMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open matrix file: " + path);
    json j;
    in >> j;
    RunMatrix m;
    m.parallelism = j.value("parallelism", 1);
    std::set<std::string> labels;
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (const auto& r : j.at("runs")) {
        MatrixRun run;
        run.label = r.at("label").get<std::string>();
        if (!labels.insert(run.label).second)
            throw InputError("duplicate matrix label: " + run.label);
        std::filesystem::path cp(r.at("config").get<std::string>());
        run.config_path = cp.is_absolute() ? cp.string() : (base / cp).string();
        run.overrides = r.value("overrides", json::object());
        m.runs.push_back(run);
    }
    return m;
}

inline void apply_overrides(SimConfig& c, const json& o) {
    if (o.contains("variant")) c.variant = variant_from_name(o.at("variant").get<std::string>());
    if (o.contains("fleet")) c.fleet_size = o.at("fleet").get<int>();
    if (o.contains("seed")) c.seed = o.at("seed").get<uint64_t>();
    if (o.contains("gamma")) c.gamma = o.at("gamma").get<double>();
    if (o.contains("alpha")) c.alpha = o.at("alpha").get<double>();
    if (o.contains("beta")) c.beta = o.at("beta").get<double>();
    if (o.contains("horizon_s")) c.horizon = o.at("horizon_s").get<Seconds>();
    if (o.contains("solver_budget_s")) c.solver_budget_s = o.at("solver_budget_s").get<double>();
}

// Executes every run of the matrix (failures isolated per run) and writes
// one combined CSV with a row per run.
inline std::vector<RunResult> run_matrix(const RunMatrix& matrix, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<RunResult> results(matrix.runs.size());
    std::vector<SimConfig> configs(matrix.runs.size());

    // Scenario data is cached per config path; runs differing only in
    // overrides share the loaded network and tables.
    std::map<std::string, std::pair<Scenario, std::shared_ptr<LoadedScenario>>> cache;
    for (const auto& run : matrix.runs)
        if (!cache.count(run.config_path)) {
            Scenario s = load_scenario(run.config_path);
            cache.emplace(run.config_path,
                          std::make_pair(s, std::make_shared<LoadedScenario>(
                                                load_scenario_data(s))));
        }

    std::atomic<size_t> next{0};
    int workers = std::max(1, matrix.parallelism);
    auto work = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= matrix.runs.size()) return;
            const MatrixRun& run = matrix.runs[i];
            auto& [scenario, data] = cache.at(run.config_path);
            Scenario s = scenario;
            apply_overrides(s.sim, run.overrides);
            configs[i] = s.sim;
            results[i] = run_single(s, *data, out_dir + "/" + run.label, run.label);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    std::ofstream csv(out_dir + "/combined.csv");
    csv << csv_header() << "\n";
    for (size_t i = 0; i < matrix.runs.size(); ++i)
        csv << csv_row(matrix.runs[i].label, configs[i], results[i]) << "\n";
    return results;
}

enum class DemandPattern { Uniform, Hotspot, Commute };

struct GenSpec {
    DemandPattern pattern = DemandPattern::Uniform;
    int grid_n = 9;            // nodes per side
    double spacing_m = 500.0;  // node spacing; edge time = spacing / speed
    double speed_mps = 10.0;
    double cell_m = 1500.0;    // zone cell size
    double rate_per_hour = 120.0;  // total request intensity
    double hours = 3.0;
    int hotspot_zone = 0;
    double hotspot_weight = 0.7;
    uint64_t seed = 1;
};

struct GeneratedScenario {
    std::string dir;
    std::string scenario_path;
    long request_count = 0;
};

// Synthetic fixture: a grid road network, zone-level Poisson demand whose
// intensities are also written out as the rates file, and a ready-to-run
// scenario config. Pattern picks origins and destinations:
//   uniform  - origins anywhere, destinations anywhere
//   hotspot  - origins concentrated in one zone, destinations elsewhere
//   commute  - origins in the west-most zones, destinations in the east
inline GeneratedScenario generate_synthetic(const GenSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    json provenance = {{"pattern", spec.pattern == DemandPattern::Uniform
                                       ? "uniform"
                                       : (spec.pattern == DemandPattern::Hotspot ? "hotspot"
                                                                                 : "commute")},
                       {"grid_n", spec.grid_n},
                       {"spacing_m", spec.spacing_m},
                       {"speed_mps", spec.speed_mps},
                       {"cell_m", spec.cell_m},
                       {"rate_per_hour", spec.rate_per_hour},
                       {"hours", spec.hours},
                       {"hotspot_zone", spec.hotspot_zone},
                       {"hotspot_weight", spec.hotspot_weight},
                       {"seed", spec.seed}};
    std::string stamp = "generated: " + provenance.dump();

    // Network files.
    const int n = spec.grid_n;
    Seconds edge_time = static_cast<Seconds>(std::llround(spec.spacing_m / spec.speed_mps));
    if (edge_time <= 0) throw ParamViolationError("spacing/speed give a zero edge time");
    {
        std::ofstream nf(out_dir + "/nodes.csv");
        nf << "# " << stamp << "\nnode_id,x,y\n";
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                nf << (r * n + c) << ',' << c * spec.spacing_m << ',' << r * spec.spacing_m
                   << "\n";
        std::ofstream ef(out_dir + "/edges.csv");
        ef << "# " << stamp << "\nfrom,to,length_m,time_s\n";
        auto emit = [&](int a, int b) {
            ef << a << ',' << b << ',' << spec.spacing_m << ',' << edge_time << "\n";
            ef << b << ',' << a << ',' << spec.spacing_m << ',' << edge_time << "\n";
        };
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                if (c + 1 < n) emit(r * n + c, r * n + c + 1);
                if (r + 1 < n) emit(r * n + c, (r + 1) * n + c);
            }
    }

    RoadNetwork net = load_network_files(out_dir + "/nodes.csv", out_dir + "/edges.csv");
    ZoneSet zones = build_grid_zones(net, spec.cell_m);
    const int Z = zones.zone_count();
    if (spec.hotspot_zone >= Z)
        throw ParamViolationError("hotspot zone beyond the zone count");

    // Zone weights for origins.
    std::vector<double> weights(Z, 1.0);
    if (spec.pattern == DemandPattern::Hotspot) {
        for (int z = 0; z < Z; ++z)
            weights[z] = (1.0 - spec.hotspot_weight) / std::max(1, Z - 1);
        weights[spec.hotspot_zone] = spec.hotspot_weight;
    } else if (spec.pattern == DemandPattern::Commute) {
        // Origins in the west third, destinations in the east third.
        for (int z = 0; z < Z; ++z) {
            const Zone& zn = zones.zone(z);
            double cx = 0.5 * (zn.x_min + zn.x_max);
            weights[z] = cx < (n - 1) * spec.spacing_m / 3.0 ? 1.0 : 0.0;
        }
    } else {
        for (int z = 0; z < Z; ++z) weights[z] = 1.0;
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (wsum <= 0.0) throw ParamViolationError("demand pattern has zero total weight");

    // Destination node pool per pattern.
    std::vector<NodeId> all_nodes;
    for (NodeId i = 0; i < net.node_count(); ++i) all_nodes.push_back(i);
    auto destination_pool = [&](ZoneId origin_zone) {
        std::vector<NodeId> pool;
        if (spec.pattern == DemandPattern::Commute) {
            for (NodeId i : all_nodes) {
                const Zone& zn = zones.zone(zones.zone_of(i));
                double cx = 0.5 * (zn.x_min + zn.x_max);
                if (cx > 2.0 * (n - 1) * spec.spacing_m / 3.0) pool.push_back(i);
            }
        } else if (spec.pattern == DemandPattern::Hotspot) {
            for (NodeId i : all_nodes)
                if (zones.zone_of(i) != spec.hotspot_zone) pool.push_back(i);
        }
        if (pool.empty()) pool = all_nodes;
        (void)origin_zone;
        return pool;
    };

    // Rates: lambda per zone per 900 s interval; the same intensities drive
    // the Poisson draws below.
    const Seconds interval = 900;
    const Seconds total_s = static_cast<Seconds>(spec.hours * 3600.0);
    const int64_t intervals = (total_s + interval - 1) / interval;
    RateTable rates(interval);
    for (int z = 0; z < Z; ++z) {
        double lambda = spec.rate_per_hour * (weights[z] / wsum) / 4.0;  // per 15 min
        if (lambda <= 0.0) continue;
        for (int64_t k = 0; k <= intervals; ++k) rates.set_rate(z, k, lambda);
    }
    rates.to_file(out_dir + "/rates.csv", stamp);

    // Requests.
    Rng rng(spec.seed);
    struct Row {
        Seconds t;
        NodeId o, d;
    };
    std::vector<Row> rows;
    for (int64_t k = 0; k < intervals; ++k) {
        for (int z = 0; z < Z; ++z) {
            double lambda = rates.rate(z, k);
            if (lambda <= 0.0) continue;
            int count = rng.poisson(lambda);
            Seconds k0 = k * interval;
            Seconds k1 = std::min(total_s, k0 + interval);
            const auto& zone_nodes = zones.zone(z).nodes;
            std::vector<NodeId> pool = destination_pool(z);
            for (int i = 0; i < count; ++i) {
                Row row;
                row.t = k0 + 1 + static_cast<Seconds>(rng.next_below(
                                     static_cast<uint64_t>(k1 - k0)));
                row.o = zone_nodes[rng.next_below(zone_nodes.size())];
                row.d = row.o;
                for (int attempt = 0; attempt < 64 && row.d == row.o; ++attempt)
                    row.d = pool[rng.next_below(pool.size())];
                if (row.d == row.o) continue;
                rows.push_back(row);
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.t < b.t;
    });
    {
        std::ofstream rf(out_dir + "/requests.csv");
        rf << "# " << stamp << "\nid,time_s,origin_node,dest_node\n";
        for (size_t i = 0; i < rows.size(); ++i)
            rf << i << ',' << rows[i].t << ',' << net.external_id(rows[i].o) << ','
               << net.external_id(rows[i].d) << "\n";
    }

    // Ready-to-run scenario config: warm-up and cool-off are the first and
    // last thirds when the run is three hours or shorter, else one hour each.
    Seconds margin = total_s >= 10800 ? 3600 : total_s / 3;
    json sc;
    sc["network"] = {{"nodes", "nodes.csv"}, {"edges", "edges.csv"}};
    sc["requests"] = "requests.csv";
    sc["rates"] = "rates.csv";
    sc["zones"] = {{"grid_cell_m", spec.cell_m}};
    sc["variant"] = "integrated";
    sc["fleet"] = std::max(2, static_cast<int>(spec.rate_per_hour / 10.0));
    sc["seed"] = spec.seed;
    sc["params"] = {{"epoch_s", 30},      {"horizon_s", 600}, {"max_wait_s", 420},
                    {"max_delay_s", 900}, {"capacity", 4},    {"gamma", 1.0},
                    {"alpha", 1.0}};
    sc["sim"] = {{"start_s", 0},
                 {"end_s", total_s},
                 {"measure_start_s", margin},
                 {"measure_end_s", total_s - margin}};
    sc["generated"] = provenance;
    std::string scenario_path = out_dir + "/scenario.json";
    std::ofstream sf(scenario_path);
    sf << sc.dump(2) << "\n";

    return GeneratedScenario{out_dir, scenario_path, static_cast<long>(rows.size())};
}

}  // namespace ridepool
