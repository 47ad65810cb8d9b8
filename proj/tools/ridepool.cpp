#include "ridepool/assignment.hpp"
#include "ridepool/metrics.hpp"
#include "ridepool/scenario.hpp"
#include "ridepool/simulator.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace ridepool;

namespace {

// 0: success, 1: validation error, 2: runtime fault.
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRuntimeFault = 2;

struct CommonOpts {
    std::string config;
    std::string out = "out";
    std::string variant;
    int fleet = -1;
    int64_t seed = -1;
    double gamma = -1.0;
    double alpha = -1.0;
    int64_t h_seconds = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config, "scenario config file")->required();
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--variant", o.variant, "model variant override");
    cmd->add_option("--fleet", o.fleet, "fleet size override");
    cmd->add_option("--seed", o.seed, "rng seed override");
    cmd->add_option("--gamma", o.gamma, "single-trip penalty override");
    cmd->add_option("--alpha", o.alpha, "zone weight override");
    cmd->add_option("--h-seconds", o.h_seconds, "rebalancing horizon override");
}

void apply_common(Scenario& s, const CommonOpts& o) {
    if (!o.variant.empty()) s.sim.variant = variant_from_name(o.variant);
    if (o.fleet >= 0) s.sim.fleet_size = o.fleet;
    if (o.seed >= 0) s.sim.seed = static_cast<uint64_t>(o.seed);
    if (o.gamma >= 0.0) s.sim.gamma = o.gamma;
    if (o.alpha >= 0.0) s.sim.alpha = o.alpha;
    if (o.h_seconds > 0) s.sim.horizon = o.h_seconds;
}

int cmd_run(const CommonOpts& o) {
    Scenario s = load_scenario(o.config);
    apply_common(s, o);
    LoadedScenario data = load_scenario_data(s);
    RunResult r = run_single(s, data, o.out, "run");
    if (!r.ok) {
        std::cerr << "run failed: " << r.error << "\n";
        return kRuntimeFault;
    }
    std::ofstream csv(o.out + "/metrics.csv");
    csv << csv_header() << "\n" << csv_row("run", s.sim, r) << "\n";
    std::cout << "journal:  " << o.out << "/journal.csv\n"
              << "report:   " << o.out << "/report.json\n";
    if (r.report.service_rate)
        std::cout << "service rate: " << *r.report.service_rate << "\n";
    if (r.solver_fallbacks > 0)
        std::cout << "note: solver budget cut " << r.solver_fallbacks << " epochs\n";
    return kOk;
}

int cmd_matrix(const std::string& path, const std::string& out, int parallel) {
    RunMatrix m = load_matrix(path);
    if (parallel > 0) m.parallelism = parallel;
    std::vector<RunResult> results = run_matrix(m, out);
    int failures = 0;
    for (size_t i = 0; i < results.size(); ++i) {
        std::cout << m.runs[i].label << ": " << (results[i].ok ? "ok" : "FAILED") << "\n";
        if (!results[i].ok) {
            std::cout << "  " << results[i].error << "\n";
            ++failures;
        }
    }
    std::cout << "combined: " << out << "/combined.csv\n";
    return failures == 0 ? kOk : kRuntimeFault;
}

int cmd_generate(const GenSpec& spec, const std::string& out) {
    GeneratedScenario g = generate_synthetic(spec, out);
    std::cout << "scenario: " << g.scenario_path << "\n"
              << "requests: " << g.request_count << "\n";
    return kOk;
}

int cmd_validate(const std::string& config) {
    Scenario s = load_scenario(config);
    std::vector<std::string> findings = validate_scenario(s);
    if (findings.empty()) {
        std::cout << "ok\n";
        return kOk;
    }
    for (const auto& f : findings) std::cout << "error: " << f << "\n";
    return kValidationError;
}

int cmd_dump_graph(const CommonOpts& o, int64_t at, const std::string& lp_path) {
    Scenario s = load_scenario(o.config);
    apply_common(s, o);
    LoadedScenario data = load_scenario_data(s);
    Simulator sim(s.sim, data.net, data.tables, data.zones, data.rates);

    // Advance to the requested decision time, then dump the graph the next
    // epoch would be built on.
    Seconds target = at >= 0 ? at : s.sim.start_time;
    size_t next = 0;
    while (sim.state().clock < target && sim.state().clock < s.sim.end_time) {
        Seconds until = sim.state().clock + s.sim.epoch;
        std::vector<Request> batch;
        while (next < data.requests.size() && data.requests[next].arrival_time <= until) {
            if (data.requests[next].arrival_time > sim.state().clock)
                batch.push_back(data.requests[next]);
            ++next;
        }
        sim.step_epoch(batch);
    }
    RTVZGraph graph = sim.build_epoch_graph();
    std::filesystem::create_directories(o.out);
    std::string graph_path = o.out + "/rtvz_graph.txt";
    {
        std::ofstream gf(graph_path);
        graph.dump(gf);
    }
    std::cout << "graph: " << graph_path << "\n";
    if (!lp_path.empty()) {
        AssignmentModel model = sim.build_epoch_model(graph);
        std::ofstream lf(lp_path);
        dump_lp_model(model, lf);
        std::cout << "model: " << lp_path << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ride-pooling dispatch engine and fleet simulator"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "run one scenario");
    add_common(run, run_opts);

    std::string matrix_path, matrix_out = "out";
    int matrix_parallel = 0;
    CLI::App* matrix = app.add_subcommand("matrix", "run a matrix of scenarios");
    matrix->add_option("--matrix", matrix_path, "matrix file")->required();
    matrix->add_option("--out", matrix_out, "output directory");
    matrix->add_option("--parallel", matrix_parallel, "worker count override");

    GenSpec gen;
    std::string gen_out = "generated";
    std::string gen_pattern = "uniform";
    CLI::App* generate = app.add_subcommand("generate", "generate a synthetic scenario");
    generate->add_option("--pattern", gen_pattern, "uniform|hotspot|commute");
    generate->add_option("--grid-n", gen.grid_n, "nodes per grid side");
    generate->add_option("--spacing-m", gen.spacing_m, "node spacing in meters");
    generate->add_option("--speed-mps", gen.speed_mps, "travel speed");
    generate->add_option("--cell-m", gen.cell_m, "zone cell size in meters");
    generate->add_option("--rate", gen.rate_per_hour, "total requests per hour");
    generate->add_option("--hours", gen.hours, "scenario length in hours");
    generate->add_option("--hotspot-zone", gen.hotspot_zone, "hotspot zone id");
    generate->add_option("--hotspot-weight", gen.hotspot_weight, "origin share of the hotspot");
    generate->add_option("--seed", gen.seed, "rng seed");
    generate->add_option("--out", gen_out, "output directory");

    std::string validate_config;
    CLI::App* validate = app.add_subcommand("validate", "lint scenario inputs");
    validate->add_option("--config", validate_config, "scenario config file")->required();

    CommonOpts dump_opts;
    int64_t dump_at = -1;
    std::string dump_lp;
    CLI::App* dump = app.add_subcommand("dump-graph", "dump the decision graph of an epoch");
    add_common(dump, dump_opts);
    dump->add_option("--at", dump_at, "decision time in seconds (default: first epoch)");
    dump->add_option("--lp", dump_lp, "also dump the assignment model in LP format");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_opts);
        if (*matrix) return cmd_matrix(matrix_path, matrix_out, matrix_parallel);
        if (*generate) {
            if (gen_pattern == "uniform") gen.pattern = DemandPattern::Uniform;
            else if (gen_pattern == "hotspot") gen.pattern = DemandPattern::Hotspot;
            else if (gen_pattern == "commute") gen.pattern = DemandPattern::Commute;
            else throw InputError("unknown pattern: " + gen_pattern);
            return cmd_generate(gen, gen_out);
        }
        if (*validate) return cmd_validate(validate_config);
        if (*dump) return cmd_dump_graph(dump_opts, dump_at, dump_lp);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "fault: " << e.what() << "\n";
        return kRuntimeFault;
    }
    return kOk;
}
