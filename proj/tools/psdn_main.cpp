#include "psdn/error.hpp"
#include "psdn/harness/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace psdn;
using namespace psdn::harness;

constexpr int kOk              = 0;
constexpr int kValidationError = 2;
constexpr int kRuntimeFailure  = 3;

struct Inputs {
    std::string topology;
    std::string scenario;
    std::string scenario_dir = default_scenario_dir().string();
};

/// A bare scenario name with no topology resolves to a canned pair.
std::pair<TopologyDoc, ScenarioDoc> load(const Inputs &in) {
    std::filesystem::path topology = in.topology;
    std::filesystem::path scenario = in.scenario;
    if (topology.empty()) {
        if (scenario.empty()) throw ValidationError("", "--topology is required");
        const auto dir = std::filesystem::path(in.scenario_dir);
        if (std::filesystem::exists(dir / (in.scenario + ".scenario.json"))) {
            topology = dir / (in.scenario + ".topology.json");
            scenario = dir / (in.scenario + ".scenario.json");
        } else {
            throw ValidationError("", "no topology given and '" + in.scenario + "' is not a canned scenario");
        }
    }
    auto topo = load_topology(topology);
    auto scen = scenario.empty() ? ScenarioDoc{} : load_scenario(scenario, topo);
    return {std::move(topo), std::move(scen)};
}

std::ostream &open_or(std::ofstream &file, const std::string &path, std::ostream &fallback) {
    if (path.empty() || path == "-") return fallback;
    file.open(path);
    if (!file) throw Error(ErrorCode::InvalidOperation, "cannot write '" + path + "'");
    return file;
}

int run(const Inputs &in, std::uint64_t seed, const std::string &format, const std::string &trace_path, const std::string &alerts_path,
        const std::string &output_path) {
    const auto fmt          = parse_report_format(format);
    auto [topo, scen]       = load(in);
    Simulation    sim(std::move(topo), std::move(scen), seed);
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw Error(ErrorCode::InvalidOperation, "cannot write '" + trace_path + "'");
        sim.set_trace_sink([&trace](const sim::TraceRecord &r) { trace << sim::to_ndjson(r) << '\n'; });
    }
    sim.run();
    const auto report = collect(sim);

    std::ofstream out_file;
    open_or(out_file, output_path, std::cout) << emit_report(report, fmt);
    if (!alerts_path.empty()) {
        std::ofstream alerts;
        auto         &out = open_or(alerts, alerts_path, std::cout);
        for (const auto &a : report.alerts) out << a.to_ndjson() << '\n';
    }
    if (!sim.ok()) {
        std::cerr << "run failed: " << sim.error() << '\n';
        return kRuntimeFailure;
    }
    return kOk;
}

int validate(const Inputs &in) {
    auto [topo, scen] = load(in);
    std::cout << "ok: " << topo.switches.size() << " switches, " << topo.links.size() << " links, " << topo.devices.size() << " devices, "
              << topo.endpoints.size() << " endpoints";
    if (!in.scenario.empty()) std::cout << ", " << scen.actions.size() << " actions";
    std::cout << '\n';
    return kOk;
}

int list_scenarios(const std::string &dir) {
    for (const auto &c : canned_scenarios(dir)) {
        std::string description;
        try {
            description = load_scenario(c.scenario, load_topology(c.topology)).description;
        } catch (const Error &e) {
            description = std::string("invalid: ") + e.what();
        }
        std::cout << c.name << '\t' << description << '\n';
    }
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Publish/subscribe SDN simulator"};
    app.require_subcommand(1);

    Inputs        in;
    std::uint64_t seed   = 0;
    std::string   format = "json";
    std::string   trace_path, alerts_path, output_path;

    auto *run_cmd = app.add_subcommand("run", "Run a scenario and print its metrics report");
    run_cmd->add_option("--topology", in.topology, "Topology JSON file");
    run_cmd->add_option("--scenario", in.scenario, "Scenario JSON file, or a canned scenario name")->required();
    run_cmd->add_option("--seed", seed, "RNG seed")->default_val(0);
    run_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}))->default_val("json");
    run_cmd->add_option("--trace", trace_path, "Write the event trace as NDJSON");
    run_cmd->add_option("--alerts", alerts_path, "Write flood alerts as NDJSON");
    run_cmd->add_option("--output,-o", output_path, "Write the report here instead of stdout");
    run_cmd->add_option("--scenario-dir", in.scenario_dir, "Where canned scenarios live");

    auto *validate_cmd = app.add_subcommand("validate", "Check a topology and optional scenario");
    validate_cmd->add_option("--topology", in.topology, "Topology JSON file");
    validate_cmd->add_option("--scenario", in.scenario, "Scenario JSON file, or a canned scenario name");
    validate_cmd->add_option("--scenario-dir", in.scenario_dir, "Where canned scenarios live");

    auto *list_cmd = app.add_subcommand("list-scenarios", "List canned scenarios");
    list_cmd->add_option("--scenario-dir", in.scenario_dir, "Where canned scenarios live");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kValidationError;
    }

    try {
        if (*run_cmd) return run(in, seed, format, trace_path, alerts_path, output_path);
        if (*validate_cmd) return validate(in);
        return list_scenarios(in.scenario_dir);
    } catch (const ValidationError &e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::exception &e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kRuntimeFailure;
    }
}
