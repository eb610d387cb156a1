// masbus command line: validate route files, run them, run the factory scenario.
//
// Exit codes: 0 ok, 1 usage, 2 parse/config error, 3 unresolved scheme,
// 4 start failure, 5 scenario violations, 6 scenario stage timeout.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "masbus/components.hpp"
#include "masbus/route_config.hpp"
#include "masbus/scenario.hpp"

using namespace masbus;

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kUnresolved = 3, kStart = 4, kViolations = 5, kTimeout = 6 };

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

void print_error(const std::string& file, const Error& e) {
    std::cerr << file;
    if (e.location()) std::cerr << ":" << e.location()->line << ":" << e.location()->column;
    std::cerr << ": " << e.what() << "\n";
}

AliasTable cli_aliases(const std::vector<std::string>& specs) {
    AliasTable t;
    for (const auto& s : specs) {
        auto [scheme, component] = parse_alias_spec(s);
        t.add(scheme, component);
    }
    return t;
}

// Parses and resolves a route file; returns an exit code (kOk on success).
int load(const std::string& file, const std::vector<std::string>& alias_specs, Bus& bus, RouteFile& out,
         AliasTable& aliases) {
    std::string text;
    if (!read_file(file, text)) {
        std::cerr << file << ": cannot read file\n";
        return kParse;
    }
    try {
        out = parse_routes_xml(text, file);
    } catch (const Error& e) {
        print_error(file, e);
        return kParse;
    }
    try {
        aliases = out.aliases;
        aliases.merge(cli_aliases(alias_specs));
    } catch (const Error& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return kUnresolved;
    }
    auto missing = unresolved_schemes(out, bus, aliases);
    for (const auto& s : missing) std::cerr << file << ": unresolved scheme '" << s << "'\n";
    if (!missing.empty()) return kUnresolved;
    try {
        apply_aliases(bus, aliases);
    } catch (const Error& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return kUnresolved;
    }
    return kOk;
}

int cmd_validate(const std::string& file, const std::vector<std::string>& alias_specs) {
    AgentRegistry registry;
    Environment env;
    Bus bus;
    install_standard_components(bus, registry, env);
    RouteFile rf;
    AliasTable aliases;
    if (int rc = load(file, alias_specs, bus, rf, aliases); rc != kOk) return rc;
    std::cout << file << ": ok, " << rf.routes.size() << " route(s)\n";
    return kOk;
}

struct RunFlags {
    bool trace = false;
    bool simulated = false;
    std::int64_t tick_ms = 100;
    std::int64_t duration_ms = 0;
    bool exit_when_idle = false;
    std::vector<std::string> injects;
    std::vector<std::string> aliases;
};

int cmd_run(const std::string& file, const RunFlags& flags) {
    std::shared_ptr<Clock> clock;
    std::shared_ptr<SimulatedClock> sim;
    if (flags.simulated) {
        sim = std::make_shared<SimulatedClock>();
        clock = sim;
    } else {
        clock = std::make_shared<WallClock>();
    }
    AgentRegistry registry;
    Environment env;
    BusOptions options;
    options.clock = clock;
    Bus bus(options);
    install_standard_components(bus, registry, env);

    RouteFile rf;
    AliasTable aliases;
    if (int rc = load(file, flags.aliases, bus, rf, aliases); rc != kOk) return rc;

    // inject specs are ROUTE_ID=TERM and are checked before anything starts
    std::vector<std::pair<std::string, Term>> injects;
    for (const auto& spec : flags.injects) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
            std::cerr << "--inject expects ROUTE=TERM, got '" << spec << "'\n";
            return kUsage;
        }
        injects.emplace_back(spec.substr(0, eq), parse_or_string(spec.substr(eq + 1)));
    }

    std::mutex out_mu;
    if (flags.trace) {
        bus.set_delivery_listener([&](const DeliveryRecord& d) {
            std::ostringstream line;
            line << "delivery exchange=" << d.exchange_id << " route=" << d.route_id << " endpoints=";
            for (std::size_t i = 0; i < d.endpoints.size(); ++i) line << (i ? " -> " : "") << d.endpoints[i];
            if (d.failed_producers) line << " failed=" << d.failed_producers;
            std::lock_guard lock(out_mu);
            std::cout << line.str() << std::endl;
        });
    }

    try {
        for (auto& r : rf.routes) bus.add_route(r);
        bus.start();
    } catch (const Error& e) {
        std::cerr << file << ": start failed: " << e.what() << "\n";
        return kStart;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    for (const auto& [route, body] : injects) {
        try {
            auto& def = bus.route(route);
            Exchange ex;
            ex.id = bus.next_exchange_id();
            ex.body = body;
            ex.trace.push_back(format_uri(def.from));
            bus.process_exchange(route, std::move(ex));
        } catch (const Error& e) {
            std::cerr << "inject into " << route << " failed: " << e.what() << "\n";
            bus.stop();
            return kStart;
        }
    }

    const auto started = std::chrono::steady_clock::now();
    while (!g_interrupted) {
        if (sim) {
            bus.await_idle(std::chrono::milliseconds(100));
            sim->advance(flags.tick_ms);
        }
        if (flags.exit_when_idle && bus.await_idle(std::chrono::milliseconds(0))) break;
        if (flags.duration_ms > 0) {
            auto elapsed = sim ? std::chrono::milliseconds(sim->now_ms())
                               : std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - started);
            if (elapsed.count() >= flags.duration_ms) break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(sim ? 1 : 20));
    }
    bus.stop();
    auto report = bus.report();
    for (const auto& d : report.dead_letters)
        std::cerr << "dead-letter route=" << d.route_id << " stage=" << to_string(d.stage)
                  << " cause=" << to_string(d.cause) << " endpoint=" << d.endpoint << " " << d.message << "\n";
    return kOk;
}

int cmd_scenario(const std::string& config_path, const std::string& report_out, bool simulated) {
    std::string text;
    if (!read_file(config_path, text)) {
        std::cerr << config_path << ": cannot read file\n";
        return kParse;
    }
    ScenarioConfig cfg;
    try {
        cfg = config_from_json(text);
    } catch (const Error& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return kParse;
    }
    auto write_report = [&](const ScenarioReport& r) {
        if (report_out.empty()) return true;
        std::ofstream out(report_out, std::ios::binary);
        out << report_to_json(r) << "\n";
        if (!out) std::cerr << report_out << ": cannot write report\n";
        return static_cast<bool>(out);
    };

    ScenarioReport report;
    try {
        report = run_scenario(cfg, ScenarioOptions{simulated});
    } catch (const ScenarioTimeout& t) {
        write_report(t.report());
        std::cerr << "StageTimeout(" << t.stage() << ") after " << t.waited_ms() << " ms\n";
        return kTimeout;
    } catch (const Error& e) {
        std::cerr << "scenario failed: " << e.what() << "\n";
        return e.code() == Errc::InvalidConfig ? kParse : kStart;
    }
    if (!write_report(report)) return kUsage;

    for (const auto& s : report.stages) std::cout << "stage " << s.stage << " at " << s.logical_ms << " ms\n";
    std::cout << "winner " << report.winner_supplier << "\n";
    auto violations = assert_report(report, cfg);
    for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
    return violations.empty() ? kOk : kViolations;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"masbus - agent/bus integration toolkit"};
    app.require_subcommand(1);

    std::string file;
    std::vector<std::string> alias_specs;
    auto* validate = app.add_subcommand("validate", "Parse a route file and check every scheme resolves");
    validate->add_option("file", file, "Route file (XML)")->required();
    validate->add_option("--alias", alias_specs, "Extra scheme alias, scheme=component");

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Start a bus with the routes of a file until interrupted");
    run->add_option("file", file, "Route file (XML)")->required();
    run->add_flag("--trace", run_flags.trace, "Print one line per delivery");
    run->add_flag("--simulated-time", run_flags.simulated, "Drive timers from a logical clock");
    run->add_option("--alias", run_flags.aliases, "Extra scheme alias, scheme=component");
    run->add_option("--inject", run_flags.injects, "Process TERM on route ROUTE at startup, ROUTE=TERM");
    run->add_option("--tick-ms", run_flags.tick_ms, "Logical step with --simulated-time")->check(CLI::PositiveNumber);
    run->add_option("--duration-ms", run_flags.duration_ms, "Stop after this long (0: until interrupted)");
    run->add_flag("--exit-when-idle", run_flags.exit_when_idle, "Stop once no exchange is in flight");

    std::string config_path, report_out;
    bool scenario_simulated = false;
    auto* scenario = app.add_subcommand("scenario", "Run the factory scenario and check its report");
    scenario->add_option("config", config_path, "Scenario config (JSON)")->required();
    scenario->add_option("--report-out", report_out, "Write the JSON report here");
    scenario->add_flag("--simulated-time", scenario_simulated, "Use a logical clock (deterministic)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (*validate) return cmd_validate(file, alias_specs);
        if (*run) return cmd_run(file, run_flags);
        if (*scenario) return cmd_scenario(config_path, report_out, scenario_simulated);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
