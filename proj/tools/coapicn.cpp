#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "coapicn/error.hpp"
#include "coapicn/harness/live.hpp"
#include "coapicn/harness/runner.hpp"
#include "coapicn/harness/scenario.hpp"

using namespace coapicn;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"CoAP observe over an ICN fabric: scenario runner"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string trace_path;
    std::string report_path;
    bool baseline = false;
    bool unicast = false;

    auto* run = app.add_subcommand("run", "Simulate a scenario and print its metrics");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_flag("--baseline", baseline, "Clients talk to the servers directly over IP");
    run->add_flag("--unicast-fabric", unicast, "NAPs publish one copy per client NAP");
    run->add_option("--trace", trace_path, "Write the event trace here");
    run->add_option("--report", report_path, "Also run the IP baseline and write the comparison here");

    auto* check = app.add_subcommand("validate", "Parse and check a scenario file");
    check->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);

    double seconds = 0;
    auto* live = app.add_subcommand("gateway", "Serve the scenario's NAPs on real UDP sockets");
    live->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    live->add_option("--seconds", seconds, "Stop after this much wall time (default: until interrupted)")
        ->check(CLI::PositiveNumber);
    live->add_option("--trace", trace_path, "Write the event trace here on exit");

    CLI11_PARSE(app, argc, argv);

    try {
        harness::Scenario s = harness::load_scenario(scenario_path);
        if (seed) {
            s.seed = *seed;
            s.fabric.seed = *seed;
        }
        if (check->parsed()) {
            std::cout << "ok " << s.name << " nodes=" << s.nodes.size() << " clients=" << s.clients.size()
                      << " servers=" << s.servers.size() << '\n';
            return 0;
        }
        if (live->parsed()) {
            Trace trace;
            harness::LiveGateway gw(s, trace_path.empty() ? nullptr : &trace);
            for (const auto& n : s.naps)
                std::cout << "listen nap=" << n.id << " endpoint=" << gw.bound_endpoint(n.id) << '\n';
            std::cout.flush();
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            const SimTime limit = seconds > 0 ? SimTime(static_cast<std::int64_t>(seconds * 1e6)) : SimTime::max();
            gw.run(g_stop, limit);
            for (const auto& [id, c] : gw.counters())
                std::cout << "nap id=" << id << ' ' << nap::to_string(c) << '\n';
            if (!trace_path.empty())
                write_file(trace_path, trace.str());
            return 0;
        }
        if (baseline && unicast)
            throw std::runtime_error("--baseline and --unicast-fabric are exclusive");
        const harness::Mode mode = baseline  ? harness::Mode::Baseline
                                   : unicast ? harness::Mode::UnicastFabric
                                             : harness::Mode::Gateway;
        const harness::RunResult r = harness::simulate(s, mode);
        std::cout << harness::to_text(r.metrics);
        if (!trace_path.empty())
            write_file(trace_path, r.trace);
        if (!report_path.empty()) {
            const harness::RunMetrics b = harness::simulate(s, harness::Mode::Baseline).metrics;
            const std::string text = harness::report(r.metrics, b);
            write_file(report_path, text);
            std::cout << text;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
