// Acceptance run: one [PASS]/[FAIL] line per criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "coapicn/coap/codec.hpp"
#include "coapicn/harness/runner.hpp"
#include "golden_vectors.hpp"
#include "observe_property.hpp"
#include "test_util.hpp"

using namespace coapicn;
using namespace coapicn::harness;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " FAILED(" << what << ")";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scenario fixture(const std::string& name)
{
    return load_scenario(test::source_path("scenarios/" + name + ".json"));
}

std::string fixed(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Verdict fig7_replica()
{
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    const RunMetrics m = run_scenario(fixture("fig7"));
    const double runtime = seconds_since(t0);

    const auto pubs = m.fabric_publications.count("observe-request") ? m.fabric_publications.at("observe-request") : 0;
    v.require(pubs == 2, "observe-request publications == 2");
    v.require(m.server_requests_received == 1, "server requests == 1");
    v.require(m.clients.size() == 4, "4 clients");
    v.require(m.server_updates > 0, "server emitted updates");

    std::size_t complete = 0;
    for (const auto& c : m.clients) {
        bool ok = c.wrong_token == 0 && c.errors == 0;
        std::multiset<std::uint64_t> seqs;
        for (const auto& p : c.payloads) {
            const auto hash = p.find('#');
            std::size_t end = hash + 1;
            while (end < p.size() && p[end] >= '0' && p[end] <= '9')
                ++end;
            seqs.insert(std::stoull(p.substr(hash + 1, end - hash - 1)));
        }
        for (std::uint64_t seq = 1; seq <= m.server_updates; ++seq)
            ok = ok && seqs.count(seq) == 1;
        complete += ok ? 1 : 0;
    }
    v.require(complete == 4, "every client got every notification with its token");
    v.require(runtime < 5.0, "runtime < 5 s");
    v.detail << " publications=" << pubs << " server_requests=" << m.server_requests_received
             << " updates=" << m.server_updates << " clients_complete=" << complete << "/4"
             << " runtime_s=" << fixed(runtime, 3) << " (limit 5)";
    return v;
}

Verdict multicast_economy()
{
    Verdict v;
    const Scenario s = fixture("fig7");
    const RunMetrics g = simulate(s, Mode::Gateway).metrics;
    const RunMetrics u = simulate(s, Mode::UnicastFabric).metrics;
    const RunMetrics b = simulate(s, Mode::Baseline).metrics;
    const double gw = g.shared_link_per_update.value_or(-1);
    const double uf = u.shared_link_per_update.value_or(-1);
    const double ip = b.shared_link_per_update.value_or(-1);
    v.require(gw == 1.0, "gateway == 1 per notification");
    v.require(uf == 2.0, "unicast fabric == 2 per notification");
    v.detail << " link=" << s.shared_link->from << ">" << s.shared_link->to << " gateway=" << fixed(gw, 2)
             << " unicast_fabric=" << fixed(uf, 2) << " (ip_unicast=" << fixed(ip, 2) << ")";
    return v;
}

Verdict ratio_replica()
{
    Verdict v;
    const Scenario s = fixture("ratio");
    const auto t0 = std::chrono::steady_clock::now();
    const RunMetrics g = run_scenario(s);
    const RunMetrics b = run_baseline(s);
    const double runtime = seconds_since(t0);
    const Comparison c = compare(g, b);
    v.require(c.forward_fraction >= 0.40 && c.forward_fraction <= 0.56, "forwarded fraction in [0.40, 0.56]");
    v.require(c.byte_ratio >= 0.40 && c.byte_ratio <= 0.60, "byte ratio in [0.40, 0.60]");
    v.require(runtime < 30.0, "runtime < 30 s");
    v.detail << " forwarded=" << g.server_requests_received + g.server_acks_received
             << " client_emitted=" << g.client_requests_sent + g.client_acks_sent
             << " fraction=" << fixed(c.forward_fraction) << " [0.40,0.56]"
             << " bytes=" << g.server_bytes << "/" << b.server_bytes << " ratio=" << fixed(c.byte_ratio)
             << " [0.40,0.60] runtime_s=" << fixed(runtime, 3) << " (limit 30)";
    return v;
}

Verdict codec_suite()
{
    Verdict v;
    std::mt19937_64 rng(0xACCE97);
    std::size_t failures = 0;
    constexpr int kRounds = 10000;
    for (int i = 0; i < kRounds; ++i) {
        const coap::CoapMessage m = test::random_message(rng);
        try {
            const Bytes wire = coap::encode(m);
            const coap::CoapMessage back = coap::decode(wire);
            if (!(back == m) || coap::encode(back) != wire)
                ++failures;
        } catch (const Error&) {
            ++failures;
        }
    }
    std::size_t golden_ok = 0;
    const auto vectors = test::golden_vectors();
    for (const auto& g : vectors) {
        const Bytes wire = test::golden_wire(g.file);
        if (coap::encode(g.message) == wire && coap::decode(wire) == g.message)
            ++golden_ok;
    }
    v.require(failures == 0, "zero round-trip failures");
    v.require(golden_ok == vectors.size(), "all golden vectors match");
    v.detail << " round_trips=" << kRounds << " failures=" << failures << " golden=" << golden_ok << "/"
             << vectors.size();
    return v;
}

Verdict property_suite()
{
    Verdict v;
    constexpr std::uint64_t kSeeds = 1000;
    std::size_t divergences = 0;
    std::size_t deliveries = 0;
    std::size_t suppressed = 0;
    std::string first_failure;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const test::PropertyOutcome o = test::run_observe_property(seed);
        deliveries += o.deliveries;
        suppressed += o.suppressed;
        if (!o.ok) {
            ++divergences;
            if (first_failure.empty())
                first_failure = "seed " + std::to_string(seed) + ": " + o.failure;
        }
    }
    v.require(divergences == 0, "zero divergences");
    v.detail << " seeds=" << kSeeds << " divergences=" << divergences << " deliveries=" << deliveries
             << " suppressed_acks=" << suppressed;
    if (!first_failure.empty())
        v.detail << " first=" << first_failure;
    return v;
}

Verdict determinism()
{
    Verdict v;
    std::size_t runs = 0;
    std::size_t identical = 0;
    for (const char* name : {"fig6", "fig7", "ratio"}) {
        const Scenario s = fixture(name);
        for (const Mode mode : {Mode::Gateway, Mode::UnicastFabric, Mode::Baseline}) {
            const RunResult a = simulate(s, mode);
            const RunResult b = simulate(s, mode);
            ++runs;
            if (!a.trace.empty() && a.trace == b.trace && to_text(a.metrics) == to_text(b.metrics))
                ++identical;
        }
    }
    v.require(identical == runs, "byte-identical traces");
    v.detail << " scenario_modes=" << runs << " identical=" << identical;
    return v;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"fig7-replica", fig7_replica},       {"multicast-economy", multicast_economy},
        {"ratio-replica", ratio_replica},     {"codec-property-suite", codec_suite},
        {"observe-state-property-suite", property_suite}, {"determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " exception: " << e.what();
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << name << ":" << v.detail.str() << std::endl;
    }
    std::cout << (failed == 0 ? "acceptance: all criteria pass" : "acceptance: " + std::to_string(failed) + " failed")
              << std::endl;
    return failed == 0 ? 0 : 1;
}
