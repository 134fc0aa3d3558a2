#include "coapicn/harness/runner.hpp"

#include <iomanip>
#include <memory>
#include <random>
#include <sstream>

#include "coapicn/coap/uri.hpp"
#include "coapicn/error.hpp"
#include "coapicn/icn/fabric.hpp"
#include "coapicn/nap/client_nap.hpp"
#include "coapicn/nap/naming.hpp"
#include "coapicn/nap/server_nap.hpp"

namespace coapicn::harness {

std::string_view to_string(Mode m) noexcept
{
    switch (m) {
    case Mode::Gateway: return "gateway";
    case Mode::UnicastFabric: return "unicast-fabric";
    case Mode::Baseline: return "baseline";
    }
    return "?";
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t kind, std::size_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), kind,
                      static_cast<std::uint32_t>(index)};
    std::uint64_t out[1];
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return out[0];
}

double ratio(double num, double den)
{
    if (den == 0.0)
        return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

class Simulation {
public:
    Simulation(const Scenario& s, Mode mode)
        : s_(s), mode_(mode), topology_(build_topology(s)), udp_(scheduler_, topology_, s.timing.access_latency, &trace_)
    {
        if (mode != Mode::Baseline)
            build_naps();
        for (std::size_t i = 0; i < s.servers.size(); ++i) {
            auto server =
                std::make_unique<EmbeddedServer>(s.servers[i], scheduler_, udp_, derive_seed(s.seed, 1, i), &trace_);
            udp_.bind(s.servers[i].endpoint, s.servers[i].nap,
                      [p = server.get()](BytesView w, const std::string& from) { p->on_datagram(w, from); });
            servers_.push_back(std::move(server));
        }
        for (std::size_t i = 0; i < s.clients.size(); ++i) {
            const ClientSpec& c = s.clients[i];
            auto client = std::make_unique<EmbeddedClient>(c, target_for(c), mode != Mode::Baseline, s.timing,
                                                           scheduler_, udp_, derive_seed(s.seed, 2, i), &trace_);
            udp_.bind(c.endpoint, c.nap,
                      [p = client.get()](BytesView w, const std::string& from) { p->on_datagram(w, from); });
            clients_.push_back(std::move(client));
        }
    }

    RunResult run()
    {
        for (auto& s : servers_)
            s->start(s_.duration);
        for (auto& c : clients_)
            c->start();
        scheduler_.run_until(s_.duration);
        RunResult out;
        out.trace = trace_.str();
        out.metrics = collect(out.trace);
        return out;
    }

private:
    void build_naps()
    {
        fabric_ = std::make_unique<icn::Fabric>(scheduler_, topology_, s_.fabric, &trace_);
        const observe::HandlerConfig handler{s_.timing.subscription_lifetime, s_.timing.con_every};
        for (auto& cfg : nap_configs(s_, mode_ == Mode::Gateway)) {
            const std::string node = cfg.node_id;
            const std::string listen = cfg.listen_endpoint;
            if (cfg.role == nap::Role::ClientSide) {
                auto n = std::make_unique<nap::ClientNap>(std::move(cfg), *fabric_, udp_, handler, &trace_);
                udp_.bind(listen, node,
                          [p = n.get()](BytesView w, const std::string& from) { p->on_client_datagram(w, from); });
                cnaps_.push_back(std::move(n));
            } else {
                auto n = std::make_unique<nap::ServerNap>(std::move(cfg), *fabric_, udp_, handler, &trace_);
                udp_.bind(listen, node,
                          [p = n.get()](BytesView w, const std::string& from) { p->on_server_datagram(w, from); });
                snaps_.push_back(std::move(n));
            }
        }
    }

    std::string target_for(const ClientSpec& c) const
    {
        if (mode_ != Mode::Baseline) {
            for (const auto& n : s_.naps)
                if (n.id == c.nap)
                    return n.listen;
        }
        const std::string host = coap::split_proxy_uri(c.url).uri_host;
        for (const auto& v : s_.servers)
            if (coap::normalize_uri("coap://" + v.fqdn) == coap::normalize_uri("coap://" + host))
                return v.endpoint;
        return "unresolved:" + host;  // dropped by the network
    }

    RunMetrics collect(const std::string& trace) const
    {
        RunMetrics m;
        m.scenario = s_.name;
        m.seed = s_.seed;
        m.mode = mode_;
        for (const auto& n : cnaps_)
            m.naps[n->config().node_id] = n->counters();
        for (const auto& n : snaps_)
            m.naps[n->config().node_id] = n->counters();
        for (const auto& s : servers_) {
            const ServerMetrics& sm = s->metrics();
            m.servers.push_back(sm);
            m.server_requests_received += sm.requests_received;
            m.server_observe_registrations += sm.observe_registrations;
            m.server_acks_received += sm.acks_received;
            m.server_notifications_sent += sm.notifications_sent;
            m.server_updates += sm.updates;
            m.server_bytes += sm.bytes_in + sm.bytes_out;
        }
        for (const auto& c : clients_) {
            const ClientMetrics& cm = c->metrics();
            m.clients.push_back(cm);
            m.client_requests_sent += cm.requests_sent;
            m.client_acks_sent += cm.acks_sent;
            m.client_notifications += cm.notifications;
            m.client_wrong_token += cm.wrong_token;
        }

        std::uint64_t shared = 0;
        auto add_links = [&](const char* plane, const auto& table) {
            for (const auto& [label, edges] : table)
                for (const auto& [edge, stats] : edges) {
                    m.links.push_back(LinkMetric{plane, label, edge.first, edge.second, stats.transmissions, stats.bytes});
                    if (label == "notification")
                        m.notification_link_transmissions += stats.transmissions;
                    if (s_.shared_link && label == "notification" && edge.first == s_.shared_link->from &&
                        edge.second == s_.shared_link->to)
                        shared += stats.transmissions;
                }
        };
        if (fabric_) {
            for (const char* label : {"observe-request", "request", "ack", "response", "notification"})
                if (const auto n = fabric_->publications(label))
                    m.fabric_publications[label] = n;
            add_links("icn", fabric_links());
        }
        add_links("ip", udp_.links());
        if (s_.shared_link)
            m.shared_link_per_update = ratio(static_cast<double>(shared), static_cast<double>(m.server_updates));
        m.trace_digest = icn::to_hex(nap::sha256(trace));
        return m;
    }

    std::map<std::string, std::map<icn::Edge, icn::LinkStats>> fabric_links() const
    {
        std::map<std::string, std::map<icn::Edge, icn::LinkStats>> out;
        for (const char* label : {"observe-request", "request", "ack", "response", "notification"}) {
            for (const auto& n : topology_.nodes())
                for (const auto& peer : topology_.neighbors(n)) {
                    const auto st = fabric_->link_stats(n, peer, label);
                    if (st.transmissions)
                        out[label][{n, peer}] = st;
                }
        }
        return out;
    }

    const Scenario& s_;
    Mode mode_;
    icn::Scheduler scheduler_;
    Trace trace_;
    icn::Topology topology_;
    SimUdp udp_;
    std::unique_ptr<icn::Fabric> fabric_;
    std::vector<std::unique_ptr<nap::ClientNap>> cnaps_;
    std::vector<std::unique_ptr<nap::ServerNap>> snaps_;
    std::vector<std::unique_ptr<EmbeddedServer>> servers_;
    std::vector<std::unique_ptr<EmbeddedClient>> clients_;
};

}  // namespace

RunResult simulate(const Scenario& s, Mode mode)
{
    validate(s);
    Simulation sim(s, mode);
    return sim.run();
}

RunMetrics run_scenario(const Scenario& s, std::string* trace)
{
    RunResult r = simulate(s, Mode::Gateway);
    if (trace)
        *trace = std::move(r.trace);
    return std::move(r.metrics);
}

RunMetrics run_baseline(const Scenario& s, std::string* trace)
{
    RunResult r = simulate(s, Mode::Baseline);
    if (trace)
        *trace = std::move(r.trace);
    return std::move(r.metrics);
}

std::string to_text(const RunMetrics& m)
{
    std::ostringstream os;
    os << "run scenario=" << m.scenario << " seed=" << m.seed << " mode=" << to_string(m.mode) << '\n';
    os << "server requests_received=" << m.server_requests_received
       << " observe_registrations=" << m.server_observe_registrations << " acks_received=" << m.server_acks_received
       << " notifications_sent=" << m.server_notifications_sent << " updates=" << m.server_updates
       << " bytes=" << m.server_bytes << '\n';
    os << "clients requests_sent=" << m.client_requests_sent << " acks_sent=" << m.client_acks_sent
       << " notifications=" << m.client_notifications << " wrong_token=" << m.client_wrong_token << '\n';
    for (const auto& s : m.servers)
        os << "server.detail fqdn=" << s.fqdn << " requests_received=" << s.requests_received
           << " observe_registrations=" << s.observe_registrations << " deregistrations=" << s.deregistrations
           << " acks_received=" << s.acks_received << " rsts_received=" << s.rsts_received
           << " notifications_sent=" << s.notifications_sent << " updates=" << s.updates
           << " bytes_in=" << s.bytes_in << " bytes_out=" << s.bytes_out << '\n';
    for (const auto& c : m.clients) {
        std::string joined;
        for (const auto& p : c.payloads)
            joined += p + '\n';
        os << "client id=" << c.id << " requests_sent=" << c.requests_sent << " retransmissions=" << c.retransmissions
           << " acks_sent=" << c.acks_sent << " rsts_sent=" << c.rsts_sent << " bytes_sent=" << c.bytes_sent
           << " bytes_received=" << c.bytes_received << " notifications=" << c.notifications
           << " wrong_token=" << c.wrong_token << " late=" << c.late << " errors=" << c.errors
           << " payload_digest=" << icn::to_hex(nap::sha256(joined)) << '\n';
    }
    for (const auto& [id, c] : m.naps)
        os << "nap id=" << id << ' ' << nap::to_string(c) << '\n';
    for (const auto& [label, n] : m.fabric_publications)
        os << "publications label=" << label << " count=" << n << '\n';
    for (const auto& l : m.links)
        os << "link plane=" << l.plane << " label=" << l.label << " from=" << l.from << " to=" << l.to
           << " transmissions=" << l.transmissions << " bytes=" << l.bytes << '\n';
    os << "notification_links transmissions=" << m.notification_link_transmissions << '\n';
    if (m.shared_link_per_update)
        os << "shared_link per_update=" << std::fixed << std::setprecision(4) << *m.shared_link_per_update << '\n';
    os << "trace sha256=" << m.trace_digest << '\n';
    return os.str();
}

Comparison compare(const RunMetrics& m, const RunMetrics& b)
{
    if (m.scenario != b.scenario || m.seed != b.seed)
        throw Error(Errc::scenario_mismatch,
                    m.scenario + "/" + std::to_string(m.seed) + " vs " + b.scenario + "/" + std::to_string(b.seed));
    Comparison c;
    const auto gateway_rx = static_cast<double>(m.server_requests_received + m.server_acks_received);
    const auto baseline_rx = static_cast<double>(b.server_requests_received + b.server_acks_received);
    c.forwarded_request_ratio = ratio(gateway_rx, baseline_rx);
    c.forward_fraction = ratio(gateway_rx, static_cast<double>(m.client_requests_sent + m.client_acks_sent));
    c.byte_ratio = ratio(static_cast<double>(m.server_bytes), static_cast<double>(b.server_bytes));
    c.shared_link_gateway = m.shared_link_per_update;
    c.shared_link_baseline = b.shared_link_per_update;
    c.notification_links_run = m.notification_link_transmissions;
    c.notification_links_against = b.notification_link_transmissions;
    for (const auto& [id, counters] : m.naps)
        c.acks_suppressed[id] = counters.acks_suppressed;
    return c;
}

std::string report(const RunMetrics& m, const RunMetrics& b)
{
    const Comparison c = compare(m, b);
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "report scenario=" << m.scenario << " seed=" << m.seed << " run=" << to_string(m.mode)
       << " against=" << to_string(b.mode) << '\n';
    os << "forwarded_request_ratio=" << c.forwarded_request_ratio << '\n';
    os << "forward_fraction=" << c.forward_fraction << '\n';
    os << "byte_ratio=" << c.byte_ratio << '\n';
    os << "server_requests run=" << m.server_requests_received << " against=" << b.server_requests_received << '\n';
    if (c.shared_link_gateway || c.shared_link_baseline) {
        os << "shared_link_per_update run=" << c.shared_link_gateway.value_or(0.0)
           << " against=" << c.shared_link_baseline.value_or(0.0) << '\n';
    }
    os << "notification_link_transmissions run=" << c.notification_links_run
       << " against=" << c.notification_links_against << '\n';
    for (const auto& [id, n] : c.acks_suppressed)
        os << "acks_suppressed nap=" << id << " count=" << n << '\n';
    return os.str();
}

}  // namespace coapicn::harness
