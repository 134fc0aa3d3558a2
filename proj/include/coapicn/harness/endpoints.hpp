#pragma once

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "coapicn/coap/message.hpp"
#include "coapicn/harness/scenario.hpp"
#include "coapicn/icn/scheduler.hpp"
#include "coapicn/icn/topology.hpp"
#include "coapicn/nap/nap.hpp"
#include "coapicn/trace.hpp"

namespace coapicn::harness {

/// Traffic class of a datagram, for per-link accounting: request, ack,
/// rst, notification, response, or raw when it does not decode.
std::string classify(BytesView wire);

/// IP side of the simulation. Endpoints hang off topology nodes; datagrams
/// between endpoints on different nodes follow the topology's shortest path
/// and are counted on every link they cross.
class SimUdp : public nap::DatagramSender {
public:
    using Receiver = std::function<void(BytesView, const std::string& from)>;

    SimUdp(icn::Scheduler& scheduler, icn::Topology topology, SimTime access_latency, Trace* trace);

    void bind(const std::string& endpoint, const icn::NodeId& node, Receiver receiver);
    void send_datagram(const std::string& from, const std::string& to, Bytes wire) override;

    /// Directed link transmissions of one class ("" for all).
    icn::LinkStats link_stats(const icn::NodeId& from, const icn::NodeId& to, std::string_view label = {}) const;
    const std::map<std::string, std::map<icn::Edge, icn::LinkStats>, std::less<>>& links() const { return links_; }
    std::uint64_t dropped() const { return dropped_; }

private:
    struct Binding {
        icn::NodeId node;
        Receiver receiver;
    };

    icn::Scheduler& scheduler_;
    icn::Topology topology_;
    SimTime access_latency_;
    Trace* trace_;
    std::map<std::string, Binding> bindings_;
    std::map<std::string, std::map<icn::Edge, icn::LinkStats>, std::less<>> links_;
    std::uint64_t dropped_ = 0;
};

struct ClientMetrics {
    std::string id;
    std::uint64_t requests_sent = 0;  // first transmissions and retransmissions
    std::uint64_t retransmissions = 0;
    std::uint64_t acks_sent = 0;
    std::uint64_t rsts_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_received = 0;
    std::uint64_t notifications = 0;
    std::uint64_t wrong_token = 0;
    std::uint64_t late = 0;    // notifications after deregistering
    std::uint64_t errors = 0;  // 4.xx/5.xx responses
    std::vector<std::string> payloads;
};

/// Observing client: registers at `start`, acknowledges CON notifications,
/// deregisters at `start + duration`. CON requests are retransmitted with
/// exponential back-off.
class EmbeddedClient {
public:
    EmbeddedClient(ClientSpec spec, std::string target, bool via_proxy, const TimingSpec& timing,
                   icn::Scheduler& scheduler, nap::DatagramSender& udp, std::uint64_t seed, Trace* trace);

    void start();
    void on_datagram(BytesView wire, const std::string& from);
    const ClientMetrics& metrics() const { return metrics_; }
    const ClientSpec& spec() const { return spec_; }

private:
    struct Outstanding {
        coap::CoapMessage msg;
        unsigned attempts = 0;
        SimTime timeout{};
    };

    coap::CoapMessage observe_request(std::uint32_t observe);
    void send_request(coap::CoapMessage msg);
    void on_timeout(std::uint16_t mid);
    void transmit(const coap::CoapMessage& msg);
    void on_response(const coap::CoapMessage& msg);
    void note(std::string_view event, std::string_view detail);

    ClientSpec spec_;
    std::string target_;
    bool via_proxy_;
    TimingSpec timing_;
    icn::Scheduler& scheduler_;
    nap::DatagramSender& udp_;
    Trace* trace_;
    std::mt19937_64 rng_;
    std::uint16_t next_mid_;
    std::map<std::uint16_t, Outstanding> outstanding_;
    std::set<std::uint16_t> seen_con_;
    bool deregistered_ = false;
    ClientMetrics metrics_;
};

struct ServerMetrics {
    std::string fqdn;
    std::uint64_t requests_received = 0;
    std::uint64_t observe_registrations = 0;
    std::uint64_t deregistrations = 0;
    std::uint64_t acks_received = 0;
    std::uint64_t rsts_received = 0;
    std::uint64_t notifications_sent = 0;
    std::uint64_t updates = 0;  // state changes with at least one observer
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
};

/// Origin server: answers observe registrations with a piggy-backed
/// response and emits one notification per observer every period. CON
/// notifications are not retransmitted.
class EmbeddedServer {
public:
    EmbeddedServer(ServerSpec spec, icn::Scheduler& scheduler, nap::DatagramSender& udp, std::uint64_t seed,
                   Trace* trace);

    void start(SimTime end);
    void on_datagram(BytesView wire, const std::string& from);
    const ServerMetrics& metrics() const { return metrics_; }
    const ServerSpec& spec() const { return spec_; }
    std::size_t observers(std::string_view path) const;

private:
    struct Observer {
        std::string endpoint;
        Bytes token;
    };
    struct Resource {
        ResourceSpec spec;
        std::uint32_t seq = 0;
        Bytes payload;
        std::vector<Observer> observers;
    };

    void tick(std::size_t index, SimTime end);
    Bytes make_payload(const Resource& r);
    Resource* find(const coap::CoapMessage& req);
    void send(const std::string& to, const coap::CoapMessage& msg);
    void note(std::string_view event, std::string_view detail);

    ServerSpec spec_;
    icn::Scheduler& scheduler_;
    nap::DatagramSender& udp_;
    Trace* trace_;
    std::mt19937_64 rng_;
    std::uint16_t next_mid_;
    std::vector<Resource> resources_;
    std::map<std::pair<std::string, std::uint16_t>, std::pair<std::size_t, Bytes>> con_sent_;
    ServerMetrics metrics_;
};

}  // namespace coapicn::harness
