#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coapicn/coap/message.hpp"
#include "coapicn/icn/fabric.hpp"
#include "coapicn/nap/nap.hpp"
#include "coapicn/time.hpp"

namespace coapicn::harness {

struct LinkSpec {
    std::string a;
    std::string b;
    SimTime latency = icn::kDefaultLinkLatency;
};

struct NapSpec {
    std::string id;
    nap::Role role = nap::Role::ClientSide;
    std::string listen;
};

struct ResourceSpec {
    std::string path;  // "/R1"
    SimTime period{};
    std::size_t payload_size = 16;
    coap::MessageType type = coap::MessageType::NonConfirmable;
};

struct ServerSpec {
    std::string fqdn;
    std::string endpoint;
    std::string nap;  // node the server hangs off
    std::vector<ResourceSpec> resources;
};

struct ClientSpec {
    std::string id;
    std::string endpoint;
    std::string nap;
    std::string url;
    std::string token;
    SimTime start{};
    SimTime duration{};
    coap::MessageType type = coap::MessageType::Confirmable;
};

struct TimingSpec {
    SimTime ack_timeout = std::chrono::seconds(2);
    double ack_random_factor = 1.5;
    unsigned max_retransmit = 4;
    SimTime subscription_lifetime = std::chrono::seconds(90);
    unsigned con_every = 1;
    SimTime access_latency = std::chrono::milliseconds(1);
};

struct SharedLink {
    std::string from;
    std::string to;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    SimTime duration{};
    std::vector<std::string> nodes;
    std::vector<LinkSpec> links;
    std::vector<NapSpec> naps;
    std::vector<ServerSpec> servers;
    std::vector<ClientSpec> clients;
    TimingSpec timing;
    icn::FabricConfig fabric;
    std::optional<SharedLink> shared_link;
};

/// Parses the JSON scenario format documented in the README. Unknown keys
/// are rejected. Throws invalid-scenario naming the offending field.
Scenario parse_scenario(std::string_view json);
Scenario load_scenario(const std::string& path);

/// Cross-field checks; parse_scenario runs it too.
void validate(const Scenario& s);

icn::Topology build_topology(const Scenario& s);

/// NAP configurations with attached servers filled in from `servers`.
std::vector<nap::NapConfig> nap_configs(const Scenario& s, bool multicast);

}  // namespace coapicn::harness
