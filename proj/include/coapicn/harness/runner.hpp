#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coapicn/harness/endpoints.hpp"
#include "coapicn/harness/scenario.hpp"
#include "coapicn/nap/nap.hpp"

namespace coapicn::harness {

enum class Mode {
    Gateway,        // client and server NAPs, multicast responses
    UnicastFabric,  // client and server NAPs, one publication per client NAP
    Baseline,       // no NAPs: clients observe the server directly over IP
};

std::string_view to_string(Mode m) noexcept;

struct LinkMetric {
    std::string plane;  // "icn" or "ip"
    std::string label;
    std::string from;
    std::string to;
    std::uint64_t transmissions = 0;
    std::uint64_t bytes = 0;
};

struct RunMetrics {
    std::string scenario;
    std::uint64_t seed = 0;
    Mode mode = Mode::Gateway;

    std::map<std::string, nap::NapCounters> naps;
    std::vector<ServerMetrics> servers;
    std::vector<ClientMetrics> clients;

    std::uint64_t server_requests_received = 0;
    std::uint64_t server_observe_registrations = 0;
    std::uint64_t server_acks_received = 0;
    std::uint64_t server_notifications_sent = 0;
    std::uint64_t server_updates = 0;
    std::uint64_t server_bytes = 0;  // in + out at every server endpoint

    std::uint64_t client_requests_sent = 0;
    std::uint64_t client_acks_sent = 0;
    std::uint64_t client_notifications = 0;
    std::uint64_t client_wrong_token = 0;

    std::map<std::string, std::uint64_t> fabric_publications;  // by traffic class
    std::vector<LinkMetric> links;
    /// Notification transmissions summed over every link of both planes.
    std::uint64_t notification_link_transmissions = 0;

    /// Notification transmissions on the scenario's shared link divided by
    /// server updates, when the scenario names a shared link.
    std::optional<double> shared_link_per_update;

    std::string trace_digest;  // SHA-256 of the full trace text
};

struct RunResult {
    RunMetrics metrics;
    std::string trace;
};

/// Runs the scenario on the discrete-event clock until its duration.
/// Deterministic for a given scenario (including its seed).
RunResult simulate(const Scenario& s, Mode mode);

RunMetrics run_scenario(const Scenario& s, std::string* trace = nullptr);
RunMetrics run_baseline(const Scenario& s, std::string* trace = nullptr);

/// Line-oriented "key=value" rendering, fields in a fixed order.
std::string to_text(const RunMetrics& m);

struct Comparison {
    /// Gateway server-received requests+ACKs over the baseline's.
    double forwarded_request_ratio = 1.0;
    /// Gateway server-received requests+ACKs over gateway client-emitted.
    double forward_fraction = 1.0;
    double byte_ratio = 1.0;
    std::optional<double> shared_link_gateway;
    std::optional<double> shared_link_baseline;
    std::uint64_t notification_links_run = 0;
    std::uint64_t notification_links_against = 0;
    std::map<std::string, std::uint64_t> acks_suppressed;  // per NAP
};

/// Throws scenario-mismatch when the runs come from different scenarios.
Comparison compare(const RunMetrics& m, const RunMetrics& b);
std::string report(const RunMetrics& m, const RunMetrics& b);

}  // namespace coapicn::harness
