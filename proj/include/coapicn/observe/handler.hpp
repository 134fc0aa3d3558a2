#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coapicn/coap/message.hpp"
#include "coapicn/time.hpp"

namespace coapicn::observe {

/// Where responses for one requester go. On a client-side NAP the address is
/// the client's UDP endpoint; on a server-side NAP it names the peer NAP.
struct ClientNode {
    std::string return_address;
    Bytes token;

    friend bool operator==(const ClientNode&, const ClientNode&) = default;
};

/// One observer's registration for a resource.
struct Subscription {
    std::string resource_uri;
    Bytes token;
    std::uint16_t message_id = 0;  // the registration's MID
    bool first_response_pending = true;
    ClientNode client;
    SimTime created_at{};
    coap::MessageType registration_type = coap::MessageType::Confirmable;
    std::uint32_t notifications_sent = 0;
};

/// A CON notification whose acknowledgement is answered here instead of
/// being forwarded upstream.
struct SuppressedAck {
    std::string client;
    Bytes token;
    std::uint16_t message_id = 0;
};

/// The upstream observation that stands for every local subscription of a
/// resource. Its token is what the next hop echoes back.
struct UpstreamObservation {
    std::string resource_uri;
    Bytes token;
};

enum class Action { Forward, DropDuplicate, AggregateLocal };

std::string_view to_string(Action a) noexcept;

struct HandlerDecision {
    Action action = Action::DropDuplicate;
    std::optional<coap::CoapMessage> outbound;  // set iff action == Forward
    std::string resource_uri;
};

/// One rewritten copy of an upstream response.
struct Delivery {
    ClientNode to;
    coap::CoapMessage message;
    /// This copy is CON and its ACK is the one relayed to the upstream
    /// CON notification. Every other CON copy gets its ACK suppressed.
    bool relays_upstream_ack = false;
};

enum class AckDecision { Suppress, Forward };

enum class DeregisterOutcome { RemovedLocal, RemovedAndForward };

struct DeregisterResult {
    DeregisterOutcome outcome = DeregisterOutcome::RemovedLocal;
    std::string resource_uri;
    Bytes upstream_token;  // set when outcome == RemovedAndForward
};

struct HandlerConfig {
    SimTime subscription_lifetime = std::chrono::seconds(90);
    /// 0 sends every steady-state notification as NON; N > 0 makes every Nth
    /// notification to each observer CON.
    unsigned con_every = 0;
};

/// Proxy state of one NAP's CoAP handler: aggregates duplicate observe
/// registrations, fans upstream notifications out to every observer with the
/// observer's own token and message ID, and answers ACKs for notifications it
/// generated on behalf of the origin server.
///
/// Single-writer: one instance belongs to one event-processing context.
class ObserveHandler {
public:
    explicit ObserveHandler(HandlerConfig config = {}) : config_(config) {}

    /// Registration path. Retransmissions (same requester and token) are
    /// dropped; a second observer of a known resource is recorded without
    /// contacting upstream; the first observer yields the request to forward.
    HandlerDecision handle_observe_request(const coap::CoapMessage& req, std::string_view from, SimTime now);

    /// Fans one upstream response out to every subscription of `resource_uri`.
    /// Throws no-matching-subscription when nobody observes the resource.
    std::vector<Delivery> handle_observe_response(const coap::CoapMessage& resp, std::string_view resource_uri);

    /// Like handle_observe_response for a response that ends the observation
    /// (an error, or a response without Observe). All subscriptions of the
    /// resource and its upstream record are removed.
    std::vector<Delivery> handle_final_response(const coap::CoapMessage& resp, std::string_view resource_uri);

    /// Resource URI of the upstream observation, or failing that the first
    /// subscription, carrying `token`. Throws not-found.
    std::string resolve_uri_by_token(BytesView token) const;

    /// Suppress iff (from, ack MID) is a recorded suppressed ACK; the entry
    /// is consumed.
    AckDecision handle_client_ack(const coap::CoapMessage& ack, std::string_view from);

    void record_suppressed_ack(std::string_view client, BytesView token, std::uint16_t message_id);

    DeregisterResult deregister(BytesView token, std::string_view from);

    /// Every subscription of a client that sent RST.
    std::vector<DeregisterResult> reset_client(std::string_view from);

    /// Drops subscriptions older than the configured lifetime.
    std::vector<DeregisterResult> expire(SimTime now);

    std::uint16_t next_client_mid(const ClientNode& client);

    const UpstreamObservation* upstream(std::string_view resource_uri) const;
    std::size_t observer_count(std::string_view resource_uri) const;
    std::span<const Subscription> subscriptions() const { return subscriptions_; }
    std::span<const SuppressedAck> suppressed_acks() const { return suppressed_; }
    const HandlerConfig& config() const { return config_; }

    /// Line-oriented dump of every list, in insertion order.
    std::string snapshot() const;

private:
    std::vector<Delivery> fan_out(const coap::CoapMessage& resp, std::string_view resource_uri);
    DeregisterResult remove_at(std::size_t index);
    Bytes unique_upstream_token(const Bytes& preferred, std::string_view resource_uri);

    HandlerConfig config_;
    std::vector<Subscription> subscriptions_;
    std::vector<SuppressedAck> suppressed_;
    std::vector<UpstreamObservation> upstreams_;
    std::map<std::string, std::uint16_t, std::less<>> client_mids_;
    std::uint64_t minted_tokens_ = 0;
};

}  // namespace coapicn::observe
