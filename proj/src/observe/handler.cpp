#include "coapicn/observe/handler.hpp"

#include <algorithm>
#include <sstream>

#include "coapicn/coap/uri.hpp"
#include "coapicn/error.hpp"

namespace coapicn::observe {

using coap::CoapMessage;
using coap::MessageType;

std::string_view to_string(Action a) noexcept
{
    switch (a) {
    case Action::Forward: return "FORWARD";
    case Action::DropDuplicate: return "DROP_DUPLICATE";
    case Action::AggregateLocal: return "AGGREGATE_LOCAL";
    }
    return "?";
}

namespace {

bool same_token(BytesView a, BytesView b)
{
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

HandlerDecision ObserveHandler::handle_observe_request(const CoapMessage& req, std::string_view from, SimTime now)
{
    if (!req.is_observe_register())
        throw Error(Errc::not_an_observe_request, coap::describe(req));
    if (from.empty())
        throw Error(Errc::malformed_uri, "empty return address");

    HandlerDecision decision;
    decision.resource_uri = coap::request_uri(req);

    bool token_match = false;
    bool uri_match = false;
    for (const auto& sub : subscriptions_) {
        if (sub.client.return_address == from && same_token(sub.token, req.token))
            token_match = true;
        if (sub.resource_uri == decision.resource_uri)
            uri_match = true;
    }

    if (token_match) {
        decision.action = Action::DropDuplicate;
        return decision;
    }

    Subscription sub;
    sub.resource_uri = decision.resource_uri;
    sub.token = req.token;
    sub.message_id = req.message_id;
    sub.client = ClientNode{std::string(from), req.token};
    sub.created_at = now;
    sub.registration_type = req.type;
    subscriptions_.push_back(std::move(sub));

    if (uri_match) {
        decision.action = Action::AggregateLocal;
        return decision;
    }

    CoapMessage outbound = req;
    outbound.set_observe(coap::kObserveRegister);
    outbound.token = unique_upstream_token(req.token, decision.resource_uri);
    upstreams_.push_back(UpstreamObservation{decision.resource_uri, outbound.token});
    decision.action = Action::Forward;
    decision.outbound = std::move(outbound);
    return decision;
}

Bytes ObserveHandler::unique_upstream_token(const Bytes& preferred, std::string_view resource_uri)
{
    auto in_use = [&](const Bytes& token) {
        return std::any_of(upstreams_.begin(), upstreams_.end(), [&](const UpstreamObservation& u) {
            return u.resource_uri != resource_uri && same_token(u.token, token);
        });
    };
    if (!in_use(preferred))
        return preferred;
    // Two resources would share one upstream token; the next hop could not
    // tell their notifications apart.
    Bytes token;
    do {
        const std::uint64_t n = ++minted_tokens_;
        token = Bytes{0xC0};
        for (int shift = 48; shift >= 0; shift -= 8)
            token.push_back(static_cast<std::uint8_t>(n >> shift));
    } while (in_use(token));
    return token;
}

std::vector<Delivery> ObserveHandler::fan_out(const CoapMessage& resp, std::string_view resource_uri)
{
    const bool upstream_con = resp.type == MessageType::Confirmable;
    bool relay_assigned = false;
    std::vector<Delivery> out;
    for (auto& sub : subscriptions_) {
        if (sub.resource_uri != resource_uri)
            continue;
        Delivery d;
        d.to = sub.client;
        d.message = resp;
        d.message.token = sub.token;
        if (sub.first_response_pending) {
            if (sub.registration_type == MessageType::Confirmable) {
                // Piggy-backed on the registration's ACK.
                d.message.type = MessageType::Acknowledgement;
                d.message.message_id = sub.message_id;
            } else {
                d.message.type = MessageType::NonConfirmable;
                d.message.message_id = next_client_mid(sub.client);
            }
            sub.first_response_pending = false;
        } else {
            ++sub.notifications_sent;
            const bool con = config_.con_every != 0 && sub.notifications_sent % config_.con_every == 0;
            d.message.type = con ? MessageType::Confirmable : MessageType::NonConfirmable;
            d.message.message_id = next_client_mid(sub.client);
            if (con && upstream_con && !relay_assigned) {
                d.relays_upstream_ack = true;
                relay_assigned = true;
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<Delivery> ObserveHandler::handle_observe_response(const CoapMessage& resp, std::string_view resource_uri)
{
    if (!resp.observe().has_value())
        throw Error(Errc::not_an_observe_request, "response without Observe: " + coap::describe(resp));
    if (observer_count(resource_uri) == 0)
        throw Error(Errc::no_matching_subscription, std::string(resource_uri));
    return fan_out(resp, resource_uri);
}

std::vector<Delivery> ObserveHandler::handle_final_response(const CoapMessage& resp, std::string_view resource_uri)
{
    if (observer_count(resource_uri) == 0)
        throw Error(Errc::no_matching_subscription, std::string(resource_uri));
    std::vector<Delivery> out = fan_out(resp, resource_uri);
    for (std::size_t i = subscriptions_.size(); i-- > 0;)
        if (subscriptions_[i].resource_uri == resource_uri)
            remove_at(i);
    return out;
}

std::string ObserveHandler::resolve_uri_by_token(BytesView token) const
{
    for (const auto& u : upstreams_)
        if (same_token(u.token, token))
            return u.resource_uri;
    for (const auto& sub : subscriptions_)
        if (same_token(sub.token, token))
            return sub.resource_uri;
    throw Error(Errc::not_found, "token " + to_hex(token));
}

AckDecision ObserveHandler::handle_client_ack(const CoapMessage& ack, std::string_view from)
{
    auto it = std::find_if(suppressed_.begin(), suppressed_.end(), [&](const SuppressedAck& s) {
        return s.message_id == ack.message_id && s.client == from;
    });
    if (it == suppressed_.end())
        return AckDecision::Forward;
    suppressed_.erase(it);
    return AckDecision::Suppress;
}

void ObserveHandler::record_suppressed_ack(std::string_view client, BytesView token, std::uint16_t message_id)
{
    for (const auto& s : suppressed_)
        if (s.message_id == message_id && s.client == client)
            throw Error(Errc::duplicate_mid, std::string(client) + " mid " + std::to_string(message_id));
    suppressed_.push_back(SuppressedAck{std::string(client), Bytes(token.begin(), token.end()), message_id});
}

DeregisterResult ObserveHandler::remove_at(std::size_t index)
{
    Subscription sub = std::move(subscriptions_[index]);
    subscriptions_.erase(subscriptions_.begin() + static_cast<std::ptrdiff_t>(index));
    std::erase_if(suppressed_, [&](const SuppressedAck& s) {
        return s.client == sub.client.return_address && same_token(s.token, sub.token);
    });

    DeregisterResult result;
    result.resource_uri = sub.resource_uri;
    if (observer_count(sub.resource_uri) > 0)
        return result;

    result.outcome = DeregisterOutcome::RemovedAndForward;
    auto up = std::find_if(upstreams_.begin(), upstreams_.end(),
                           [&](const UpstreamObservation& u) { return u.resource_uri == sub.resource_uri; });
    if (up != upstreams_.end()) {
        result.upstream_token = up->token;
        upstreams_.erase(up);
    }
    return result;
}

DeregisterResult ObserveHandler::deregister(BytesView token, std::string_view from)
{
    for (std::size_t i = 0; i < subscriptions_.size(); ++i) {
        const auto& sub = subscriptions_[i];
        if (sub.client.return_address == from && same_token(sub.token, token))
            return remove_at(i);
    }
    throw Error(Errc::unknown_subscription, std::string(from) + " token " + to_hex(token));
}

std::vector<DeregisterResult> ObserveHandler::reset_client(std::string_view from)
{
    std::vector<DeregisterResult> out;
    for (std::size_t i = 0; i < subscriptions_.size();) {
        if (subscriptions_[i].client.return_address == from)
            out.push_back(remove_at(i));
        else
            ++i;
    }
    return out;
}

std::vector<DeregisterResult> ObserveHandler::expire(SimTime now)
{
    std::vector<DeregisterResult> out;
    for (std::size_t i = 0; i < subscriptions_.size();) {
        if (now - subscriptions_[i].created_at >= config_.subscription_lifetime)
            out.push_back(remove_at(i));
        else
            ++i;
    }
    return out;
}

std::uint16_t ObserveHandler::next_client_mid(const ClientNode& client)
{
    auto it = client_mids_.find(client.return_address);
    if (it == client_mids_.end())
        it = client_mids_.emplace(client.return_address, std::uint16_t{0}).first;
    return ++it->second;
}

const UpstreamObservation* ObserveHandler::upstream(std::string_view resource_uri) const
{
    for (const auto& u : upstreams_)
        if (u.resource_uri == resource_uri)
            return &u;
    return nullptr;
}

std::size_t ObserveHandler::observer_count(std::string_view resource_uri) const
{
    return static_cast<std::size_t>(std::count_if(subscriptions_.begin(), subscriptions_.end(),
                                                  [&](const Subscription& s) { return s.resource_uri == resource_uri; }));
}

std::string ObserveHandler::snapshot() const
{
    std::ostringstream os;
    for (const auto& u : upstreams_)
        os << "upstream uri=" << u.resource_uri << " token=" << to_hex(u.token) << '\n';
    for (const auto& s : subscriptions_) {
        os << "subscription uri=" << s.resource_uri << " client=" << s.client.return_address
           << " token=" << to_hex(s.token) << " mid=" << s.message_id
           << " pending=" << (s.first_response_pending ? 1 : 0) << " created_us=" << to_us(s.created_at)
           << " sent=" << s.notifications_sent << '\n';
    }
    for (const auto& s : suppressed_)
        os << "suppressed client=" << s.client << " token=" << to_hex(s.token) << " mid=" << s.message_id << '\n';
    return os.str();
}

}  // namespace coapicn::observe
