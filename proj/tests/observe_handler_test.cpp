#include "doctest.h"

#include "coapicn/coap/uri.hpp"
#include "coapicn/observe/handler.hpp"
#include "observe_property.hpp"
#include "test_util.hpp"

using namespace coapicn;
using namespace coapicn::coap;
using namespace coapicn::observe;
using coapicn::test::error_of;

namespace {

const std::string kR = "coap://aueb.example.gr/R1";

CoapMessage observe_get(const std::string& token, std::uint16_t mid, const std::string& uri = kR)
{
    CoapMessage m;
    m.type = MessageType::Confirmable;
    m.code = code::Get;
    m.message_id = mid;
    m.token = to_bytes(token);
    m.set_observe(kObserveRegister);
    m.add_option(option::ProxyUri, uri);
    return m;
}

CoapMessage notification(const std::string& token, MessageType type, std::uint32_t seq, const std::string& payload)
{
    CoapMessage m;
    m.type = type;
    m.code = code::Content;
    m.message_id = static_cast<std::uint16_t>(0x7000 + seq);
    m.token = to_bytes(token);
    m.set_observe(seq);
    m.payload = to_bytes(payload);
    return m;
}

}  // namespace

TEST_CASE("first request is forwarded, second client aggregated, retransmission dropped")
{
    ObserveHandler h;
    const HandlerDecision first = h.handle_observe_request(observe_get("t1", 10), "10.0.0.1:40001", 0us);
    CHECK(first.action == Action::Forward);
    REQUIRE(first.outbound.has_value());
    CHECK(first.outbound->token == to_bytes("t1"));
    CHECK(first.outbound->observe() == kObserveRegister);
    CHECK(first.resource_uri == kR);

    const HandlerDecision second = h.handle_observe_request(observe_get("t2", 20), "10.0.0.2:40002", 1000us);
    CHECK(second.action == Action::AggregateLocal);
    CHECK_FALSE(second.outbound.has_value());

    const HandlerDecision again = h.handle_observe_request(observe_get("t1", 10), "10.0.0.1:40001", 2000us);
    CHECK(again.action == Action::DropDuplicate);
    CHECK_FALSE(again.outbound.has_value());
    CHECK(h.subscriptions().size() == 2);
}

TEST_CASE("equal tokens from different clients are distinct subscriptions")
{
    ObserveHandler h;
    CHECK(h.handle_observe_request(observe_get("t", 1), "a", 0us).action == Action::Forward);
    CHECK(h.handle_observe_request(observe_get("t", 1), "b", 0us).action == Action::AggregateLocal);
    CHECK(h.subscriptions().size() == 2);
}

TEST_CASE("handle_observe_request rejects non-observe requests and bad URIs")
{
    ObserveHandler h;
    CoapMessage plain = observe_get("t1", 1);
    plain.remove_option(option::Observe);
    CHECK(error_of([&] { h.handle_observe_request(plain, "a", 0us); }) == Errc::not_an_observe_request);

    CoapMessage dereg = observe_get("t1", 1);
    dereg.set_observe(kObserveDeregister);
    CHECK(error_of([&] { h.handle_observe_request(dereg, "a", 0us); }) == Errc::not_an_observe_request);

    CoapMessage bad = observe_get("t1", 1, "http://x/y");
    CHECK(error_of([&] { h.handle_observe_request(bad, "a", 0us); }) == Errc::not_a_coap_uri);
    CHECK(h.subscriptions().empty());
}

TEST_CASE("response fan-out: two pending observers get ACK-typed first responses")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 10), "c1", 0us);
    h.handle_observe_request(observe_get("t2", 20), "c2", 0us);

    CoapMessage first = notification("t1", MessageType::Acknowledgement, 1, "22.5");
    first.message_id = 10;
    const auto out = h.handle_observe_response(first, kR);
    REQUIRE(out.size() == 2);
    CHECK(out[0].to.return_address == "c1");
    CHECK(out[0].message.token == to_bytes("t1"));
    CHECK(out[0].message.type == MessageType::Acknowledgement);
    CHECK(out[0].message.message_id == 10);
    CHECK(out[1].to.return_address == "c2");
    CHECK(out[1].message.token == to_bytes("t2"));
    CHECK(out[1].message.type == MessageType::Acknowledgement);
    CHECK(out[1].message.message_id == 20);
    for (const auto& s : h.subscriptions())
        CHECK_FALSE(s.first_response_pending);
}

TEST_CASE("response fan-out: one served observer and two first responses")
{
    // Hand-simulated against the observer loop: the served observer gets a
    // NON copy with a fresh MID, the two pending ones an ACK with their
    // registration MID; payload is shared.
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 10), "c1", 0us);
    h.handle_observe_response(notification("t1", MessageType::Acknowledgement, 1, "v1"), kR);
    h.handle_observe_request(observe_get("t2", 20), "c2", 0us);
    h.handle_observe_request(observe_get("t3", 30), "c3", 0us);

    const auto out = h.handle_observe_response(notification("t1", MessageType::NonConfirmable, 2, "v2"), kR);
    REQUIRE(out.size() == 3);
    CHECK(out[0].message.type == MessageType::NonConfirmable);
    CHECK(out[0].message.message_id == 1);
    CHECK(out[1].message.type == MessageType::Acknowledgement);
    CHECK(out[1].message.message_id == 20);
    CHECK(out[2].message.type == MessageType::Acknowledgement);
    CHECK(out[2].message.message_id == 30);
    std::vector<std::string> tokens;
    for (const auto& d : out) {
        CHECK(d.message.payload == to_bytes("v2"));
        CHECK(d.message.observe() == 2u);
        tokens.push_back(to_string(d.message.token));
    }
    CHECK(tokens == std::vector<std::string>{"t1", "t2", "t3"});
}

TEST_CASE("response for an unobserved resource")
{
    ObserveHandler h;
    CHECK(error_of([&] { h.handle_observe_response(notification("t1", MessageType::NonConfirmable, 1, "x"), kR); }) ==
          Errc::no_matching_subscription);
    CoapMessage no_observe = notification("t1", MessageType::NonConfirmable, 1, "x");
    no_observe.remove_option(option::Observe);
    h.handle_observe_request(observe_get("t1", 10), "c1", 0us);
    CHECK(error_of([&] { h.handle_observe_response(no_observe, kR); }) == Errc::not_an_observe_request);
}

TEST_CASE("NON registration gets a NON first response")
{
    ObserveHandler h;
    CoapMessage req = observe_get("t1", 10);
    req.type = MessageType::NonConfirmable;
    h.handle_observe_request(req, "c1", 0us);
    const auto out = h.handle_observe_response(notification("t1", MessageType::NonConfirmable, 1, "x"), kR);
    REQUIRE(out.size() == 1);
    CHECK(out[0].message.type == MessageType::NonConfirmable);
    CHECK(out[0].message.message_id == 1);
}

TEST_CASE("CON policy picks one relay copy per CON upstream notification")
{
    ObserveHandler h({.subscription_lifetime = std::chrono::seconds(90), .con_every = 1});
    h.handle_observe_request(observe_get("t1", 10), "c1", 0us);
    h.handle_observe_request(observe_get("t2", 20), "c2", 0us);
    h.handle_observe_response(notification("t1", MessageType::Acknowledgement, 1, "a"), kR);

    const auto out = h.handle_observe_response(notification("t1", MessageType::Confirmable, 2, "b"), kR);
    REQUIRE(out.size() == 2);
    CHECK(out[0].message.type == MessageType::Confirmable);
    CHECK(out[0].relays_upstream_ack);
    CHECK(out[1].message.type == MessageType::Confirmable);
    CHECK_FALSE(out[1].relays_upstream_ack);

    // NON upstream: nothing to relay.
    const auto non = h.handle_observe_response(notification("t1", MessageType::NonConfirmable, 3, "c"), kR);
    CHECK_FALSE(non[0].relays_upstream_ack);
    CHECK_FALSE(non[1].relays_upstream_ack);
}

TEST_CASE("con_every spaces CON notifications per observer")
{
    ObserveHandler h({.subscription_lifetime = std::chrono::seconds(90), .con_every = 3});
    h.handle_observe_request(observe_get("t1", 10), "c1", 0us);
    h.handle_observe_response(notification("t1", MessageType::Acknowledgement, 1, "a"), kR);
    std::string types;
    for (std::uint32_t seq = 2; seq < 8; ++seq)
        types += std::string(
            to_string(h.handle_observe_response(notification("t1", MessageType::NonConfirmable, seq, "x"), kR)[0]
                          .message.type));
    CHECK(types == "NONNONCONNONNONCON");
}

TEST_CASE("resolve_uri_by_token")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 10), "c1", 0us);
    CHECK(h.resolve_uri_by_token(to_bytes("t1")) == kR);
    CHECK(error_of([&] { h.resolve_uri_by_token(to_bytes("zz")); }) == Errc::not_found);
}

TEST_CASE("resolve_uri_by_token over a 2x2 registration table")
{
    // Exhaustive: each of two tokens registered against each of two
    // resources, by distinct clients so no request is a retransmission.
    const std::string r1 = "coap://s/R1";
    const std::string r2 = "coap://s/R2";
    for (int assignment = 0; assignment < 4; ++assignment) {
        ObserveHandler h;
        const std::string u1 = (assignment & 1) ? r2 : r1;
        const std::string u2 = (assignment & 2) ? r2 : r1;
        h.handle_observe_request(observe_get("ta", 1, u1), "ca", 0us);
        h.handle_observe_request(observe_get("tb", 2, u2), "cb", 0us);
        CHECK(h.resolve_uri_by_token(to_bytes("ta")) == u1);
        CHECK(h.resolve_uri_by_token(to_bytes("tb")) == u2);
    }
}

TEST_CASE("upstream tokens stay unique across resources")
{
    ObserveHandler h;
    const auto a = h.handle_observe_request(observe_get("t", 1, "coap://s/R1"), "ca", 0us);
    const auto b = h.handle_observe_request(observe_get("t", 2, "coap://s/R2"), "cb", 0us);
    REQUIRE(a.action == Action::Forward);
    REQUIRE(b.action == Action::Forward);
    CHECK(a.outbound->token == to_bytes("t"));
    CHECK(b.outbound->token != to_bytes("t"));
    CHECK(b.outbound->token.size() <= kMaxTokenLength);
    CHECK(h.resolve_uri_by_token(a.outbound->token) == "coap://s/R1");
    CHECK(h.resolve_uri_by_token(b.outbound->token) == "coap://s/R2");
}

TEST_CASE("ACK suppression")
{
    ObserveHandler h;
    CoapMessage ack = make_empty(MessageType::Acknowledgement, 7);

    h.record_suppressed_ack("c2", to_bytes("t2"), 7);
    CHECK(h.handle_client_ack(ack, "c2") == AckDecision::Suppress);
    // Entry consumed: the same MID acked again goes upstream.
    CHECK(h.handle_client_ack(ack, "c2") == AckDecision::Forward);

    h.record_suppressed_ack("c2", to_bytes("t2"), 7);
    CHECK(error_of([&] { h.record_suppressed_ack("c2", to_bytes("t2"), 7); }) == Errc::duplicate_mid);
    CHECK(h.handle_client_ack(make_empty(MessageType::Acknowledgement, 8), "c2") == AckDecision::Forward);
    // Same MID from another client is a different acknowledgement.
    CHECK(h.handle_client_ack(ack, "c1") == AckDecision::Forward);
}

TEST_CASE("deregistration propagates only for the last observer")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 1), "c1", 0us);
    h.handle_observe_request(observe_get("t2", 2), "c2", 0us);

    const DeregisterResult first = h.deregister(to_bytes("t2"), "c2");
    CHECK(first.outcome == DeregisterOutcome::RemovedLocal);
    CHECK(first.resource_uri == kR);
    CHECK(h.upstream(kR) != nullptr);

    const DeregisterResult last = h.deregister(to_bytes("t1"), "c1");
    CHECK(last.outcome == DeregisterOutcome::RemovedAndForward);
    CHECK(last.upstream_token == to_bytes("t1"));
    CHECK(h.upstream(kR) == nullptr);
    CHECK(h.subscriptions().empty());

    CHECK(error_of([&] { h.deregister(to_bytes("t1"), "c1"); }) == Errc::unknown_subscription);
}

TEST_CASE("the upstream token survives its registrant leaving")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 1), "c1", 0us);
    h.handle_observe_request(observe_get("t2", 2), "c2", 0us);
    h.deregister(to_bytes("t1"), "c1");
    CHECK(h.resolve_uri_by_token(to_bytes("t1")) == kR);
    const DeregisterResult last = h.deregister(to_bytes("t2"), "c2");
    CHECK(last.outcome == DeregisterOutcome::RemovedAndForward);
    CHECK(last.upstream_token == to_bytes("t1"));
}

TEST_CASE("deregistration drops the observer's pending suppressed ACKs")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 1), "c1", 0us);
    h.handle_observe_request(observe_get("t2", 2), "c2", 0us);
    h.record_suppressed_ack("c2", to_bytes("t2"), 5);
    h.deregister(to_bytes("t2"), "c2");
    CHECK(h.suppressed_acks().empty());
}

TEST_CASE("RST removes every subscription of the client")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 1, "coap://s/A"), "c1", 0us);
    h.handle_observe_request(observe_get("t2", 2, "coap://s/B"), "c1", 0us);
    h.handle_observe_request(observe_get("t3", 3, "coap://s/B"), "c2", 0us);
    const auto removed = h.reset_client("c1");
    REQUIRE(removed.size() == 2);
    CHECK(removed[0].outcome == DeregisterOutcome::RemovedAndForward);
    CHECK(removed[0].resource_uri == "coap://s/A");
    CHECK(removed[1].outcome == DeregisterOutcome::RemovedLocal);
    CHECK(h.subscriptions().size() == 1);
}

TEST_CASE("subscriptions expire after their lifetime")
{
    ObserveHandler h({.subscription_lifetime = std::chrono::seconds(90), .con_every = 0});
    h.handle_observe_request(observe_get("t1", 1), "c1", 0s);
    h.handle_observe_request(observe_get("t2", 2), "c2", std::chrono::seconds(30));
    CHECK(h.expire(std::chrono::seconds(89)).empty());
    const auto first = h.expire(std::chrono::seconds(90));
    REQUIRE(first.size() == 1);
    CHECK(first[0].outcome == DeregisterOutcome::RemovedLocal);
    const auto last = h.expire(std::chrono::seconds(120));
    REQUIRE(last.size() == 1);
    CHECK(last[0].outcome == DeregisterOutcome::RemovedAndForward);
    CHECK(last[0].upstream_token == to_bytes("t1"));
}

TEST_CASE("final response reaches every observer and ends the observation")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 1), "c1", 0us);
    h.handle_observe_request(observe_get("t2", 2), "c2", 0us);
    CoapMessage bad;
    bad.type = MessageType::Acknowledgement;
    bad.code = code::BadGateway;
    bad.message_id = 1;
    bad.token = to_bytes("t1");
    const auto out = h.handle_final_response(bad, kR);
    REQUIRE(out.size() == 2);
    CHECK(out[1].message.code == code::BadGateway);
    CHECK(out[1].message.token == to_bytes("t2"));
    CHECK(h.subscriptions().empty());
    CHECK(h.upstream(kR) == nullptr);
}

TEST_CASE("next_client_mid")
{
    ObserveHandler h;
    const ClientNode a{"a", {}};
    const ClientNode b{"b", {}};
    CHECK(h.next_client_mid(a) == 1);

    // Ten interleaved calls on a fresh handler: independent sequences.
    ObserveHandler i;
    std::vector<std::uint16_t> seen_a;
    std::vector<std::uint16_t> seen_b;
    for (char c : std::string_view("abaababbaa")) {
        if (c == 'a')
            seen_a.push_back(i.next_client_mid(a));
        else
            seen_b.push_back(i.next_client_mid(b));
    }
    CHECK(seen_a == std::vector<std::uint16_t>{1, 2, 3, 4, 5, 6});
    CHECK(seen_b == std::vector<std::uint16_t>{1, 2, 3, 4});

    ObserveHandler w;
    const ClientNode c{"c", {}};
    std::uint16_t last = 0;
    for (std::uint32_t i = 0; i < (1u << 16); ++i)
        last = w.next_client_mid(c);
    CHECK(last == 0);
    CHECK(w.next_client_mid(c) == 1);
}

TEST_CASE("snapshot lists every structure")
{
    ObserveHandler h;
    h.handle_observe_request(observe_get("t1", 1), "c1", 5us);
    h.record_suppressed_ack("c1", to_bytes("t1"), 9);
    const std::string snap = h.snapshot();
    CHECK(snap ==
          "upstream uri=coap://aueb.example.gr/R1 token=7431\n"
          "subscription uri=coap://aueb.example.gr/R1 client=c1 token=7431 mid=1 pending=1 created_us=5 sent=0\n"
          "suppressed client=c1 token=7431 mid=9\n");
}

TEST_CASE("property: randomized event interleavings against the unicast oracle")
{
    std::size_t deliveries = 0;
    std::size_t suppressed = 0;
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
        const auto outcome = test::run_observe_property(seed);
        INFO("seed " << seed << ": " << outcome.failure);
        REQUIRE(outcome.ok);
        deliveries += outcome.deliveries;
        suppressed += outcome.suppressed;
    }
    // The generator must actually reach fan-out and ACK suppression.
    CHECK(deliveries > 1000);
    CHECK(suppressed > 100);
    MESSAGE("deliveries " << deliveries << ", suppressed ACKs " << suppressed);
}
