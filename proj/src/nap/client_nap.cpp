#include "coapicn/nap/client_nap.hpp"

#include "coapicn/coap/codec.hpp"
#include "coapicn/coap/uri.hpp"
#include "coapicn/error.hpp"
#include "coapicn/nap/naming.hpp"

namespace coapicn::nap {

using coap::CoapMessage;
using coap::MessageType;
using observe::Action;
using observe::DeregisterOutcome;

ClientNap::ClientNap(NapConfig config, icn::Fabric& fabric, DatagramSender& udp, observe::HandlerConfig handler,
                     Trace* trace)
    : config_(std::move(config)), fabric_(fabric), udp_(udp), trace_(trace), handler_(handler)
{
    validate(config_);
    if (config_.role != Role::ClientSide)
        throw Error(Errc::invalid_scenario, config_.node_id + " is not client-side");
    fabric_.set_handler(config_.node_id, [this](const icn::IcnPacket& p) { on_icn_packet(p); });
}

void ClientNap::note(std::string_view action, std::string_view detail)
{
    if (!trace_)
        return;
    std::string fields = "node=" + config_.node_id + " action=" + std::string(action);
    if (!detail.empty())
        fields += " " + std::string(detail);
    trace_->record(fabric_.scheduler().now(), "nap", fields);
}

void ClientNap::expire()
{
    for (const auto& removed : handler_.expire(fabric_.scheduler().now())) {
        note("expire", "uri=" + removed.resource_uri);
        on_removed(removed, std::nullopt);
    }
}

void ClientNap::on_client_datagram(BytesView wire, const std::string& from)
{
    expire();
    counters_.bytes_in += wire.size();
    CoapMessage msg;
    try {
        msg = coap::decode(wire);
    } catch (const Error& e) {
        ++counters_.dropped;
        note("drop", "from=" + from + " reason=" + std::string(to_string(e.code())));
        return;
    }

    if (msg.type == MessageType::Acknowledgement && msg.is_empty()) {
        on_ack(msg, from);
        return;
    }
    if (msg.type == MessageType::Reset) {
        // An RST still answers the notification upstream if this copy held
        // the relay.
        if (auto it = ack_relays_.find({from, msg.message_id}); it != ack_relays_.end()) {
            const AckRelay relay = it->second;
            ack_relays_.erase(it);
            if (auto ex = exchanges_.find(relay.exchange); ex != exchanges_.end())
                send_upstream_ack(ex->second, relay.upstream_mid);
        }
        for (const auto& removed : handler_.reset_client(from)) {
            note("reset", "client=" + from + " uri=" + removed.resource_uri);
            on_removed(removed, std::nullopt);
        }
        return;
    }
    if (!msg.is_request()) {
        ++counters_.dropped;
        note("drop", "from=" + from + " reason=not-a-request");
        return;
    }

    ++counters_.requests_in;
    try {
        if (msg.is_observe_register())
            on_observe_register(msg, from);
        else if (msg.is_observe_deregister())
            on_observe_deregister(msg, from);
        else
            on_one_shot(msg, from);
    } catch (const Error& e) {
        note("reject", "client=" + from + " reason=" + std::string(to_string(e.code())));
        reply_direct(from, msg, coap::code::BadRequest);
    }
}

std::optional<icn::DeliveryReport> ClientNap::publish_request(const CoapMessage& req, const std::string& host,
                                                              const icn::IcnName& reply, const char* label)
{
    Bytes wire = coap::encode(req);
    const std::size_t size = wire.size();
    try {
        auto report = fabric_.pub_isub(fqdn_to_name(host), std::move(wire), config_.node_id, reply, label);
        ++counters_.requests_forwarded;
        counters_.bytes_out += size;
        return report;
    } catch (const Error& e) {
        if (e.code() != Errc::no_subscriber)
            throw;
        note("no-subscriber", "host=" + host);
        return std::nullopt;
    }
}

void ClientNap::on_observe_register(const CoapMessage& req, const std::string& from)
{
    const auto d = handler_.handle_observe_request(req, from, fabric_.scheduler().now());
    note(observe::to_string(d.action), "client=" + from + " token=" + to_hex(req.token) + " uri=" + d.resource_uri);
    if (d.action != Action::Forward)
        return;

    const icn::IcnName reply = url_to_name(d.resource_uri);
    const std::string host = coap::split_proxy_uri(d.resource_uri).uri_host;
    const auto report = publish_request(*d.outbound, host, reply, "observe-request");
    if (!report) {
        CoapMessage err;
        err.type = MessageType::Acknowledgement;
        err.code = coap::code::BadGateway;
        err.token = d.outbound->token;
        send_deliveries(handler_.handle_final_response(err, d.resource_uri), nullptr, err);
        return;
    }
    exchanges_[reply] = PendingExchange{fqdn_to_name(host), report->fid_req, report->fid_res, d.outbound->token,
                                        d.resource_uri, {}};
}

void ClientNap::on_observe_deregister(const CoapMessage& req, const std::string& from)
{
    observe::DeregisterResult removed;
    try {
        removed = handler_.deregister(req.token, from);
    } catch (const Error& e) {
        if (e.code() != Errc::unknown_subscription)
            throw;
        on_one_shot(req, from);
        return;
    }
    note("deregister", "client=" + from + " token=" + to_hex(req.token) + " uri=" + removed.resource_uri);
    on_removed(removed, OneShot{from, req.token, req.message_id, req.type, {}});
}

void ClientNap::on_removed(const observe::DeregisterResult& removed, const std::optional<OneShot>& reply_to)
{
    const icn::IcnName name = url_to_name(removed.resource_uri);
    auto it = exchanges_.find(name);
    if (removed.outcome == DeregisterOutcome::RemovedLocal || it == exchanges_.end()) {
        if (reply_to) {
            CoapMessage req;
            req.type = reply_to->type;
            req.message_id = reply_to->message_id;
            req.token = reply_to->token;
            reply_direct(reply_to->client, req, coap::code::Content,
                         it == exchanges_.end() ? Bytes{} : it->second.last_payload);
        }
        return;
    }

    const PendingExchange ex = it->second;
    exchanges_.erase(it);
    fabric_.unsubscribe(name, config_.node_id);
    std::erase_if(ack_relays_, [&](const auto& entry) { return entry.second.exchange == name; });

    CoapMessage dereg;
    dereg.type = MessageType::Confirmable;
    dereg.code = coap::code::Get;
    dereg.message_id = ++upstream_mid_;
    dereg.token = removed.upstream_token;
    dereg.set_observe(coap::kObserveDeregister);
    dereg.add_option(coap::option::ProxyUri, ex.resource_uri);
    const icn::IcnName reply = exchange_name(config_.node_id, ++next_exchange_);
    const std::string host = coap::split_proxy_uri(ex.resource_uri).uri_host;
    const auto report = publish_request(dereg, host, reply, "request");
    if (!reply_to)
        return;
    if (!report) {
        CoapMessage req;
        req.type = reply_to->type;
        req.message_id = reply_to->message_id;
        req.token = reply_to->token;
        reply_direct(reply_to->client, req, coap::code::BadGateway);
        return;
    }
    OneShot pending = *reply_to;
    pending.name = ex.icn_name;
    one_shots_[reply] = pending;
}

void ClientNap::on_one_shot(const CoapMessage& req, const std::string& from)
{
    for (const auto& [_, pending] : one_shots_) {
        if (pending.client == from && pending.message_id == req.message_id && pending.token == req.token) {
            note("drop-duplicate", "client=" + from + " mid=" + std::to_string(req.message_id));
            return;
        }
    }
    const std::string host = coap::split_proxy_uri(coap::request_uri(req)).uri_host;
    CoapMessage out = req;
    out.message_id = ++upstream_mid_;
    const icn::IcnName reply = exchange_name(config_.node_id, ++next_exchange_);
    const auto report = publish_request(out, host, reply, "request");
    if (!report) {
        reply_direct(from, req, coap::code::BadGateway);
        return;
    }
    note("pass-through", "client=" + from + " mid=" + std::to_string(req.message_id));
    one_shots_[reply] = OneShot{from, req.token, req.message_id, req.type, fqdn_to_name(host)};
}

void ClientNap::on_ack(const CoapMessage& ack, const std::string& from)
{
    if (handler_.handle_client_ack(ack, from) == observe::AckDecision::Suppress) {
        ++counters_.acks_suppressed;
        note("suppress-ack", "client=" + from + " mid=" + std::to_string(ack.message_id));
        return;
    }
    auto it = ack_relays_.find({from, ack.message_id});
    if (it == ack_relays_.end()) {
        ++counters_.dropped;
        note("drop-ack", "client=" + from + " mid=" + std::to_string(ack.message_id));
        return;
    }
    const AckRelay relay = it->second;
    ack_relays_.erase(it);
    auto ex = exchanges_.find(relay.exchange);
    if (ex == exchanges_.end()) {
        ++counters_.dropped;
        return;
    }
    send_upstream_ack(ex->second, relay.upstream_mid);
}

void ClientNap::send_upstream_ack(const PendingExchange& ex, std::uint16_t mid)
{
    Bytes wire = coap::encode(coap::make_empty(MessageType::Acknowledgement, mid));
    const std::size_t size = wire.size();
    try {
        fabric_.publish_to_path(ex.icn_name, std::move(wire), ex.forward_path, "ack");
    } catch (const Error& e) {
        note("drop-ack", "reason=" + std::string(to_string(e.code())));
        return;
    }
    ++counters_.acks_forwarded;
    counters_.bytes_out += size;
    note("forward-ack", "uri=" + ex.resource_uri + " mid=" + std::to_string(mid));
}

void ClientNap::on_icn_packet(const icn::IcnPacket& pkt)
{
    expire();
    if (pkt.kind == icn::PacketKind::Notify)
        return;
    counters_.bytes_in += pkt.payload.size();
    CoapMessage msg;
    try {
        msg = coap::decode(pkt.payload);
    } catch (const Error& e) {
        ++counters_.dropped;
        note("drop", "reason=" + std::string(to_string(e.code())));
        return;
    }
    ++counters_.responses_in;

    if (auto os = one_shots_.find(pkt.name); os != one_shots_.end()) {
        const OneShot pending = os->second;
        one_shots_.erase(os);
        fabric_.unsubscribe(pkt.name, config_.node_id);
        CoapMessage resp = msg;
        resp.token = pending.token;
        if (pending.type == MessageType::Confirmable) {
            resp.type = MessageType::Acknowledgement;
            resp.message_id = pending.message_id;
        } else {
            resp.type = MessageType::NonConfirmable;
            resp.message_id = handler_.next_client_mid(observe::ClientNode{pending.client, pending.token});
        }
        send_to_client(pending.client, resp);
        return;
    }

    auto ex = exchanges_.find(pkt.name);
    if (ex == exchanges_.end()) {
        ++counters_.dropped;
        note("drop", "reason=no-matching-subscription");
        return;
    }
    on_exchange_response(std::move(msg), ex->second);
}

void ClientNap::on_exchange_response(CoapMessage msg, PendingExchange& ex)
{
    // The response name identifies the observation; the token is ours.
    msg.token = ex.upstream_token;
    const bool observing = msg.observe().has_value() && (msg.code >> 5) == 2;
    if (observing) {
        ex.last_payload = msg.payload;
        send_deliveries(handler_.handle_observe_response(msg, ex.resource_uri), &ex, msg);
        return;
    }
    const PendingExchange ended = ex;
    const icn::IcnName name = url_to_name(ended.resource_uri);
    exchanges_.erase(name);
    fabric_.unsubscribe(name, config_.node_id);
    std::erase_if(ack_relays_, [&](const auto& entry) { return entry.second.exchange == name; });
    note("final", "uri=" + ended.resource_uri + " code=" + coap::code_string(msg.code));
    const auto deliveries = handler_.handle_final_response(msg, ended.resource_uri);
    for (const auto& d : deliveries) {
        send_to_client(d.to.return_address, d.message);
        ++counters_.notifications_out;
    }
    if (msg.type == MessageType::Confirmable)
        send_upstream_ack(ended, msg.message_id);
}

void ClientNap::send_deliveries(const std::vector<observe::Delivery>& deliveries, PendingExchange* ex,
                                const CoapMessage& upstream)
{
    bool relayed = false;
    for (const auto& d : deliveries) {
        if (d.message.type == MessageType::Confirmable && ex) {
            if (d.relays_upstream_ack) {
                ack_relays_[{d.to.return_address, d.message.message_id}] =
                    AckRelay{url_to_name(ex->resource_uri), upstream.message_id};
                relayed = true;
            } else {
                handler_.record_suppressed_ack(d.to.return_address, d.message.token, d.message.message_id);
            }
        }
        send_to_client(d.to.return_address, d.message);
        ++counters_.notifications_out;
    }
    if (ex && upstream.type == MessageType::Confirmable && !relayed)
        send_upstream_ack(*ex, upstream.message_id);
}

void ClientNap::send_to_client(const std::string& to, const CoapMessage& msg)
{
    Bytes wire = coap::encode(msg);
    counters_.bytes_out += wire.size();
    udp_.send_datagram(config_.listen_endpoint, to, std::move(wire));
}

void ClientNap::reply_direct(const std::string& to, const CoapMessage& req, std::uint8_t code, Bytes payload)
{
    CoapMessage resp;
    resp.code = code;
    resp.token = req.token;
    resp.payload = std::move(payload);
    if (req.type == MessageType::Confirmable) {
        resp.type = MessageType::Acknowledgement;
        resp.message_id = req.message_id;
    } else {
        resp.type = MessageType::NonConfirmable;
        resp.message_id = handler_.next_client_mid(observe::ClientNode{to, req.token});
    }
    send_to_client(to, resp);
}

}  // namespace coapicn::nap
