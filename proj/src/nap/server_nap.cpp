#include "coapicn/nap/server_nap.hpp"

#include <algorithm>
#include <cctype>

#include "coapicn/coap/codec.hpp"
#include "coapicn/coap/uri.hpp"
#include "coapicn/error.hpp"
#include "coapicn/nap/naming.hpp"

namespace coapicn::nap {

using coap::CoapMessage;
using coap::MessageType;
using observe::Action;
using observe::DeregisterOutcome;

namespace {

// Server CON MIDs awaiting their one upstream ACK.
constexpr std::size_t kAckMemory = 4096;

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

ServerNap::ServerNap(NapConfig config, icn::Fabric& fabric, DatagramSender& udp, observe::HandlerConfig handler,
                     Trace* trace)
    : config_(std::move(config)), fabric_(fabric), udp_(udp), trace_(trace), handler_(handler)
{
    validate(config_);
    if (config_.role != Role::ServerSide)
        throw Error(Errc::invalid_scenario, config_.node_id + " is not server-side");
    fabric_.set_handler(config_.node_id, [this](const icn::IcnPacket& p) { on_icn_packet(p); });
    for (const auto& s : config_.attached_servers)
        fabric_.subscribe(fqdn_to_name(s.fqdn), config_.node_id);
}

void ServerNap::note(std::string_view action, std::string_view detail)
{
    if (!trace_)
        return;
    std::string fields = "node=" + config_.node_id + " action=" + std::string(action);
    if (!detail.empty())
        fields += " " + std::string(detail);
    trace_->record(fabric_.scheduler().now(), "nap", fields);
}

const AttachedServer* ServerNap::server_for(const std::string& host) const
{
    const std::string h = lower(host);
    for (const auto& s : config_.attached_servers)
        if (lower(s.fqdn) == h)
            return &s;
    return nullptr;
}

const AttachedServer* ServerNap::server_for_name(const icn::IcnName& name) const
{
    for (const auto& s : config_.attached_servers)
        if (fqdn_to_name(s.fqdn) == name)
            return &s;
    return nullptr;
}

std::uint16_t ServerNap::next_mid(const std::string& endpoint)
{
    return ++server_mids_[endpoint];
}

Bytes ServerNap::mint_token()
{
    const std::uint64_t n = ++minted_;
    Bytes token{0xD0};
    for (int shift = 48; shift >= 0; shift -= 8)
        token.push_back(static_cast<std::uint8_t>(n >> shift));
    return token;
}

void ServerNap::expire()
{
    for (const auto& removed : handler_.expire(fabric_.scheduler().now())) {
        note("expire", "uri=" + removed.resource_uri);
        on_removed(removed, std::nullopt);
    }
}

void ServerNap::send_to_server(const std::string& endpoint, const CoapMessage& msg)
{
    Bytes wire = coap::encode(msg);
    counters_.bytes_out += wire.size();
    udp_.send_datagram(config_.listen_endpoint, endpoint, std::move(wire));
}

void ServerNap::reply(const OneShot& to, CoapMessage msg)
{
    msg.token = to.token;
    msg.type = MessageType::Acknowledgement;
    msg.message_id = to.message_id;
    Bytes wire = coap::encode(msg);
    const std::size_t size = wire.size();
    try {
        fabric_.publish_to_path(to.reply_name, std::move(wire), to.reverse_path, "response");
    } catch (const Error& e) {
        note("drop", "reason=" + std::string(to_string(e.code())));
        return;
    }
    counters_.bytes_out += size;
}

void ServerNap::on_icn_packet(const icn::IcnPacket& pkt)
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
        note("drop", "from=" + pkt.source + " reason=" + std::string(to_string(e.code())));
        return;
    }
    if (msg.type == MessageType::Acknowledgement && msg.is_empty())
        on_ack(msg, pkt);
    else if (msg.is_request())
        on_request(msg, pkt);
    else {
        ++counters_.dropped;
        note("drop", "from=" + pkt.source + " reason=not-a-request");
    }
}

void ServerNap::on_ack(const CoapMessage& ack, const icn::IcnPacket& pkt)
{
    const AttachedServer* server = server_for_name(pkt.name);
    auto it = server ? acks_.find({server->endpoint, ack.message_id}) : acks_.end();
    if (it == acks_.end()) {
        ++counters_.dropped;
        note("drop-ack", "from=" + pkt.source + " mid=" + std::to_string(ack.message_id));
        return;
    }
    if (it->second.forwarded) {
        ++counters_.acks_suppressed;
        note("suppress-ack", "from=" + pkt.source + " mid=" + std::to_string(ack.message_id));
        return;
    }
    it->second.forwarded = true;
    ++counters_.acks_forwarded;
    note("forward-ack", "from=" + pkt.source + " mid=" + std::to_string(ack.message_id));
    send_to_server(server->endpoint, ack);
}

void ServerNap::on_request(const CoapMessage& req, const icn::IcnPacket& pkt)
{
    ++counters_.requests_in;
    if (!pkt.reverse_fid.empty())
        routes_[pkt.source] = Route{pkt.reverse_fid};
    std::optional<OneShot> reply_to;
    if (pkt.reply_name)
        reply_to = OneShot{*pkt.reply_name, pkt.reverse_fid, req.token, req.message_id};

    auto fail = [&](std::uint8_t code, std::string_view why) {
        note("reject", "from=" + pkt.source + " reason=" + std::string(why));
        if (reply_to) {
            CoapMessage err;
            err.code = code;
            reply(*reply_to, err);
        }
    };

    std::string uri;
    try {
        uri = coap::request_uri(req);
    } catch (const Error& e) {
        fail(coap::code::BadRequest, to_string(e.code()));
        return;
    }
    const AttachedServer* server = server_for(coap::split_proxy_uri(uri).uri_host);
    if (!server) {
        fail(coap::code::BadGateway, to_string(Errc::unknown_fqdn));
        return;
    }

    if (req.is_observe_register()) {
        const auto d = handler_.handle_observe_request(req, pkt.source, fabric_.scheduler().now());
        note(observe::to_string(d.action), "from=" + pkt.source + " token=" + to_hex(req.token) + " uri=" + uri);
        if (d.action != Action::Forward)
            return;
        CoapMessage out = coap::rebuild_origin_request(*d.outbound);
        out.type = MessageType::Confirmable;
        out.message_id = next_mid(server->endpoint);
        ++counters_.requests_forwarded;
        send_to_server(server->endpoint, out);
        return;
    }

    if (req.is_observe_deregister()) {
        try {
            const auto removed = handler_.deregister(req.token, pkt.source);
            note("deregister", "from=" + pkt.source + " token=" + to_hex(req.token) + " uri=" + uri);
            on_removed(removed, reply_to);
            return;
        } catch (const Error& e) {
            if (e.code() != Errc::unknown_subscription)
                throw;
        }
    }

    CoapMessage out = coap::rebuild_origin_request(req.has_option(coap::option::ProxyUri) ? req : [&] {
        CoapMessage with_uri = req;
        with_uri.set_option(coap::option::ProxyUri, to_bytes(uri));
        return with_uri;
    }());
    out.token = mint_token();
    out.message_id = next_mid(server->endpoint);
    if (reply_to)
        one_shots_[out.token] = *reply_to;
    ++counters_.requests_forwarded;
    note("pass-through", "from=" + pkt.source + " uri=" + uri);
    send_to_server(server->endpoint, out);
}

void ServerNap::on_removed(const observe::DeregisterResult& removed, std::optional<OneShot> reply_to)
{
    if (removed.outcome == DeregisterOutcome::RemovedLocal) {
        if (reply_to) {
            CoapMessage ok;
            ok.code = coap::code::Content;
            reply(*reply_to, ok);
        }
        return;
    }
    const AttachedServer* server = server_for(coap::split_proxy_uri(removed.resource_uri).uri_host);
    if (!server)
        return;
    CoapMessage dereg;
    dereg.type = MessageType::Confirmable;
    dereg.code = coap::code::Get;
    dereg.token = removed.upstream_token;
    dereg.set_observe(coap::kObserveDeregister);
    dereg.add_option(coap::option::ProxyUri, removed.resource_uri);
    CoapMessage out = coap::rebuild_origin_request(dereg);
    out.message_id = next_mid(server->endpoint);
    if (reply_to)
        one_shots_[out.token] = *reply_to;
    ++counters_.requests_forwarded;
    send_to_server(server->endpoint, out);
}

void ServerNap::on_server_datagram(BytesView wire, const std::string& from)
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
    if (msg.is_empty())
        return;  // separate-response ACKs and RSTs need no action here
    if (!msg.is_response()) {
        ++counters_.dropped;
        note("drop", "from=" + from + " reason=not-a-response");
        return;
    }
    ++counters_.responses_in;

    if (auto os = one_shots_.find(msg.token); os != one_shots_.end()) {
        const OneShot to = os->second;
        one_shots_.erase(os);
        if (msg.type == MessageType::Confirmable)
            send_to_server(from, coap::make_empty(MessageType::Acknowledgement, msg.message_id));
        CoapMessage resp = msg;
        resp.remove_option(coap::option::Observe);
        reply(to, resp);
        return;
    }

    std::string uri;
    try {
        uri = handler_.resolve_uri_by_token(msg.token);
    } catch (const Error&) {
        ++counters_.dropped;
        note("drop", "from=" + from + " reason=unknown-token token=" + to_hex(msg.token));
        return;
    }

    const bool observing = msg.observe().has_value() && (msg.code >> 5) == 2;
    const auto deliveries =
        observing ? handler_.handle_observe_response(msg, uri) : handler_.handle_final_response(msg, uri);
    if (msg.type == MessageType::Confirmable) {
        if (observing) {
            // Client NAPs answer; the first answer goes to the server.
            const auto key = std::make_pair(from, msg.message_id);
            if (acks_.emplace(key, AckState{}).second) {
                ack_order_.push_back(key);
                if (ack_order_.size() > kAckMemory) {
                    acks_.erase(ack_order_.front());
                    ack_order_.pop_front();
                }
            }
        } else {
            send_to_server(from, coap::make_empty(MessageType::Acknowledgement, msg.message_id));
        }
    }
    publish_response(msg, uri, deliveries);
}

void ServerNap::publish_response(const CoapMessage& msg, const std::string& resource_uri,
                                 const std::vector<observe::Delivery>& deliveries)
{
    std::vector<icn::NodeId> targets;
    for (const auto& d : deliveries)
        if (std::find(targets.begin(), targets.end(), d.to.return_address) == targets.end())
            targets.push_back(d.to.return_address);
    if (targets.empty())
        return;

    const icn::IcnName name = url_to_name(resource_uri);
    const Bytes wire = coap::encode(msg);
    // Piggy-backed first responses are not counted as notifications.
    const char* label =
        msg.observe().has_value() && msg.type != MessageType::Acknowledgement ? "notification" : "response";

    std::vector<icn::ForwardingPath> fids;
    if (config_.multicast) {
        std::vector<std::vector<icn::NodeId>> paths;
        for (const auto& t : targets) {
            auto r = routes_.find(t);
            if (r != routes_.end())
                paths.push_back(r->second.reverse_path.paths().front());
            else
                paths.push_back(fabric_.compute_paths(config_.node_id, {t}).first.paths().front());
        }
        try {
            fids.push_back(icn::ForwardingPath::tree(std::move(paths)));
        } catch (const Error&) {
            // Stored reverse paths no longer share prefixes; recompute.
            fids.push_back(fabric_.compute_paths(config_.node_id, targets).first);
        }
    } else {
        for (const auto& t : targets) {
            auto r = routes_.find(t);
            fids.push_back(r != routes_.end() ? r->second.reverse_path
                                              : fabric_.compute_paths(config_.node_id, {t}).first);
        }
    }

    for (const auto& fid : fids) {
        try {
            fabric_.publish_to_path(name, wire, fid, label);
        } catch (const Error& e) {
            ++counters_.dropped;
            note("drop", "reason=" + std::string(to_string(e.code())) + " fid=" + fid.to_string());
            continue;
        }
        ++counters_.notifications_out;
        counters_.bytes_out += wire.size();
    }
    note("publish", "uri=" + resource_uri + " targets=" + std::to_string(targets.size()) +
                        " publications=" + std::to_string(fids.size()));
}

}  // namespace coapicn::nap
