#include "coapicn/harness/endpoints.hpp"

#include <algorithm>

#include "coapicn/coap/codec.hpp"
#include "coapicn/coap/uri.hpp"
#include "coapicn/error.hpp"

namespace coapicn::harness {

using coap::CoapMessage;
using coap::MessageType;

std::string classify(BytesView wire)
{
    CoapMessage m;
    try {
        m = coap::decode(wire);
    } catch (const Error&) {
        return "raw";
    }
    if (m.type == MessageType::Reset)
        return "rst";
    if (m.is_empty())
        return m.type == MessageType::Acknowledgement ? "ack" : "ping";
    if (m.is_request())
        return "request";
    if (m.observe().has_value() && m.type != MessageType::Acknowledgement)
        return "notification";
    return "response";
}

// ---------------------------------------------------------------------------

SimUdp::SimUdp(icn::Scheduler& scheduler, icn::Topology topology, SimTime access_latency, Trace* trace)
    : scheduler_(scheduler), topology_(std::move(topology)), access_latency_(access_latency), trace_(trace)
{}

void SimUdp::bind(const std::string& endpoint, const icn::NodeId& node, Receiver receiver)
{
    if (!topology_.has_node(node))
        throw Error(Errc::unknown_node, node);
    bindings_[endpoint] = Binding{node, std::move(receiver)};
}

void SimUdp::send_datagram(const std::string& from, const std::string& to, Bytes wire)
{
    auto src = bindings_.find(from);
    auto dst = bindings_.find(to);
    const std::string label = classify(wire);
    if (src == bindings_.end() || dst == bindings_.end()) {
        ++dropped_;
        if (trace_)
            trace_->record(scheduler_.now(), "udp-drop",
                           "from=" + from + " to=" + to + " bytes=" + std::to_string(wire.size()) + " label=" + label);
        return;
    }

    std::vector<icn::NodeId> path{src->second.node};
    SimTime delay = access_latency_;
    if (src->second.node != dst->second.node) {
        try {
            path = topology_.shortest_path(src->second.node, dst->second.node);
        } catch (const Error&) {
            ++dropped_;
            return;
        }
        auto& per_link = links_[label];
        for (std::size_t i = 1; i < path.size(); ++i) {
            auto& s = per_link[{path[i - 1], path[i]}];
            ++s.transmissions;
            s.bytes += wire.size();
            delay += topology_.latency(path[i - 1], path[i]);
        }
        delay += access_latency_;
    }

    if (trace_) {
        std::string hops;
        for (std::size_t i = 0; i < path.size(); ++i)
            hops += (i ? ">" : "") + path[i];
        trace_->record(scheduler_.now(), "udp",
                       "from=" + from + " to=" + to + " bytes=" + std::to_string(wire.size()) + " label=" + label +
                           " path=" + hops + " data=" + to_hex(wire));
    }
    scheduler_.after(delay, [this, from, to, wire = std::move(wire)] {
        auto it = bindings_.find(to);
        if (it != bindings_.end())
            it->second.receiver(wire, from);
    });
}

icn::LinkStats SimUdp::link_stats(const icn::NodeId& from, const icn::NodeId& to, std::string_view label) const
{
    icn::LinkStats out;
    for (const auto& [l, edges] : links_) {
        if (!label.empty() && l != label)
            continue;
        auto it = edges.find({from, to});
        if (it != edges.end()) {
            out.transmissions += it->second.transmissions;
            out.bytes += it->second.bytes;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

EmbeddedClient::EmbeddedClient(ClientSpec spec, std::string target, bool via_proxy, const TimingSpec& timing,
                               icn::Scheduler& scheduler, nap::DatagramSender& udp, std::uint64_t seed,
                               Trace* trace)
    : spec_(std::move(spec))
    , target_(std::move(target))
    , via_proxy_(via_proxy)
    , timing_(timing)
    , scheduler_(scheduler)
    , udp_(udp)
    , trace_(trace)
    , rng_(seed)
    , next_mid_(static_cast<std::uint16_t>(std::uniform_int_distribution<unsigned>(0, 0xFFFF)(rng_)))
{
    metrics_.id = spec_.id;
}

void EmbeddedClient::note(std::string_view event, std::string_view detail)
{
    if (trace_)
        trace_->record(scheduler_.now(), "client", "id=" + spec_.id + " event=" + std::string(event) +
                                                       (detail.empty() ? "" : " " + std::string(detail)));
}

void EmbeddedClient::start()
{
    scheduler_.at(spec_.start, [this] { send_request(observe_request(coap::kObserveRegister)); });
    scheduler_.at(spec_.start + spec_.duration, [this] {
        deregistered_ = true;
        send_request(observe_request(coap::kObserveDeregister));
    });
}

CoapMessage EmbeddedClient::observe_request(std::uint32_t observe)
{
    CoapMessage m;
    m.type = spec_.type;
    m.code = coap::code::Get;
    m.message_id = next_mid_++;
    m.token = to_bytes(spec_.token);
    m.set_observe(observe);
    m.add_option(coap::option::ProxyUri, spec_.url);
    // Without a proxy the request names the resource itself.
    return via_proxy_ ? m : coap::rebuild_origin_request(m);
}

void EmbeddedClient::transmit(const CoapMessage& msg)
{
    Bytes wire = coap::encode(msg);
    metrics_.bytes_sent += wire.size();
    udp_.send_datagram(spec_.endpoint, target_, std::move(wire));
}

void EmbeddedClient::send_request(CoapMessage msg)
{
    ++metrics_.requests_sent;
    note(msg.is_observe_register() ? "register" : "deregister", "mid=" + std::to_string(msg.message_id));
    transmit(msg);
    if (msg.type != MessageType::Confirmable)
        return;
    const double factor = std::uniform_real_distribution<double>(1.0, timing_.ack_random_factor)(rng_);
    Outstanding o{msg, 0, SimTime(static_cast<std::int64_t>(static_cast<double>(timing_.ack_timeout.count()) * factor))};
    const std::uint16_t mid = msg.message_id;
    const SimTime timeout = o.timeout;
    outstanding_[mid] = std::move(o);
    scheduler_.after(timeout, [this, mid] { on_timeout(mid); });
}

void EmbeddedClient::on_timeout(std::uint16_t mid)
{
    auto it = outstanding_.find(mid);
    if (it == outstanding_.end())
        return;
    Outstanding& o = it->second;
    if (o.attempts >= timing_.max_retransmit) {
        note("give-up", "mid=" + std::to_string(mid));
        outstanding_.erase(it);
        return;
    }
    ++o.attempts;
    o.timeout *= 2;
    ++metrics_.requests_sent;
    ++metrics_.retransmissions;
    note("retransmit", "mid=" + std::to_string(mid));
    transmit(o.msg);
    scheduler_.after(o.timeout, [this, mid] { on_timeout(mid); });
}

void EmbeddedClient::on_datagram(BytesView wire, const std::string& from)
{
    metrics_.bytes_received += wire.size();
    CoapMessage msg;
    try {
        msg = coap::decode(wire);
    } catch (const Error&) {
        note("undecodable", "from=" + from);
        return;
    }

    if (msg.type == MessageType::Acknowledgement || msg.type == MessageType::Reset) {
        auto it = outstanding_.find(msg.message_id);
        if (it == outstanding_.end())
            return;
        outstanding_.erase(it);
        if (!msg.is_empty())
            on_response(msg);
        return;
    }
    if (!msg.is_response())
        return;

    if (msg.token != to_bytes(spec_.token)) {
        ++metrics_.wrong_token;
        note("wrong-token", "token=" + to_hex(msg.token));
        if (msg.type == MessageType::Confirmable) {
            ++metrics_.rsts_sent;
            transmit(coap::make_empty(MessageType::Reset, msg.message_id));
        }
        return;
    }
    if (msg.type == MessageType::Confirmable) {
        ++metrics_.acks_sent;
        transmit(coap::make_empty(MessageType::Acknowledgement, msg.message_id));
        if (!seen_con_.insert(msg.message_id).second)
            return;  // duplicate
    }
    on_response(msg);
}

void EmbeddedClient::on_response(const CoapMessage& msg)
{
    if (msg.token != to_bytes(spec_.token)) {
        ++metrics_.wrong_token;
        note("wrong-token", "token=" + to_hex(msg.token));
        return;
    }
    if (msg.is_error_response()) {
        ++metrics_.errors;
        note("error", "code=" + coap::code_string(msg.code));
        return;
    }
    if (!msg.observe().has_value())
        return;  // answer to the deregistration
    if (deregistered_) {
        ++metrics_.late;
        return;
    }
    ++metrics_.notifications;
    metrics_.payloads.push_back(to_string(msg.payload));
    note("notification", "seq=" + std::to_string(*msg.observe()) + " bytes=" + std::to_string(msg.payload.size()));
}

// ---------------------------------------------------------------------------

EmbeddedServer::EmbeddedServer(ServerSpec spec, icn::Scheduler& scheduler, nap::DatagramSender& udp,
                               std::uint64_t seed, Trace* trace)
    : spec_(std::move(spec))
    , scheduler_(scheduler)
    , udp_(udp)
    , trace_(trace)
    , rng_(seed)
    , next_mid_(static_cast<std::uint16_t>(std::uniform_int_distribution<unsigned>(0, 0xFFFF)(rng_)))
{
    metrics_.fqdn = spec_.fqdn;
    for (const auto& r : spec_.resources) {
        Resource res{r, 0, {}, {}};
        res.payload = make_payload(res);
        resources_.push_back(std::move(res));
    }
}

void EmbeddedServer::note(std::string_view event, std::string_view detail)
{
    if (trace_)
        trace_->record(scheduler_.now(), "server", "fqdn=" + spec_.fqdn + " event=" + std::string(event) +
                                                       (detail.empty() ? "" : " " + std::string(detail)));
}

Bytes EmbeddedServer::make_payload(const Resource& r)
{
    std::string text = r.spec.path.substr(1) + "#" + std::to_string(r.seq);
    std::uniform_int_distribution<int> letter('a', 'z');
    while (text.size() < r.spec.payload_size)
        text.push_back(static_cast<char>(letter(rng_)));
    return to_bytes(text);
}

std::size_t EmbeddedServer::observers(std::string_view path) const
{
    for (const auto& r : resources_)
        if (r.spec.path == path)
            return r.observers.size();
    return 0;
}

void EmbeddedServer::start(SimTime end)
{
    for (std::size_t i = 0; i < resources_.size(); ++i) {
        const SimTime first = resources_[i].spec.period;
        if (first <= end)
            scheduler_.at(first, [this, i, end] { tick(i, end); });
    }
}

void EmbeddedServer::send(const std::string& to, const CoapMessage& msg)
{
    Bytes wire = coap::encode(msg);
    metrics_.bytes_out += wire.size();
    udp_.send_datagram(spec_.endpoint, to, std::move(wire));
}

void EmbeddedServer::tick(std::size_t index, SimTime end)
{
    Resource& r = resources_[index];
    r.seq = (r.seq + 1) & coap::kMaxObserveValue;
    r.payload = make_payload(r);
    if (!r.observers.empty()) {
        ++metrics_.updates;
        note("update", "path=" + r.spec.path + " seq=" + std::to_string(r.seq) +
                           " observers=" + std::to_string(r.observers.size()));
    }
    for (const auto& o : r.observers) {
        CoapMessage n;
        n.type = r.spec.type;
        n.code = coap::code::Content;
        n.message_id = next_mid_++;
        n.token = o.token;
        n.set_observe(r.seq);
        n.payload = r.payload;
        if (n.type == MessageType::Confirmable)
            con_sent_[{o.endpoint, n.message_id}] = {index, o.token};
        ++metrics_.notifications_sent;
        send(o.endpoint, n);
    }
    const SimTime next = scheduler_.now() + r.spec.period;
    if (next <= end)
        scheduler_.at(next, [this, index, end] { tick(index, end); });
}

EmbeddedServer::Resource* EmbeddedServer::find(const CoapMessage& req)
{
    std::string path;
    for (const auto& seg : req.string_options(coap::option::UriPath))
        path += "/" + seg;
    if (path.empty())
        path = "/";
    for (auto& r : resources_)
        if (r.spec.path == path)
            return &r;
    return nullptr;
}

void EmbeddedServer::on_datagram(BytesView wire, const std::string& from)
{
    metrics_.bytes_in += wire.size();
    CoapMessage msg;
    try {
        msg = coap::decode(wire);
    } catch (const Error&) {
        note("undecodable", "from=" + from);
        return;
    }

    if (msg.type == MessageType::Acknowledgement && msg.is_empty()) {
        ++metrics_.acks_received;
        con_sent_.erase({from, msg.message_id});
        return;
    }
    if (msg.type == MessageType::Reset) {
        ++metrics_.rsts_received;
        auto it = con_sent_.find({from, msg.message_id});
        if (it != con_sent_.end()) {
            auto& obs = resources_[it->second.first].observers;
            std::erase_if(obs, [&](const Observer& o) { return o.endpoint == from && o.token == it->second.second; });
            con_sent_.erase(it);
        }
        return;
    }
    if (!msg.is_request())
        return;
    ++metrics_.requests_received;

    CoapMessage resp;
    resp.type = msg.type == MessageType::Confirmable ? MessageType::Acknowledgement : MessageType::NonConfirmable;
    resp.message_id = msg.type == MessageType::Confirmable ? msg.message_id : next_mid_++;
    resp.token = msg.token;

    Resource* r = find(msg);
    if (!r) {
        resp.code = coap::code::NotFound;
        send(from, resp);
        return;
    }
    if (msg.code != coap::code::Get) {
        resp.code = coap::make_code(4, 5);
        send(from, resp);
        return;
    }

    auto same = [&](const Observer& o) { return o.endpoint == from && o.token == msg.token; };
    if (msg.is_observe_register()) {
        ++metrics_.observe_registrations;
        if (std::none_of(r->observers.begin(), r->observers.end(), same))
            r->observers.push_back(Observer{from, msg.token});
        resp.set_observe(r->seq);
        note("register", "from=" + from + " token=" + to_hex(msg.token) + " path=" + r->spec.path);
    } else if (msg.is_observe_deregister()) {
        ++metrics_.deregistrations;
        std::erase_if(r->observers, same);
        note("deregister", "from=" + from + " token=" + to_hex(msg.token) + " path=" + r->spec.path);
    }
    resp.code = coap::code::Content;
    resp.payload = r->payload;
    send(from, resp);
}

}  // namespace coapicn::harness
