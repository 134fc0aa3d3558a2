#include "coapicn/icn/fabric.hpp"

#include <sstream>

#include "coapicn/error.hpp"

namespace coapicn::icn {

std::string_view to_string(PacketKind k) noexcept
{
    switch (k) {
    case PacketKind::Publish: return "publish";
    case PacketKind::PubIsub: return "pub_isub";
    case PacketKind::Subscribe: return "subscribe";
    case PacketKind::Notify: return "notify";
    }
    return "?";
}

Fabric::Fabric(Scheduler& scheduler, Topology topology, FabricConfig config, Trace* trace)
    : scheduler_(scheduler), topology_(std::move(topology)), config_(config), trace_(trace), rng_(config.seed)
{}

void Fabric::require(const NodeId& node) const
{
    if (!attached(node))
        throw Error(Errc::unknown_node, node);
}

bool Fabric::attached(const NodeId& node) const
{
    return topology_.has_node(node) && !detached_.count(node);
}

void Fabric::set_handler(const NodeId& node, Handler handler)
{
    require(node);
    handlers_[node] = std::move(handler);
}

void Fabric::detach(const NodeId& node)
{
    require(node);
    detached_.insert(node);
    handlers_.erase(node);
}

void Fabric::advertise(const IcnName& name, const NodeId& publisher)
{
    require(publisher);
    publishers_[name].insert(publisher);
}

void Fabric::subscribe(const IcnName& name, const NodeId& subscriber)
{
    require(subscriber);
    if (!subscribers_[name].insert(subscriber).second)
        return;
    auto pubs = publishers_.find(name);
    if (pubs == publishers_.end())
        return;
    const auto subs = subscribers(name);
    for (const auto& p : pubs->second) {
        if (!attached(p))
            continue;
        IcnPacket notify;
        notify.name = name;
        notify.kind = PacketKind::Notify;
        notify.source = p;
        notify.fid = compute_paths(p, subs).first;
        notify.label = "control";
        record("notify", notify, "to=" + p);
        // Control messages come from the rendezvous point, not over links.
        scheduler_.at(scheduler_.now(), [this, p, notify] {
            auto h = handlers_.find(p);
            if (h != handlers_.end())
                h->second(notify);
        });
    }
}

void Fabric::unsubscribe(const IcnName& name, const NodeId& subscriber)
{
    auto it = subscribers_.find(name);
    if (it == subscribers_.end())
        return;
    it->second.erase(subscriber);
    if (it->second.empty())
        subscribers_.erase(it);
}

std::vector<NodeId> Fabric::publishers(const IcnName& name) const
{
    auto it = publishers_.find(name);
    return it == publishers_.end() ? std::vector<NodeId>{} : std::vector<NodeId>(it->second.begin(), it->second.end());
}

std::vector<NodeId> Fabric::subscribers(const IcnName& name) const
{
    std::vector<NodeId> out;
    auto it = subscribers_.find(name);
    if (it != subscribers_.end())
        for (const auto& s : it->second)
            if (attached(s))
                out.push_back(s);
    return out;
}

std::pair<ForwardingPath, ForwardingPath> Fabric::compute_paths(const NodeId& publisher,
                                                                const std::vector<NodeId>& subscribers) const
{
    if (detached_.empty())
        return topology_.compute_paths(publisher, subscribers);
    return topology_.without(detached_).compute_paths(publisher, subscribers);
}

void Fabric::check_mtu(const Bytes& payload) const
{
    if (payload.size() > config_.mtu)
        throw Error(Errc::mtu_exceeded, std::to_string(payload.size()) + " > " + std::to_string(config_.mtu));
}

void Fabric::check_path(const ForwardingPath& fid) const
{
    if (fid.empty())
        throw Error(Errc::broken_path, "empty forwarding path");
    for (const auto& p : fid.paths()) {
        for (const auto& n : p)
            if (!attached(n))
                throw Error(Errc::broken_path, n + " is not attached");
        for (std::size_t i = 1; i < p.size(); ++i)
            if (!topology_.has_link(p[i - 1], p[i]))
                throw Error(Errc::broken_path, "no link " + p[i - 1] + "-" + p[i]);
    }
}

void Fabric::record(std::string_view kind, const IcnPacket& pkt, std::string_view extra)
{
    if (!trace_)
        return;
    std::ostringstream os;
    os << "name=" << to_string(pkt.name) << " fid=" << pkt.fid.to_string() << " bytes=" << pkt.payload.size()
       << " label=" << pkt.label;
    if (!extra.empty())
        os << ' ' << extra;
    trace_->record(scheduler_.now(), kind, os.str());
}

DeliveryReport Fabric::transmit(IcnPacket packet)
{
    DeliveryReport report;
    report.fid_req = packet.fid;
    report.fid_res = packet.reverse_fid;

    std::set<Edge> lost;
    auto& per_link = links_[packet.label];
    for (const auto& e : packet.fid.edges()) {
        auto& s = per_link[e];
        ++s.transmissions;
        s.bytes += packet.payload.size();
        ++report.link_transmissions;
        report.link_bytes += packet.payload.size();
        if (config_.drop_probability > 0.0 && std::bernoulli_distribution(config_.drop_probability)(rng_))
            lost.insert(e);
    }
    ++publications_[packet.label];
    record(to_string(packet.kind), packet, "links=" + std::to_string(report.link_transmissions));

    for (const auto& leaf : packet.fid.leaves()) {
        const auto& path = *packet.fid.path_to(leaf);
        SimTime delay{0};
        bool dropped = false;
        for (std::size_t i = 1; i < path.size(); ++i) {
            delay += topology_.latency(path[i - 1], path[i]);
            dropped = dropped || lost.count({path[i - 1], path[i]});
        }
        if (dropped) {
            if (trace_)
                trace_->record(scheduler_.now(), "drop", "to=" + leaf + " label=" + packet.label);
            continue;
        }
        report.receivers.push_back(leaf);
        scheduler_.after(delay, [this, leaf, packet] {
            if (!attached(leaf))
                return;
            record("deliver", packet, "to=" + leaf);
            auto h = handlers_.find(leaf);
            if (h != handlers_.end())
                h->second(packet);
        });
    }
    return report;
}

DeliveryReport Fabric::pub_isub(const IcnName& name, Bytes payload, const NodeId& publisher,
                                std::optional<IcnName> reply_name, std::string label)
{
    require(publisher);
    check_mtu(payload);
    const auto subs = subscribers(name);
    if (subs.empty())
        throw Error(Errc::no_subscriber, to_string(name));
    const Topology live = detached_.empty() ? topology_ : topology_.without(detached_);
    const NodeId target = live.nearest(publisher, subs);
    if (reply_name)
        subscribe(*reply_name, publisher);

    IcnPacket pkt;
    pkt.name = name;
    pkt.kind = PacketKind::PubIsub;
    pkt.source = publisher;
    pkt.fid = ForwardingPath::unicast(live.shortest_path(publisher, target));
    pkt.reverse_fid = ForwardingPath::unicast(live.shortest_path(target, publisher));
    pkt.reply_name = reply_name;
    pkt.payload = std::move(payload);
    pkt.label = std::move(label);
    return transmit(std::move(pkt));
}

DeliveryReport Fabric::publish_to_path(const IcnName& name, Bytes payload, const ForwardingPath& fid,
                                       std::string label)
{
    check_mtu(payload);
    check_path(fid);
    IcnPacket pkt;
    pkt.name = name;
    pkt.kind = PacketKind::Publish;
    pkt.source = fid.root();
    pkt.fid = fid;
    pkt.payload = std::move(payload);
    pkt.label = std::move(label);
    return transmit(std::move(pkt));
}

LinkStats Fabric::link_stats(const NodeId& from, const NodeId& to, std::string_view label) const
{
    LinkStats out;
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

LinkStats Fabric::total_stats(std::string_view label) const
{
    LinkStats out;
    for (const auto& [l, edges] : links_) {
        if (!label.empty() && l != label)
            continue;
        for (const auto& [_, s] : edges) {
            out.transmissions += s.transmissions;
            out.bytes += s.bytes;
        }
    }
    return out;
}

std::size_t Fabric::publications(std::string_view label) const
{
    std::size_t n = 0;
    for (const auto& [l, c] : publications_)
        if (label.empty() || l == label)
            n += c;
    return n;
}

}  // namespace coapicn::icn
