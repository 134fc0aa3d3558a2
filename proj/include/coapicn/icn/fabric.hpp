#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "coapicn/coap/message.hpp"
#include "coapicn/icn/name.hpp"
#include "coapicn/icn/path.hpp"
#include "coapicn/icn/scheduler.hpp"
#include "coapicn/icn/topology.hpp"
#include "coapicn/trace.hpp"

namespace coapicn::icn {

enum class PacketKind { Publish, PubIsub, Subscribe, Notify };

std::string_view to_string(PacketKind k) noexcept;

struct IcnPacket {
    IcnName name;
    ForwardingPath fid;
    Bytes payload;
    PacketKind kind = PacketKind::Publish;
    NodeId source;
    /// pub_isub only: the path back to `source` and the name its reply
    /// will be published under.
    ForwardingPath reverse_fid;
    std::optional<IcnName> reply_name;
    /// Traffic class for per-link accounting ("request", "notification", ...).
    std::string label;
};

struct DeliveryReport {
    ForwardingPath fid_req;
    ForwardingPath fid_res;  // pub_isub only
    std::vector<NodeId> receivers;
    std::size_t link_transmissions = 0;
    std::size_t link_bytes = 0;
};

struct LinkStats {
    std::size_t transmissions = 0;
    std::size_t bytes = 0;
};

struct FabricConfig {
    std::size_t mtu = 64 * 1024;
    /// Per-link loss for robustness runs. 0 keeps the fabric lossless and
    /// never touches the RNG.
    double drop_probability = 0.0;
    std::uint64_t seed = 1;
};

/// The simulated core: a single rendezvous table, the topology manager, and
/// source-routed delivery with per-link accounting.
///
/// Every topology node starts attached. Handlers receive packets addressed
/// to their node; nodes without a handler (core routers) only forward.
class Fabric {
public:
    using Handler = std::function<void(const IcnPacket&)>;

    Fabric(Scheduler& scheduler, Topology topology, FabricConfig config = {}, Trace* trace = nullptr);

    void set_handler(const NodeId& node, Handler handler);
    void detach(const NodeId& node);
    bool attached(const NodeId& node) const;

    void advertise(const IcnName& name, const NodeId& publisher);

    /// Idempotent. When publishers exist, each gets a NOTIFY carrying the
    /// current forward tree to all subscribers of the name.
    void subscribe(const IcnName& name, const NodeId& subscriber);
    void unsubscribe(const IcnName& name, const NodeId& subscriber);

    std::vector<NodeId> publishers(const IcnName& name) const;
    std::vector<NodeId> subscribers(const IcnName& name) const;

    /// Publishes to the nearest subscriber of `name` and subscribes the
    /// publisher to `reply_name`. Throws no-subscriber or mtu-exceeded.
    DeliveryReport pub_isub(const IcnName& name, Bytes payload, const NodeId& publisher,
                            std::optional<IcnName> reply_name, std::string label);

    /// One transmission per edge of `fid`; every leaf gets one copy.
    /// Throws broken-path or mtu-exceeded.
    DeliveryReport publish_to_path(const IcnName& name, Bytes payload, const ForwardingPath& fid,
                                   std::string label);

    std::pair<ForwardingPath, ForwardingPath> compute_paths(const NodeId& publisher,
                                                            const std::vector<NodeId>& subscribers) const;

    /// Directed link counters for one traffic class, or every class when
    /// `label` is empty.
    LinkStats link_stats(const NodeId& from, const NodeId& to, std::string_view label = {}) const;
    LinkStats total_stats(std::string_view label = {}) const;
    std::size_t publications(std::string_view label = {}) const;

    const Topology& topology() const { return topology_; }
    Scheduler& scheduler() { return scheduler_; }

private:
    void check_path(const ForwardingPath& fid) const;
    void check_mtu(const Bytes& payload) const;
    DeliveryReport transmit(IcnPacket packet);
    void record(std::string_view kind, const IcnPacket& pkt, std::string_view extra = {});
    void require(const NodeId& node) const;

    Scheduler& scheduler_;
    Topology topology_;
    FabricConfig config_;
    Trace* trace_;
    std::mt19937_64 rng_;
    std::set<NodeId> detached_;
    std::map<NodeId, Handler> handlers_;
    std::map<IcnName, std::set<NodeId>> publishers_;
    std::map<IcnName, std::set<NodeId>> subscribers_;
    std::map<std::string, std::map<Edge, LinkStats>, std::less<>> links_;
    std::map<std::string, std::size_t, std::less<>> publications_;
};

}  // namespace coapicn::icn
