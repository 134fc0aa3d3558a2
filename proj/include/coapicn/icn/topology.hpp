#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "coapicn/icn/path.hpp"
#include "coapicn/time.hpp"

namespace coapicn::icn {

inline constexpr SimTime kDefaultLinkLatency = std::chrono::milliseconds(1);

/// Undirected graph of fabric nodes and the path computation over it.
///
/// Paths are shortest by hop count. Among equal-length paths the one whose
/// node sequence is lexicographically smallest wins, which makes every
/// prefix of a chosen path the chosen path to that prefix's end. Paths from
/// one publisher therefore always merge into a tree.
class Topology {
public:
    void add_node(const NodeId& id);
    void add_link(const NodeId& a, const NodeId& b, SimTime latency = kDefaultLinkLatency);

    bool has_node(const NodeId& id) const { return adjacency_.count(id) != 0; }
    bool has_link(const NodeId& a, const NodeId& b) const;
    SimTime latency(const NodeId& a, const NodeId& b) const;
    const std::set<NodeId>& neighbors(const NodeId& id) const;
    std::vector<NodeId> nodes() const;
    std::size_t link_count() const { return latency_.size(); }

    /// The same graph without `removed` and their links.
    Topology without(const std::set<NodeId>& removed) const;

    std::vector<NodeId> shortest_path(const NodeId& from, const NodeId& to) const;

    /// Hop distance, or nullopt when unreachable.
    std::optional<std::size_t> distance(const NodeId& from, const NodeId& to) const;

    /// The closest of `candidates` to `from`, lowest id on ties.
    NodeId nearest(const NodeId& from, const std::vector<NodeId>& candidates) const;

    /// Forward tree publisher -> subscribers and the reverse paths
    /// subscribers -> publisher. Subscribers are deduplicated and kept in
    /// ascending id order.
    std::pair<ForwardingPath, ForwardingPath> compute_paths(const NodeId& publisher,
                                                            const std::vector<NodeId>& subscribers) const;

private:
    std::map<NodeId, std::size_t> distances_to(const NodeId& to) const;
    void require(const NodeId& id) const;

    std::map<NodeId, std::set<NodeId>> adjacency_;
    std::map<std::pair<NodeId, NodeId>, SimTime> latency_;  // key ordered (low, high)
};

}  // namespace coapicn::icn
