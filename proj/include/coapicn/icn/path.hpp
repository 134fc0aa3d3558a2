#pragma once

#include <string>
#include <utility>
#include <vector>

namespace coapicn::icn {

using NodeId = std::string;
using Edge = std::pair<NodeId, NodeId>;

/// A source-routed delivery path: one node list per destination. Paths of a
/// forward tree share their root and every common prefix, so each directed
/// edge is transmitted once however many destinations lie behind it.
class ForwardingPath {
public:
    ForwardingPath() = default;

    static ForwardingPath unicast(std::vector<NodeId> nodes);

    /// Root-to-destination paths merged into one tree. Throws not-a-tree
    /// when roots differ, a node is reached through two parents, or a path
    /// revisits a node.
    static ForwardingPath tree(std::vector<std::vector<NodeId>> paths);

    /// Independent paths toward a common sink (the reverse direction of a
    /// tree). Only per-path validity is checked.
    static ForwardingPath bundle(std::vector<std::vector<NodeId>> paths);

    const std::vector<std::vector<NodeId>>& paths() const { return paths_; }
    bool empty() const { return paths_.empty(); }

    /// First node of the first path.
    const NodeId& root() const;

    /// Last node of each path, first-appearance order, no repeats.
    std::vector<NodeId> leaves() const;

    /// Every directed edge once, first-appearance order.
    std::vector<Edge> edges() const;

    /// Sum over paths of their hop counts, i.e. the cost of unicasting.
    std::size_t unicast_hops() const;

    const std::vector<NodeId>* path_to(const NodeId& leaf) const;

    /// "a>b>c,a>b>d"
    std::string to_string() const;

    friend bool operator==(const ForwardingPath&, const ForwardingPath&) = default;

private:
    explicit ForwardingPath(std::vector<std::vector<NodeId>> paths) : paths_(std::move(paths)) {}

    std::vector<std::vector<NodeId>> paths_;
};

}  // namespace coapicn::icn
