#include "coapicn/icn/topology.hpp"

#include <algorithm>
#include <deque>

#include "coapicn/error.hpp"

namespace coapicn::icn {

namespace {

std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b)
{
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

void Topology::require(const NodeId& id) const
{
    if (!has_node(id))
        throw Error(Errc::unknown_node, id);
}

void Topology::add_node(const NodeId& id)
{
    if (id.empty())
        throw Error(Errc::unknown_node, "empty node id");
    adjacency_.try_emplace(id);
}

void Topology::add_link(const NodeId& a, const NodeId& b, SimTime latency)
{
    require(a);
    require(b);
    if (a == b)
        throw Error(Errc::broken_path, "self link at " + a);
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
    latency_[key(a, b)] = latency;
}

bool Topology::has_link(const NodeId& a, const NodeId& b) const
{
    return latency_.count(key(a, b)) != 0;
}

SimTime Topology::latency(const NodeId& a, const NodeId& b) const
{
    auto it = latency_.find(key(a, b));
    if (it == latency_.end())
        throw Error(Errc::broken_path, "no link " + a + "-" + b);
    return it->second;
}

const std::set<NodeId>& Topology::neighbors(const NodeId& id) const
{
    auto it = adjacency_.find(id);
    if (it == adjacency_.end())
        throw Error(Errc::unknown_node, id);
    return it->second;
}

std::vector<NodeId> Topology::nodes() const
{
    std::vector<NodeId> out;
    for (const auto& [id, _] : adjacency_)
        out.push_back(id);
    return out;
}

Topology Topology::without(const std::set<NodeId>& removed) const
{
    Topology t;
    for (const auto& [id, _] : adjacency_)
        if (!removed.count(id))
            t.add_node(id);
    for (const auto& [k, lat] : latency_)
        if (!removed.count(k.first) && !removed.count(k.second))
            t.add_link(k.first, k.second, lat);
    return t;
}

std::map<NodeId, std::size_t> Topology::distances_to(const NodeId& to) const
{
    std::map<NodeId, std::size_t> dist{{to, 0}};
    std::deque<NodeId> queue{to};
    while (!queue.empty()) {
        const NodeId n = queue.front();
        queue.pop_front();
        for (const auto& m : adjacency_.at(n))
            if (dist.emplace(m, dist[n] + 1).second)
                queue.push_back(m);
    }
    return dist;
}

std::vector<NodeId> Topology::shortest_path(const NodeId& from, const NodeId& to) const
{
    require(from);
    require(to);
    const auto dist = distances_to(to);
    auto it = dist.find(from);
    if (it == dist.end())
        throw Error(Errc::disconnected_topology, from + " cannot reach " + to);
    // Greedy descent: the lowest-id neighbour one hop closer is taken each
    // step, yielding the lexicographically smallest shortest path.
    std::vector<NodeId> path{from};
    std::size_t d = it->second;
    while (d > 0) {
        for (const auto& m : adjacency_.at(path.back())) {
            auto md = dist.find(m);
            if (md != dist.end() && md->second == d - 1) {
                path.push_back(m);
                break;
            }
        }
        --d;
    }
    return path;
}

std::optional<std::size_t> Topology::distance(const NodeId& from, const NodeId& to) const
{
    require(from);
    require(to);
    const auto dist = distances_to(to);
    auto it = dist.find(from);
    if (it == dist.end())
        return std::nullopt;
    return it->second;
}

NodeId Topology::nearest(const NodeId& from, const std::vector<NodeId>& candidates) const
{
    require(from);
    const auto dist = distances_to(from);
    std::optional<std::pair<std::size_t, NodeId>> best;
    for (const auto& c : candidates) {
        require(c);
        auto it = dist.find(c);
        if (it == dist.end())
            continue;
        std::pair<std::size_t, NodeId> cand{it->second, c};
        if (!best || cand < *best)
            best = cand;
    }
    if (!best)
        throw Error(Errc::disconnected_topology, from + " reaches no candidate");
    return best->second;
}

std::pair<ForwardingPath, ForwardingPath> Topology::compute_paths(const NodeId& publisher,
                                                                  const std::vector<NodeId>& subscribers) const
{
    require(publisher);
    std::set<NodeId> unique(subscribers.begin(), subscribers.end());
    if (unique.empty())
        throw Error(Errc::no_subscriber, "no subscribers for " + publisher);
    std::vector<std::vector<NodeId>> forward;
    std::vector<std::vector<NodeId>> reverse;
    for (const auto& s : unique) {
        forward.push_back(shortest_path(publisher, s));
        reverse.push_back(shortest_path(s, publisher));
    }
    return {ForwardingPath::tree(std::move(forward)), ForwardingPath::bundle(std::move(reverse))};
}

}  // namespace coapicn::icn
