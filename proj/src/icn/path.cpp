#include "coapicn/icn/path.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "coapicn/error.hpp"

namespace coapicn::icn {

namespace {

void check_simple(const std::vector<NodeId>& path)
{
    if (path.empty())
        throw Error(Errc::not_a_tree, "empty path");
    std::set<NodeId> seen;
    for (const auto& n : path)
        if (!seen.insert(n).second)
            throw Error(Errc::not_a_tree, "path revisits " + n);
}

}  // namespace

ForwardingPath ForwardingPath::unicast(std::vector<NodeId> nodes)
{
    check_simple(nodes);
    return ForwardingPath({std::move(nodes)});
}

ForwardingPath ForwardingPath::tree(std::vector<std::vector<NodeId>> paths)
{
    if (paths.empty())
        throw Error(Errc::not_a_tree, "no paths");
    std::map<NodeId, NodeId> parent;
    const NodeId& root = paths.front().empty() ? NodeId{} : paths.front().front();
    for (const auto& p : paths) {
        check_simple(p);
        if (p.front() != root)
            throw Error(Errc::not_a_tree, "roots " + root + " and " + p.front());
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (p[i] == root)
                throw Error(Errc::not_a_tree, "edge into the root");
            auto [it, fresh] = parent.emplace(p[i], p[i - 1]);
            if (!fresh && it->second != p[i - 1])
                throw Error(Errc::not_a_tree, p[i] + " has parents " + it->second + " and " + p[i - 1]);
        }
    }
    return ForwardingPath(std::move(paths));
}

ForwardingPath ForwardingPath::bundle(std::vector<std::vector<NodeId>> paths)
{
    if (paths.empty())
        throw Error(Errc::not_a_tree, "no paths");
    for (const auto& p : paths)
        check_simple(p);
    return ForwardingPath(std::move(paths));
}

const NodeId& ForwardingPath::root() const
{
    if (paths_.empty())
        throw Error(Errc::broken_path, "empty forwarding path");
    return paths_.front().front();
}

std::vector<NodeId> ForwardingPath::leaves() const
{
    std::vector<NodeId> out;
    for (const auto& p : paths_)
        if (std::find(out.begin(), out.end(), p.back()) == out.end())
            out.push_back(p.back());
    return out;
}

std::vector<Edge> ForwardingPath::edges() const
{
    std::vector<Edge> out;
    std::set<Edge> seen;
    for (const auto& p : paths_)
        for (std::size_t i = 1; i < p.size(); ++i) {
            Edge e{p[i - 1], p[i]};
            if (seen.insert(e).second)
                out.push_back(std::move(e));
        }
    return out;
}

std::size_t ForwardingPath::unicast_hops() const
{
    std::size_t n = 0;
    for (const auto& p : paths_)
        n += p.size() - 1;
    return n;
}

const std::vector<NodeId>* ForwardingPath::path_to(const NodeId& leaf) const
{
    for (const auto& p : paths_)
        if (p.back() == leaf)
            return &p;
    return nullptr;
}

std::string ForwardingPath::to_string() const
{
    std::string out;
    for (std::size_t i = 0; i < paths_.size(); ++i) {
        if (i)
            out += ',';
        for (std::size_t j = 0; j < paths_[i].size(); ++j) {
            if (j)
                out += '>';
            out += paths_[i][j];
        }
    }
    return out;
}

}  // namespace coapicn::icn
