#include "coapicn/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "coapicn/coap/uri.hpp"
#include "coapicn/error.hpp"

namespace coapicn::harness {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what)
{
    throw Error(Errc::invalid_scenario, where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        bad(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || key == a;
        if (!ok)
            bad(where + "." + key, "unknown field");
    }
}

const json& field(const json& obj, const std::string& where, const char* key)
{
    if (!obj.contains(key))
        bad(where + "." + key, "missing");
    return obj.at(key);
}

std::string string_field(const json& obj, const std::string& where, const char* key)
{
    const json& v = field(obj, where, key);
    if (!v.is_string())
        bad(where + "." + key, "expected a string");
    return v.get<std::string>();
}

double number(const json& v, const std::string& where)
{
    if (!v.is_number())
        bad(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        bad(where, "not finite");
    return d;
}

SimTime millis(const json& v, const std::string& where)
{
    const double ms = number(v, where);
    if (ms < 0)
        bad(where, "negative duration");
    return SimTime(static_cast<std::int64_t>(std::llround(ms * 1000.0)));
}

template <typename T>
T unsigned_field(const json& v, const std::string& where)
{
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        bad(where, "expected a non-negative integer");
    return v.get<T>();
}

coap::MessageType message_type(const json& v, const std::string& where)
{
    if (v == "CON")
        return coap::MessageType::Confirmable;
    if (v == "NON")
        return coap::MessageType::NonConfirmable;
    bad(where, "expected \"CON\" or \"NON\"");
}

template <typename Fn>
void each(const json& obj, const std::string& where, const char* key, Fn fn)
{
    if (!obj.contains(key))
        return;
    const json& arr = obj.at(key);
    if (!arr.is_array())
        bad(where + "." + key, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
        fn(arr[i], where + "." + key + "[" + std::to_string(i) + "]");
}

}  // namespace

Scenario parse_scenario(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::invalid_scenario, std::string("not valid JSON: ") + e.what());
    }

    const std::string root = "scenario";
    only_keys(doc, root,
              {"name", "seed", "duration_ms", "topology", "naps", "servers", "clients", "timing", "fabric",
               "shared_link"});
    Scenario s;
    s.name = string_field(doc, root, "name");
    if (doc.contains("seed"))
        s.seed = unsigned_field<std::uint64_t>(doc.at("seed"), root + ".seed");
    s.duration = millis(field(doc, root, "duration_ms"), root + ".duration_ms");

    const json& topo = field(doc, root, "topology");
    only_keys(topo, root + ".topology", {"nodes", "links"});
    each(topo, root + ".topology", "nodes", [&](const json& n, const std::string& where) {
        if (!n.is_string())
            bad(where, "expected a string");
        s.nodes.push_back(n.get<std::string>());
    });
    each(topo, root + ".topology", "links", [&](const json& l, const std::string& where) {
        only_keys(l, where, {"a", "b", "latency_ms"});
        LinkSpec link{string_field(l, where, "a"), string_field(l, where, "b")};
        if (l.contains("latency_ms"))
            link.latency = millis(l.at("latency_ms"), where + ".latency_ms");
        s.links.push_back(std::move(link));
    });

    each(doc, root, "naps", [&](const json& n, const std::string& where) {
        only_keys(n, where, {"id", "role", "listen"});
        NapSpec nap{string_field(n, where, "id"), nap::Role::ClientSide, string_field(n, where, "listen")};
        const std::string role = string_field(n, where, "role");
        if (role == "client")
            nap.role = nap::Role::ClientSide;
        else if (role == "server")
            nap.role = nap::Role::ServerSide;
        else
            bad(where + ".role", "expected \"client\" or \"server\"");
        s.naps.push_back(std::move(nap));
    });

    each(doc, root, "servers", [&](const json& v, const std::string& where) {
        only_keys(v, where, {"fqdn", "endpoint", "nap", "resources"});
        ServerSpec srv{string_field(v, where, "fqdn"), string_field(v, where, "endpoint"),
                       string_field(v, where, "nap"), {}};
        each(v, where, "resources", [&](const json& r, const std::string& rw) {
            only_keys(r, rw, {"path", "period_ms", "payload_size", "type"});
            ResourceSpec res;
            res.path = string_field(r, rw, "path");
            res.period = millis(field(r, rw, "period_ms"), rw + ".period_ms");
            if (r.contains("payload_size"))
                res.payload_size = unsigned_field<std::size_t>(r.at("payload_size"), rw + ".payload_size");
            if (r.contains("type"))
                res.type = message_type(r.at("type"), rw + ".type");
            srv.resources.push_back(std::move(res));
        });
        s.servers.push_back(std::move(srv));
    });

    each(doc, root, "clients", [&](const json& c, const std::string& where) {
        only_keys(c, where, {"id", "endpoint", "nap", "url", "token", "start_ms", "duration_ms", "type"});
        ClientSpec cl;
        cl.id = string_field(c, where, "id");
        cl.endpoint = string_field(c, where, "endpoint");
        cl.nap = string_field(c, where, "nap");
        cl.url = string_field(c, where, "url");
        cl.token = string_field(c, where, "token");
        if (c.contains("start_ms"))
            cl.start = millis(c.at("start_ms"), where + ".start_ms");
        cl.duration = millis(field(c, where, "duration_ms"), where + ".duration_ms");
        if (c.contains("type"))
            cl.type = message_type(c.at("type"), where + ".type");
        s.clients.push_back(std::move(cl));
    });

    if (doc.contains("timing")) {
        const std::string where = root + ".timing";
        const json& t = doc.at("timing");
        only_keys(t, where,
                  {"ack_timeout_ms", "ack_random_factor", "max_retransmit", "subscription_lifetime_ms", "con_every",
                   "access_latency_ms"});
        if (t.contains("ack_timeout_ms"))
            s.timing.ack_timeout = millis(t.at("ack_timeout_ms"), where + ".ack_timeout_ms");
        if (t.contains("ack_random_factor"))
            s.timing.ack_random_factor = number(t.at("ack_random_factor"), where + ".ack_random_factor");
        if (t.contains("max_retransmit"))
            s.timing.max_retransmit = unsigned_field<unsigned>(t.at("max_retransmit"), where + ".max_retransmit");
        if (t.contains("subscription_lifetime_ms"))
            s.timing.subscription_lifetime =
                millis(t.at("subscription_lifetime_ms"), where + ".subscription_lifetime_ms");
        if (t.contains("con_every"))
            s.timing.con_every = unsigned_field<unsigned>(t.at("con_every"), where + ".con_every");
        if (t.contains("access_latency_ms"))
            s.timing.access_latency = millis(t.at("access_latency_ms"), where + ".access_latency_ms");
    }

    if (doc.contains("fabric")) {
        const std::string where = root + ".fabric";
        const json& f = doc.at("fabric");
        only_keys(f, where, {"mtu", "drop_probability"});
        if (f.contains("mtu"))
            s.fabric.mtu = unsigned_field<std::size_t>(f.at("mtu"), where + ".mtu");
        if (f.contains("drop_probability"))
            s.fabric.drop_probability = number(f.at("drop_probability"), where + ".drop_probability");
    }
    s.fabric.seed = s.seed;

    if (doc.contains("shared_link")) {
        const std::string where = root + ".shared_link";
        const json& l = doc.at("shared_link");
        only_keys(l, where, {"from", "to"});
        s.shared_link = SharedLink{string_field(l, where, "from"), string_field(l, where, "to")};
    }

    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::invalid_scenario, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void validate(const Scenario& s)
{
    if (s.name.empty())
        bad("scenario.name", "empty");
    if (s.duration <= SimTime::zero())
        bad("scenario.duration_ms", "must be > 0");

    std::set<std::string> nodes;
    for (const auto& n : s.nodes)
        if (n.empty() || !nodes.insert(n).second)
            bad("scenario.topology.nodes", "empty or repeated node '" + n + "'");
    for (std::size_t i = 0; i < s.links.size(); ++i) {
        const auto& l = s.links[i];
        const std::string where = "scenario.topology.links[" + std::to_string(i) + "]";
        if (!nodes.count(l.a) || !nodes.count(l.b))
            bad(where, "unknown node in link " + l.a + "-" + l.b);
        if (l.a == l.b)
            bad(where, "self link");
    }

    std::set<std::string> endpoints;
    auto claim = [&](const std::string& where, const std::string& ep) {
        if (ep.empty() || !endpoints.insert(ep).second)
            bad(where, "empty or repeated endpoint '" + ep + "'");
    };

    std::map<std::string, nap::Role> roles;
    for (std::size_t i = 0; i < s.naps.size(); ++i) {
        const auto& n = s.naps[i];
        const std::string where = "scenario.naps[" + std::to_string(i) + "]";
        if (!nodes.count(n.id))
            bad(where + ".id", "node '" + n.id + "' not in topology");
        if (!roles.emplace(n.id, n.role).second)
            bad(where + ".id", "nap '" + n.id + "' declared twice");
        claim(where + ".listen", n.listen);
    }

    std::set<std::string> fqdns;
    for (std::size_t i = 0; i < s.servers.size(); ++i) {
        const auto& v = s.servers[i];
        const std::string where = "scenario.servers[" + std::to_string(i) + "]";
        if (v.fqdn.empty() || !fqdns.insert(coap::normalize_uri("coap://" + v.fqdn)).second)
            bad(where + ".fqdn", "empty or repeated fqdn '" + v.fqdn + "'");
        claim(where + ".endpoint", v.endpoint);
        auto role = roles.find(v.nap);
        if (role == roles.end() || role->second != nap::Role::ServerSide)
            bad(where + ".nap", "'" + v.nap + "' is not a server-side nap");
        if (v.resources.empty())
            bad(where + ".resources", "at least one resource");
        std::set<std::string> paths;
        for (std::size_t j = 0; j < v.resources.size(); ++j) {
            const auto& r = v.resources[j];
            const std::string rw = where + ".resources[" + std::to_string(j) + "]";
            if (r.path.empty() || r.path.front() != '/' || !paths.insert(r.path).second)
                bad(rw + ".path", "must start with '/' and be unique");
            if (r.period <= SimTime::zero())
                bad(rw + ".period_ms", "must be > 0");
            if (r.payload_size > 60000)
                bad(rw + ".payload_size", "too large for one datagram");
        }
    }

    for (const auto& [id, role] : roles) {
        if (role != nap::Role::ServerSide)
            continue;
        const bool fronts = std::any_of(s.servers.begin(), s.servers.end(),
                                        [&id = id](const ServerSpec& v) { return v.nap == id; });
        if (!fronts)
            bad("scenario.naps", "server-side nap '" + id + "' fronts no server");
    }

    std::set<std::pair<std::string, std::string>> tokens;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < s.clients.size(); ++i) {
        const auto& c = s.clients[i];
        const std::string where = "scenario.clients[" + std::to_string(i) + "]";
        if (c.id.empty() || !ids.insert(c.id).second)
            bad(where + ".id", "empty or repeated id '" + c.id + "'");
        claim(where + ".endpoint", c.endpoint);
        auto role = roles.find(c.nap);
        if (role == roles.end() || role->second != nap::Role::ClientSide)
            bad(where + ".nap", "'" + c.nap + "' is not a client-side nap");
        try {
            coap::split_proxy_uri(c.url);
        } catch (const Error& e) {
            bad(where + ".url", e.what());
        }
        if (c.token.size() > coap::kMaxTokenLength)
            bad(where + ".token", "longer than 8 bytes");
        if (!tokens.emplace(c.endpoint, c.token).second)
            bad(where + ".token", "repeated for endpoint " + c.endpoint);
        if (c.duration <= SimTime::zero())
            bad(where + ".duration_ms", "must be > 0");
    }

    if (s.timing.ack_timeout <= SimTime::zero())
        bad("scenario.timing.ack_timeout_ms", "must be > 0");
    if (s.timing.ack_random_factor < 1.0)
        bad("scenario.timing.ack_random_factor", "must be >= 1");
    if (s.timing.subscription_lifetime <= SimTime::zero())
        bad("scenario.timing.subscription_lifetime_ms", "must be > 0");
    if (s.fabric.drop_probability < 0.0 || s.fabric.drop_probability > 1.0)
        bad("scenario.fabric.drop_probability", "must be within [0, 1]");
    if (s.shared_link) {
        bool found = false;
        for (const auto& l : s.links)
            found = found || (l.a == s.shared_link->from && l.b == s.shared_link->to) ||
                    (l.b == s.shared_link->from && l.a == s.shared_link->to);
        if (!found)
            bad("scenario.shared_link", "no such link");
    }
}

icn::Topology build_topology(const Scenario& s)
{
    icn::Topology t;
    for (const auto& n : s.nodes)
        t.add_node(n);
    for (const auto& l : s.links)
        t.add_link(l.a, l.b, l.latency);
    return t;
}

std::vector<nap::NapConfig> nap_configs(const Scenario& s, bool multicast)
{
    std::vector<nap::NapConfig> out;
    for (const auto& n : s.naps) {
        nap::NapConfig c{n.role, n.id, n.listen, {}, multicast};
        for (const auto& v : s.servers)
            if (v.nap == n.id)
                c.attached_servers.push_back(nap::AttachedServer{v.fqdn, v.endpoint});
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace coapicn::harness
