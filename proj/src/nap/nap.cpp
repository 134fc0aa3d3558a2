#include "coapicn/nap/nap.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "coapicn/error.hpp"

namespace coapicn::nap {

void validate(const NapConfig& config)
{
    const std::string who = "nap '" + config.node_id + "'";
    if (config.node_id.empty())
        throw Error(Errc::invalid_scenario, "nap without node id");
    if (config.listen_endpoint.empty())
        throw Error(Errc::invalid_scenario, who + ": listen endpoint missing");
    if (config.role == Role::ClientSide) {
        if (!config.attached_servers.empty())
            throw Error(Errc::invalid_scenario, who + ": client-side nap with attached servers");
        return;
    }
    if (config.attached_servers.empty())
        throw Error(Errc::invalid_scenario, who + ": server-side nap without servers");
    std::set<std::string> seen;
    for (const auto& s : config.attached_servers) {
        std::string fqdn = s.fqdn;
        std::transform(fqdn.begin(), fqdn.end(), fqdn.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (fqdn.empty() || s.endpoint.empty())
            throw Error(Errc::invalid_scenario, who + ": attached server needs fqdn and endpoint");
        if (!seen.insert(fqdn).second)
            throw Error(Errc::invalid_scenario, who + ": fqdn " + fqdn + " attached twice");
    }
}

std::string to_string(const NapCounters& c)
{
    std::ostringstream os;
    os << "requests_in=" << c.requests_in << " requests_forwarded=" << c.requests_forwarded
       << " responses_in=" << c.responses_in << " notifications_out=" << c.notifications_out
       << " acks_suppressed=" << c.acks_suppressed << " acks_forwarded=" << c.acks_forwarded
       << " bytes_in=" << c.bytes_in << " bytes_out=" << c.bytes_out << " dropped=" << c.dropped;
    return os.str();
}

}  // namespace coapicn::nap
