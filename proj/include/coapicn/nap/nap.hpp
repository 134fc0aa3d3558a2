#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coapicn/coap/message.hpp"
#include "coapicn/icn/path.hpp"

namespace coapicn::nap {

enum class Role { ClientSide, ServerSide };

struct AttachedServer {
    std::string fqdn;
    std::string endpoint;  // "host:port"
};

struct NapConfig {
    Role role = Role::ClientSide;
    icn::NodeId node_id;
    /// Where clients send (client side) or the source of server-bound
    /// datagrams (server side).
    std::string listen_endpoint;
    std::vector<AttachedServer> attached_servers;  // server side only
    /// Server side: publish each response once over the merged tree of all
    /// subscribed client NAPs. Off, it is published once per client NAP.
    bool multicast = true;
};

/// Throws invalid-scenario when role-specific fields are missing or FQDNs
/// repeat.
void validate(const NapConfig& config);

struct NapCounters {
    std::uint64_t requests_in = 0;
    std::uint64_t requests_forwarded = 0;
    std::uint64_t responses_in = 0;
    std::uint64_t notifications_out = 0;
    std::uint64_t acks_suppressed = 0;
    std::uint64_t acks_forwarded = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    std::uint64_t dropped = 0;

    friend bool operator==(const NapCounters&, const NapCounters&) = default;
};

/// "requests_in=.. requests_forwarded=.. ..." in declaration order.
std::string to_string(const NapCounters& c);

/// UDP side of a NAP.
class DatagramSender {
public:
    virtual ~DatagramSender() = default;
    virtual void send_datagram(const std::string& from, const std::string& to, Bytes wire) = 0;
};

}  // namespace coapicn::nap
