#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "coapicn/harness/scenario.hpp"
#include "coapicn/nap/nap.hpp"
#include "coapicn/trace.hpp"

namespace coapicn::harness {

/// "a.b.c.d:port" for an IPv4 socket address. Throws socket-error on
/// anything else.
struct Ipv4Endpoint {
    std::uint32_t address = 0;  // host order
    std::uint16_t port = 0;
};

Ipv4Endpoint parse_endpoint(const std::string& text);
std::string format_endpoint(const Ipv4Endpoint& ep);

/// Runs the scenario's NAPs against real CoAP endpoints. Each NAP listen
/// endpoint becomes a bound UDP socket; the fabric between NAPs stays
/// in-process and its clock follows the steady clock. Servers and clients
/// in the scenario are ignored except for server attachment (FQDN and
/// address).
class LiveGateway {
public:
    explicit LiveGateway(const Scenario& s, Trace* trace = nullptr);
    ~LiveGateway();

    LiveGateway(const LiveGateway&) = delete;
    LiveGateway& operator=(const LiveGateway&) = delete;

    /// The address a NAP's socket actually bound (resolves port 0).
    std::string bound_endpoint(const std::string& nap_id) const;

    /// Serves until `stop` becomes true or `limit` of wall time passes.
    void run(const std::atomic<bool>& stop, SimTime limit = SimTime::max());

    std::map<std::string, nap::NapCounters> counters() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace coapicn::harness
