#include "coapicn/harness/live.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <functional>

#include "coapicn/error.hpp"
#include "coapicn/icn/fabric.hpp"
#include "coapicn/icn/scheduler.hpp"
#include "coapicn/nap/client_nap.hpp"
#include "coapicn/nap/server_nap.hpp"

namespace coapicn::harness {

Ipv4Endpoint parse_endpoint(const std::string& text)
{
    const auto colon = text.rfind(':');
    if (colon == std::string::npos)
        throw Error(Errc::socket_error, "missing port in " + text);
    in_addr addr{};
    if (inet_pton(AF_INET, text.substr(0, colon).c_str(), &addr) != 1)
        throw Error(Errc::socket_error, "not an IPv4 address: " + text);
    unsigned port = 0;
    const char* first = text.data() + colon + 1;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, port);
    if (ec != std::errc{} || ptr != last || first == last || port > 0xFFFF)
        throw Error(Errc::socket_error, "bad port in " + text);
    return Ipv4Endpoint{ntohl(addr.s_addr), static_cast<std::uint16_t>(port)};
}

std::string format_endpoint(const Ipv4Endpoint& ep)
{
    in_addr addr{htonl(ep.address)};
    char buf[INET_ADDRSTRLEN] = {};
    inet_ntop(AF_INET, &addr, buf, sizeof buf);
    return std::string(buf) + ":" + std::to_string(ep.port);
}

namespace {

sockaddr_in to_sockaddr(const Ipv4Endpoint& ep)
{
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(ep.address);
    sa.sin_port = htons(ep.port);
    return sa;
}

std::string system_error(const std::string& what)
{
    return what + ": " + std::strerror(errno);
}

struct Socket {
    int fd = -1;
    std::string configured;  // as written in the scenario
    std::string bound;
    std::function<void(BytesView, const std::string&)> receiver;
};

class SocketSender : public nap::DatagramSender {
public:
    explicit SocketSender(std::vector<Socket>& sockets) : sockets_(sockets) {}

    void send_datagram(const std::string& from, const std::string& to, Bytes wire) override
    {
        const Socket* sock = nullptr;
        for (const auto& s : sockets_)
            if (s.configured == from)
                sock = &s;
        if (!sock)
            throw Error(Errc::socket_error, "no socket for " + from);
        const sockaddr_in sa = to_sockaddr(parse_endpoint(to));
        // UDP is best effort; a failed send is a lost datagram.
        (void)::sendto(sock->fd, wire.data(), wire.size(), 0, reinterpret_cast<const sockaddr*>(&sa), sizeof sa);
    }

private:
    std::vector<Socket>& sockets_;
};

}  // namespace

struct LiveGateway::Impl {
    icn::Scheduler scheduler;
    icn::Topology topology;
    std::unique_ptr<icn::Fabric> fabric;
    std::vector<Socket> sockets;
    SocketSender sender{sockets};
    std::vector<std::unique_ptr<nap::ClientNap>> cnaps;
    std::vector<std::unique_ptr<nap::ServerNap>> snaps;
    std::map<std::string, std::string> bound;  // nap id -> bound endpoint

    ~Impl()
    {
        for (auto& s : sockets)
            if (s.fd >= 0)
                ::close(s.fd);
    }

    Socket& open(const std::string& endpoint)
    {
        const sockaddr_in sa = to_sockaddr(parse_endpoint(endpoint));
        Socket s;
        s.configured = endpoint;
        s.fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0);
        if (s.fd < 0)
            throw Error(Errc::socket_error, system_error("socket"));
        sockets.push_back(s);  // closed by the destructor from here on
        if (::bind(s.fd, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0)
            throw Error(Errc::socket_error, system_error("bind " + endpoint));
        sockaddr_in actual{};
        socklen_t len = sizeof actual;
        if (::getsockname(s.fd, reinterpret_cast<sockaddr*>(&actual), &len) != 0)
            throw Error(Errc::socket_error, system_error("getsockname " + endpoint));
        sockets.back().bound = format_endpoint(Ipv4Endpoint{ntohl(actual.sin_addr.s_addr), ntohs(actual.sin_port)});
        return sockets.back();
    }
};

LiveGateway::LiveGateway(const Scenario& s, Trace* trace) : impl_(std::make_unique<Impl>())
{
    validate(s);
    impl_->topology = build_topology(s);
    impl_->fabric = std::make_unique<icn::Fabric>(impl_->scheduler, impl_->topology, s.fabric, trace);
    const observe::HandlerConfig handler{s.timing.subscription_lifetime, s.timing.con_every};
    impl_->sockets.reserve(s.naps.size());
    for (auto& cfg : nap_configs(s, true)) {
        Socket& sock = impl_->open(cfg.listen_endpoint);
        impl_->bound[cfg.node_id] = sock.bound;
        if (cfg.role == nap::Role::ClientSide) {
            auto n = std::make_unique<nap::ClientNap>(std::move(cfg), *impl_->fabric, impl_->sender, handler, trace);
            sock.receiver = [p = n.get()](BytesView w, const std::string& from) { p->on_client_datagram(w, from); };
            impl_->cnaps.push_back(std::move(n));
        } else {
            auto n = std::make_unique<nap::ServerNap>(std::move(cfg), *impl_->fabric, impl_->sender, handler, trace);
            sock.receiver = [p = n.get()](BytesView w, const std::string& from) { p->on_server_datagram(w, from); };
            impl_->snaps.push_back(std::move(n));
        }
    }
}

LiveGateway::~LiveGateway() = default;

std::string LiveGateway::bound_endpoint(const std::string& nap_id) const
{
    auto it = impl_->bound.find(nap_id);
    if (it == impl_->bound.end())
        throw Error(Errc::unknown_node, nap_id);
    return it->second;
}

void LiveGateway::run(const std::atomic<bool>& stop, SimTime limit)
{
    using Clock = std::chrono::steady_clock;
    const Clock::time_point start = Clock::now() - impl_->scheduler.now();
    auto elapsed = [&] { return std::chrono::duration_cast<SimTime>(Clock::now() - start); };

    std::vector<pollfd> fds;
    for (const auto& s : impl_->sockets)
        fds.push_back(pollfd{s.fd, POLLIN, 0});

    std::uint8_t buf[65536];
    while (!stop.load()) {
        SimTime now = elapsed();
        if (now >= limit)
            break;
        impl_->scheduler.run_until(now);

        SimTime wait = std::chrono::milliseconds(20);
        if (const auto next = impl_->scheduler.next_time())
            wait = std::clamp(*next - now, SimTime::zero(), wait);
        const int timeout_ms = static_cast<int>((wait.count() + 999) / 1000);
        if (::poll(fds.data(), fds.size(), timeout_ms) < 0) {
            if (errno == EINTR)
                continue;
            throw Error(Errc::socket_error, system_error("poll"));
        }
        for (std::size_t i = 0; i < fds.size(); ++i) {
            if (!(fds[i].revents & POLLIN))
                continue;
            for (;;) {
                sockaddr_in peer{};
                socklen_t len = sizeof peer;
                const ssize_t n =
                    ::recvfrom(fds[i].fd, buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&peer), &len);
                if (n < 0)
                    break;  // drained, or a transient error on a datagram socket
                impl_->scheduler.run_until(elapsed());
                const std::string from =
                    format_endpoint(Ipv4Endpoint{ntohl(peer.sin_addr.s_addr), ntohs(peer.sin_port)});
                impl_->sockets[i].receiver(BytesView(buf, static_cast<std::size_t>(n)), from);
            }
        }
    }
}

std::map<std::string, nap::NapCounters> LiveGateway::counters() const
{
    std::map<std::string, nap::NapCounters> out;
    for (const auto& n : impl_->cnaps)
        out[n->config().node_id] = n->counters();
    for (const auto& n : impl_->snaps)
        out[n->config().node_id] = n->counters();
    return out;
}

}  // namespace coapicn::harness
