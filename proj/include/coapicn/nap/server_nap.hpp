#pragma once

#include <deque>
#include <map>
#include <string>

#include "coapicn/icn/fabric.hpp"
#include "coapicn/nap/nap.hpp"
#include "coapicn/observe/handler.hpp"

namespace coapicn::nap {

/// Server-side NAP: subscribes to the names of its attached servers and
/// turns fabric requests into unicast CoAP toward them. Its observers are
/// client NAPs, identified by fabric node id.
class ServerNap {
public:
    ServerNap(NapConfig config, icn::Fabric& fabric, DatagramSender& udp, observe::HandlerConfig handler = {},
              Trace* trace = nullptr);

    void on_icn_packet(const icn::IcnPacket& pkt);
    void on_server_datagram(BytesView wire, const std::string& from);

    const NapConfig& config() const { return config_; }
    const NapCounters& counters() const { return counters_; }
    const observe::ObserveHandler& handler() const { return handler_; }

private:
    struct Route {
        icn::ForwardingPath reverse_path;
    };
    struct OneShot {
        icn::IcnName reply_name;
        icn::ForwardingPath reverse_path;
        Bytes token;
        std::uint16_t message_id;
    };
    struct AckState {
        bool forwarded = false;
    };

    void on_ack(const coap::CoapMessage& ack, const icn::IcnPacket& pkt);
    void on_request(const coap::CoapMessage& req, const icn::IcnPacket& pkt);
    void on_removed(const observe::DeregisterResult& removed, std::optional<OneShot> reply_to);
    void publish_response(const coap::CoapMessage& msg, const std::string& resource_uri,
                          const std::vector<observe::Delivery>& deliveries);
    void reply(const OneShot& to, coap::CoapMessage msg);
    void send_to_server(const std::string& endpoint, const coap::CoapMessage& msg);
    const AttachedServer* server_for(const std::string& host) const;
    const AttachedServer* server_for_name(const icn::IcnName& name) const;
    std::uint16_t next_mid(const std::string& endpoint);
    Bytes mint_token();
    void expire();
    void note(std::string_view action, std::string_view detail);

    NapConfig config_;
    icn::Fabric& fabric_;
    DatagramSender& udp_;
    Trace* trace_;
    observe::ObserveHandler handler_;
    NapCounters counters_;
    std::map<icn::NodeId, Route> routes_;
    std::map<Bytes, OneShot> one_shots_;  // keyed by the token sent to the server
    std::map<std::pair<std::string, std::uint16_t>, AckState> acks_;  // (server endpoint, server MID)
    std::deque<std::pair<std::string, std::uint16_t>> ack_order_;
    std::map<std::string, std::uint16_t> server_mids_;
    std::uint64_t minted_ = 0;
};

}  // namespace coapicn::nap
