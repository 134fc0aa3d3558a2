#pragma once

#include <map>
#include <optional>
#include <string>

#include "coapicn/icn/fabric.hpp"
#include "coapicn/nap/nap.hpp"
#include "coapicn/observe/handler.hpp"

namespace coapicn::nap {

/// State kept for one live upstream observation.
struct PendingExchange {
    icn::IcnName icn_name;          // the server's FQDN name
    icn::ForwardingPath forward_path;  // FID_req
    icn::ForwardingPath reverse_path;  // FID_res
    Bytes upstream_token;
    std::string resource_uri;
    Bytes last_payload;
};

/// Client-side NAP: terminates CoAP from local clients and speaks to the
/// fabric on their behalf.
class ClientNap {
public:
    ClientNap(NapConfig config, icn::Fabric& fabric, DatagramSender& udp, observe::HandlerConfig handler = {},
              Trace* trace = nullptr);

    void on_client_datagram(BytesView wire, const std::string& from);
    void on_icn_packet(const icn::IcnPacket& pkt);

    const NapConfig& config() const { return config_; }
    const NapCounters& counters() const { return counters_; }
    const observe::ObserveHandler& handler() const { return handler_; }
    const std::map<icn::IcnName, PendingExchange>& exchanges() const { return exchanges_; }

private:
    struct OneShot {
        std::string client;
        Bytes token;
        std::uint16_t message_id;
        coap::MessageType type;
        icn::IcnName name;  // fabric name the request went to
    };
    struct AckRelay {
        icn::IcnName exchange;
        std::uint16_t upstream_mid;
    };

    void on_ack(const coap::CoapMessage& ack, const std::string& from);
    void on_observe_register(const coap::CoapMessage& req, const std::string& from);
    void on_observe_deregister(const coap::CoapMessage& req, const std::string& from);
    void on_one_shot(const coap::CoapMessage& req, const std::string& from);
    void on_removed(const observe::DeregisterResult& removed, const std::optional<OneShot>& reply_to);
    void on_exchange_response(coap::CoapMessage msg, PendingExchange& ex);
    void send_deliveries(const std::vector<observe::Delivery>& deliveries, PendingExchange* ex,
                         const coap::CoapMessage& upstream);
    void send_upstream_ack(const PendingExchange& ex, std::uint16_t mid);
    void send_to_client(const std::string& to, const coap::CoapMessage& msg);
    void reply_direct(const std::string& to, const coap::CoapMessage& req, std::uint8_t code, Bytes payload = {});
    std::optional<icn::DeliveryReport> publish_request(const coap::CoapMessage& req, const std::string& host,
                                                       const icn::IcnName& reply, const char* label);
    void expire();
    void note(std::string_view action, std::string_view detail);

    NapConfig config_;
    icn::Fabric& fabric_;
    DatagramSender& udp_;
    Trace* trace_;
    observe::ObserveHandler handler_;
    NapCounters counters_;
    std::map<icn::IcnName, PendingExchange> exchanges_;  // keyed by response name
    std::map<icn::IcnName, OneShot> one_shots_;          // keyed by reply name
    std::map<std::pair<std::string, std::uint16_t>, AckRelay> ack_relays_;
    std::uint64_t next_exchange_ = 0;
    std::uint16_t upstream_mid_ = 0;
};

}  // namespace coapicn::nap
