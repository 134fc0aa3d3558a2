#include "coapicn/error.hpp"

namespace coapicn {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::invalid_token_length: return "invalid-token-length";
    case Errc::truncated_message: return "truncated-message";
    case Errc::bad_version: return "bad-version";
    case Errc::malformed_option_delta: return "malformed-option-delta";
    case Errc::malformed_option_length: return "malformed-option-length";
    case Errc::malformed_payload: return "malformed-payload";
    case Errc::malformed_empty: return "malformed-empty";
    case Errc::unsorted_options: return "unsorted-options";
    case Errc::duplicate_option: return "duplicate-option";
    case Errc::message_too_large: return "message-too-large";
    case Errc::invalid_option_value: return "invalid-option-value";
    case Errc::not_a_coap_uri: return "not-a-coap-uri";
    case Errc::empty_host: return "empty-host";
    case Errc::malformed_uri: return "malformed-uri";
    case Errc::missing_proxy_uri: return "missing-proxy-uri";
    case Errc::not_an_observe_request: return "not-an-observe-request";
    case Errc::no_matching_subscription: return "no-matching-subscription";
    case Errc::not_found: return "not-found";
    case Errc::duplicate_mid: return "duplicate-mid";
    case Errc::unknown_subscription: return "unknown-subscription";
    case Errc::unknown_node: return "unknown-node";
    case Errc::no_subscriber: return "no-subscriber";
    case Errc::mtu_exceeded: return "mtu-exceeded";
    case Errc::broken_path: return "broken-path";
    case Errc::disconnected_topology: return "disconnected-topology";
    case Errc::not_a_tree: return "not-a-tree";
    case Errc::empty_fqdn: return "empty-fqdn";
    case Errc::unknown_fqdn: return "unknown-fqdn";
    case Errc::invalid_scenario: return "invalid-scenario";
    case Errc::scenario_mismatch: return "scenario-mismatch";
    case Errc::socket_error: return "socket-error";
    }
    return "unknown-error";
}

}  // namespace coapicn
