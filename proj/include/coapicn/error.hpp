#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coapicn {

// Every failure the library reports. The names double as the stable
// diagnostic strings printed by the CLI.
enum class Errc {
    // coap
    invalid_token_length,
    truncated_message,
    bad_version,
    malformed_option_delta,
    malformed_option_length,
    malformed_payload,
    malformed_empty,
    unsorted_options,
    duplicate_option,
    message_too_large,
    invalid_option_value,
    not_a_coap_uri,
    empty_host,
    malformed_uri,
    missing_proxy_uri,
    // observe
    not_an_observe_request,
    no_matching_subscription,
    not_found,
    duplicate_mid,
    unknown_subscription,
    // icn
    unknown_node,
    no_subscriber,
    mtu_exceeded,
    broken_path,
    disconnected_topology,
    not_a_tree,
    // nap
    empty_fqdn,
    unknown_fqdn,
    // harness
    invalid_scenario,
    scenario_mismatch,
    // live transport
    socket_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail))
        , code_(code)
    {}

    explicit Error(Errc code) : Error(code, std::string{}) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace coapicn
