#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "coapicn/coap/message.hpp"

namespace coapicn::coap {

/// A coap:// URI broken into the option values that carry it.
struct ProxyUriParts {
    std::string uri_host;
    std::uint16_t uri_port = kDefaultPort;
    std::vector<std::string> uri_path;   // percent-decoded segments
    std::vector<std::string> uri_query;  // percent-decoded, one per Uri-Query option

    friend bool operator==(const ProxyUriParts&, const ProxyUriParts&) = default;
};

ProxyUriParts split_proxy_uri(std::string_view uri);

/// Inverse of split_proxy_uri. The default port is elided and the path
/// always starts with '/'.
std::string compose_uri(const ProxyUriParts& parts);

/// Canonical key for a resource: host lowercased, default port elided.
std::string normalize_uri(std::string_view uri);

/// Absolute URI a request targets, from Proxy-Uri if present, else from the
/// Uri-Host/Uri-Port/Uri-Path/Uri-Query options. Returned normalized.
std::string request_uri(const CoapMessage& req);

/// Turns a forward-proxy request into the request the origin server sees:
/// Proxy-Uri is replaced by Uri-Host/Uri-Port/Uri-Path/Uri-Query, while the
/// header, token, remaining options and payload are kept as they were.
CoapMessage rebuild_origin_request(const CoapMessage& msg);

}  // namespace coapicn::coap
