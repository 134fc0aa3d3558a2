#pragma once

#include <string_view>

#include "coapicn/icn/name.hpp"

namespace coapicn::nap {

icn::Identifier sha256(std::string_view data);

/// Name a server is reached under: SId = H("coap-fqdn"), RId = H(fqdn),
/// with the FQDN lowercased first. Throws empty-fqdn.
icn::IcnName fqdn_to_name(std::string_view fqdn);

/// Name responses for a resource are published under: SId = H("coap-url"),
/// RId = H(normalized URL). Throws the URI parser's errors.
icn::IcnName url_to_name(std::string_view url);

/// Reply name of a single request/response exchange opened by `node`.
icn::IcnName exchange_name(std::string_view node, std::uint64_t serial);

}  // namespace coapicn::nap
