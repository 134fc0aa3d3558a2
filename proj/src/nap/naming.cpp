#include "coapicn/nap/naming.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <openssl/sha.h>

#include "coapicn/coap/uri.hpp"
#include "coapicn/error.hpp"

namespace coapicn::nap {

icn::Identifier sha256(std::string_view data)
{
    static_assert(SHA256_DIGEST_LENGTH == icn::kIdentifierLength);
    icn::Identifier out{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
    return out;
}

icn::IcnName fqdn_to_name(std::string_view fqdn)
{
    if (fqdn.empty())
        throw Error(Errc::empty_fqdn);
    std::string lower(fqdn);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return icn::IcnName{sha256("coap-fqdn"), sha256(lower)};
}

icn::IcnName url_to_name(std::string_view url)
{
    return icn::IcnName{sha256("coap-url"), sha256(coap::normalize_uri(url))};
}

icn::IcnName exchange_name(std::string_view node, std::uint64_t serial)
{
    return icn::IcnName{sha256("coap-exchange"), sha256(std::string(node) + "/" + std::to_string(serial))};
}

}  // namespace coapicn::nap
