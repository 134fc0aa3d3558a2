#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

namespace coapicn::icn {

inline constexpr std::size_t kIdentifierLength = 32;

using Identifier = std::array<std::uint8_t, kIdentifierLength>;

// A (scope, rendezvous) identifier pair. Both halves are flat and opaque.
struct IcnName {
    Identifier scope_id{};
    Identifier rendezvous_id{};

    friend auto operator<=>(const IcnName&, const IcnName&) = default;
    friend bool operator==(const IcnName&, const IcnName&) = default;
};

std::string to_hex(const Identifier& id);

// "<sid hex>/<rid hex>"
std::string to_string(const IcnName& name);

}  // namespace coapicn::icn
