#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coapicn {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(BytesView b) { return std::string(b.begin(), b.end()); }

std::string to_hex(BytesView b);

}  // namespace coapicn

namespace coapicn::coap {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::size_t kMaxTokenLength = 8;
inline constexpr std::uint8_t kPayloadMarker = 0xFF;
inline constexpr std::uint16_t kDefaultPort = 5683;
// Largest UDP payload over IPv4; block-wise transfer is not supported.
inline constexpr std::size_t kMaxDatagram = 65507;
inline constexpr std::uint32_t kMaxObserveValue = (1u << 24) - 1;

enum class MessageType : std::uint8_t {
    Confirmable = 0,
    NonConfirmable = 1,
    Acknowledgement = 2,
    Reset = 3,
};

std::string_view to_string(MessageType t) noexcept;

/// Code as class.detail packed into one octet (c.dd -> c << 5 | dd).
constexpr std::uint8_t make_code(unsigned cls, unsigned detail) noexcept
{
    return static_cast<std::uint8_t>((cls << 5) | (detail & 0x1F));
}

namespace code {
inline constexpr std::uint8_t Empty = make_code(0, 0);
inline constexpr std::uint8_t Get = make_code(0, 1);
inline constexpr std::uint8_t Post = make_code(0, 2);
inline constexpr std::uint8_t Put = make_code(0, 3);
inline constexpr std::uint8_t Delete = make_code(0, 4);
inline constexpr std::uint8_t Content = make_code(2, 5);
inline constexpr std::uint8_t BadRequest = make_code(4, 0);
inline constexpr std::uint8_t NotFound = make_code(4, 4);
inline constexpr std::uint8_t BadGateway = make_code(5, 2);
}  // namespace code

std::string code_string(std::uint8_t code);

namespace option {
inline constexpr std::uint16_t UriHost = 3;
inline constexpr std::uint16_t Observe = 6;
inline constexpr std::uint16_t UriPort = 7;
inline constexpr std::uint16_t UriPath = 11;
inline constexpr std::uint16_t ContentFormat = 12;
inline constexpr std::uint16_t UriQuery = 15;
inline constexpr std::uint16_t ProxyUri = 35;
}  // namespace option

// Observe option register/deregister values.
inline constexpr std::uint32_t kObserveRegister = 0;
inline constexpr std::uint32_t kObserveDeregister = 1;

/// True for option numbers this implementation interprets.
bool is_known_option(std::uint16_t number) noexcept;
/// Options that may appear at most once in a message.
bool is_non_repeatable(std::uint16_t number) noexcept;
constexpr bool is_critical(std::uint16_t number) noexcept { return (number & 1) != 0; }

struct Option {
    std::uint16_t number = 0;
    Bytes value;

    friend bool operator==(const Option&, const Option&) = default;
};

/// Minimal big-endian uint option encoding (zero encodes as no bytes).
Bytes encode_uint(std::uint32_t v);
std::uint32_t decode_uint(BytesView v);

struct CoapMessage {
    std::uint8_t version = kVersion;
    MessageType type = MessageType::Confirmable;
    std::uint8_t code = code::Empty;
    std::uint16_t message_id = 0;
    Bytes token;
    std::vector<Option> options;  // sorted by number
    Bytes payload;

    friend bool operator==(const CoapMessage&, const CoapMessage&) = default;

    bool is_empty() const noexcept { return code == code::Empty; }
    bool is_request() const noexcept { return code != code::Empty && (code >> 5) == 0; }
    bool is_response() const noexcept { return (code >> 5) >= 2; }
    bool is_error_response() const noexcept { return (code >> 5) >= 4; }

    /// Inserts after any existing options with the same number.
    void add_option(std::uint16_t number, Bytes value);
    void add_option(std::uint16_t number, std::string_view value) { add_option(number, to_bytes(value)); }
    void add_uint_option(std::uint16_t number, std::uint32_t value) { add_option(number, encode_uint(value)); }
    /// Replaces all instances of `number` with a single value.
    void set_option(std::uint16_t number, Bytes value);
    void set_uint_option(std::uint16_t number, std::uint32_t value) { set_option(number, encode_uint(value)); }
    std::size_t remove_option(std::uint16_t number);

    bool has_option(std::uint16_t number) const noexcept;
    const Option* find_option(std::uint16_t number) const noexcept;
    std::vector<std::string> string_options(std::uint16_t number) const;

    /// Observe value, if present. Throws invalid-option-value above 3 bytes.
    std::optional<std::uint32_t> observe() const;
    void set_observe(std::uint32_t value);

    bool is_observe_register() const { return is_request() && code == code::Get && observe() == kObserveRegister; }
    bool is_observe_deregister() const { return is_request() && code == code::Get && observe() == kObserveDeregister; }
};

/// Empty ACK (or RST) for a given message ID.
CoapMessage make_empty(MessageType type, std::uint16_t message_id);

/// One-line human-readable rendering used in logs and traces.
std::string describe(const CoapMessage& m);

}  // namespace coapicn::coap
