#include "coapicn/coap/message.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "coapicn/error.hpp"

namespace coapicn {

std::string to_hex(BytesView b)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (auto byte : b) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0x0F]);
    }
    return out;
}

}  // namespace coapicn

namespace coapicn::coap {

std::string_view to_string(MessageType t) noexcept
{
    switch (t) {
    case MessageType::Confirmable: return "CON";
    case MessageType::NonConfirmable: return "NON";
    case MessageType::Acknowledgement: return "ACK";
    case MessageType::Reset: return "RST";
    }
    return "?";
}

std::string code_string(std::uint8_t code)
{
    std::ostringstream os;
    os << (code >> 5) << '.' << ((code & 0x1F) < 10 ? "0" : "") << (code & 0x1F);
    return os.str();
}

bool is_known_option(std::uint16_t number) noexcept
{
    switch (number) {
    case option::UriHost:
    case option::Observe:
    case option::UriPort:
    case option::UriPath:
    case option::ContentFormat:
    case option::UriQuery:
    case option::ProxyUri:
        return true;
    default:
        return false;
    }
}

bool is_non_repeatable(std::uint16_t number) noexcept
{
    switch (number) {
    case option::UriHost:
    case option::Observe:
    case option::UriPort:
    case option::ContentFormat:
    case option::ProxyUri:
        return true;
    default:
        return false;
    }
}

Bytes encode_uint(std::uint32_t v)
{
    Bytes out;
    while (v != 0) {
        out.insert(out.begin(), static_cast<std::uint8_t>(v & 0xFF));
        v >>= 8;
    }
    return out;
}

std::uint32_t decode_uint(BytesView v)
{
    if (v.size() > 4)
        throw Error(Errc::invalid_option_value, "uint option longer than 4 bytes");
    std::uint32_t out = 0;
    for (auto b : v)
        out = (out << 8) | b;
    return out;
}

void CoapMessage::add_option(std::uint16_t number, Bytes value)
{
    auto pos = std::upper_bound(options.begin(), options.end(), number,
                                [](std::uint16_t n, const Option& o) { return n < o.number; });
    options.insert(pos, Option{number, std::move(value)});
}

void CoapMessage::set_option(std::uint16_t number, Bytes value)
{
    remove_option(number);
    add_option(number, std::move(value));
}

std::size_t CoapMessage::remove_option(std::uint16_t number)
{
    return std::erase_if(options, [number](const Option& o) { return o.number == number; });
}

bool CoapMessage::has_option(std::uint16_t number) const noexcept
{
    return find_option(number) != nullptr;
}

const Option* CoapMessage::find_option(std::uint16_t number) const noexcept
{
    for (const auto& o : options)
        if (o.number == number)
            return &o;
    return nullptr;
}

std::vector<std::string> CoapMessage::string_options(std::uint16_t number) const
{
    std::vector<std::string> out;
    for (const auto& o : options)
        if (o.number == number)
            out.emplace_back(o.value.begin(), o.value.end());
    return out;
}

std::optional<std::uint32_t> CoapMessage::observe() const
{
    const Option* o = find_option(option::Observe);
    if (o == nullptr)
        return std::nullopt;
    if (o->value.size() > 3)
        throw Error(Errc::invalid_option_value, "observe value longer than 3 bytes");
    return decode_uint(o->value);
}

void CoapMessage::set_observe(std::uint32_t value)
{
    if (value > kMaxObserveValue)
        throw Error(Errc::invalid_option_value, "observe value exceeds 24 bits");
    set_uint_option(option::Observe, value);
}

CoapMessage make_empty(MessageType type, std::uint16_t message_id)
{
    CoapMessage m;
    m.type = type;
    m.code = code::Empty;
    m.message_id = message_id;
    return m;
}

std::string describe(const CoapMessage& m)
{
    std::ostringstream os;
    os << to_string(m.type) << ' ' << code_string(m.code) << " mid=" << m.message_id;
    if (!m.token.empty())
        os << " tok=" << to_hex(m.token);
    for (const auto& o : m.options) {
        os << " o" << o.number << '=';
        const bool numeric = o.number == option::Observe || o.number == option::UriPort ||
                             o.number == option::ContentFormat;
        if (numeric && o.value.size() <= 4)
            os << decode_uint(o.value);
        else
            os << std::string(o.value.begin(), o.value.end());
    }
    if (!m.payload.empty())
        os << " len=" << m.payload.size();
    return os.str();
}

}  // namespace coapicn::coap
