#include "coapicn/coap/codec.hpp"

#include "coapicn/error.hpp"

namespace coapicn::coap {

namespace {

// Option delta and length share the same nibble + extension scheme.
void split_extended(std::uint32_t value, std::uint8_t& nibble, Bytes& ext)
{
    if (value < 13) {
        nibble = static_cast<std::uint8_t>(value);
    } else if (value < 269) {
        nibble = 13;
        ext.push_back(static_cast<std::uint8_t>(value - 13));
    } else {
        nibble = 14;
        const std::uint32_t v = value - 269;
        ext.push_back(static_cast<std::uint8_t>(v >> 8));
        ext.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
}

class Reader {
public:
    explicit Reader(BytesView wire) : wire_(wire) {}

    std::size_t remaining() const { return wire_.size() - pos_; }
    bool done() const { return pos_ == wire_.size(); }
    std::uint8_t peek() const { return wire_[pos_]; }

    std::uint8_t u8()
    {
        need(1);
        return wire_[pos_++];
    }

    std::uint16_t u16()
    {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>((wire_[pos_] << 8) | wire_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    Bytes take(std::size_t n)
    {
        need(n);
        Bytes out(wire_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  wire_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

    std::uint32_t extended(std::uint8_t nibble, Errc on_reserved)
    {
        if (nibble < 13)
            return nibble;
        if (nibble == 13)
            return 13u + u8();
        if (nibble == 14)
            return 269u + u16();
        throw Error(on_reserved, "reserved nibble 15");
    }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n)
            throw Error(Errc::truncated_message, "need " + std::to_string(n) + " more bytes");
    }

    BytesView wire_;
    std::size_t pos_ = 0;
};

}  // namespace

Bytes encode(const CoapMessage& msg)
{
    if (msg.version != kVersion)
        throw Error(Errc::bad_version, std::to_string(msg.version));
    if (msg.token.size() > kMaxTokenLength)
        throw Error(Errc::invalid_token_length, std::to_string(msg.token.size()) + " bytes");
    if (msg.is_empty() && (!msg.token.empty() || !msg.options.empty() || !msg.payload.empty()))
        throw Error(Errc::malformed_empty, "empty message carries data");

    Bytes out;
    out.reserve(kHeaderSize + msg.token.size() + msg.payload.size() + 16);
    out.push_back(static_cast<std::uint8_t>((msg.version << 6) | (static_cast<std::uint8_t>(msg.type) << 4) |
                                            msg.token.size()));
    out.push_back(msg.code);
    out.push_back(static_cast<std::uint8_t>(msg.message_id >> 8));
    out.push_back(static_cast<std::uint8_t>(msg.message_id & 0xFF));
    out.insert(out.end(), msg.token.begin(), msg.token.end());

    std::uint32_t previous = 0;
    for (std::size_t i = 0; i < msg.options.size(); ++i) {
        const Option& opt = msg.options[i];
        if (opt.number < previous)
            throw Error(Errc::unsorted_options, "option " + std::to_string(opt.number) + " after " +
                                                    std::to_string(previous));
        if (i > 0 && opt.number == previous && is_non_repeatable(opt.number))
            throw Error(Errc::duplicate_option, "option " + std::to_string(opt.number));
        if (opt.value.size() > 0xFFFF + 269u)
            throw Error(Errc::message_too_large, "option value too long");

        std::uint8_t delta_nibble = 0;
        std::uint8_t length_nibble = 0;
        Bytes delta_ext;
        Bytes length_ext;
        split_extended(opt.number - previous, delta_nibble, delta_ext);
        split_extended(static_cast<std::uint32_t>(opt.value.size()), length_nibble, length_ext);
        out.push_back(static_cast<std::uint8_t>((delta_nibble << 4) | length_nibble));
        out.insert(out.end(), delta_ext.begin(), delta_ext.end());
        out.insert(out.end(), length_ext.begin(), length_ext.end());
        out.insert(out.end(), opt.value.begin(), opt.value.end());
        previous = opt.number;
    }

    if (!msg.payload.empty()) {
        out.push_back(kPayloadMarker);
        out.insert(out.end(), msg.payload.begin(), msg.payload.end());
    }
    if (out.size() > kMaxDatagram)
        throw Error(Errc::message_too_large, std::to_string(out.size()) + " bytes");
    return out;
}

CoapMessage decode(BytesView wire, DecodeWarnings* warnings)
{
    if (wire.size() < kHeaderSize)
        throw Error(Errc::truncated_message, std::to_string(wire.size()) + " bytes, header needs 4");
    if (wire.size() > kMaxDatagram)
        throw Error(Errc::message_too_large, std::to_string(wire.size()) + " bytes");

    Reader in(wire);
    CoapMessage msg;
    const std::uint8_t first = in.u8();
    msg.version = first >> 6;
    if (msg.version != kVersion)
        throw Error(Errc::bad_version, std::to_string(msg.version));
    msg.type = static_cast<MessageType>((first >> 4) & 0x03);
    const std::size_t tkl = first & 0x0F;
    if (tkl > kMaxTokenLength)
        throw Error(Errc::invalid_token_length, std::to_string(tkl));
    msg.code = in.u8();
    msg.message_id = in.u16();

    if (msg.is_empty()) {
        if (tkl != 0 || !in.done())
            throw Error(Errc::malformed_empty, "empty message carries data");
        return msg;
    }

    msg.token = in.take(tkl);

    std::uint32_t number = 0;
    while (!in.done()) {
        const std::uint8_t head = in.u8();
        if (head == kPayloadMarker) {
            if (in.done())
                throw Error(Errc::malformed_payload, "payload marker without payload");
            msg.payload = in.take(in.remaining());
            break;
        }
        number += in.extended(head >> 4, Errc::malformed_option_delta);
        const std::uint32_t length = in.extended(head & 0x0F, Errc::malformed_option_length);
        if (number > 0xFFFF)
            throw Error(Errc::malformed_option_delta, "option number " + std::to_string(number));
        Option opt{static_cast<std::uint16_t>(number), in.take(length)};
        if (!msg.options.empty() && msg.options.back().number == opt.number && is_non_repeatable(opt.number))
            throw Error(Errc::duplicate_option, "option " + std::to_string(opt.number));
        if (warnings != nullptr && is_critical(opt.number) && !is_known_option(opt.number))
            warnings->unknown_critical.push_back(opt.number);
        msg.options.push_back(std::move(opt));
    }
    return msg;
}

}  // namespace coapicn::coap
