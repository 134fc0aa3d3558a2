#pragma once

#include <cctype>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "coapicn/coap/message.hpp"
#include "coapicn/error.hpp"

namespace coapicn::test {

// Returns the error code thrown by `fn`, or nullopt if it did not throw.
inline std::optional<Errc> error_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline std::string source_path(const std::string& rel)
{
    return std::string(COAPICN_SOURCE_DIR) + "/" + rel;
}

// Reads a hex dump: whitespace-separated octets, '#' starts a comment line.
inline Bytes load_hex(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    Bytes out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream words(line);
        std::string word;
        while (words >> word)
            out.push_back(static_cast<std::uint8_t>(std::stoul(word, nullptr, 16)));
    }
    return out;
}

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t max_len)
{
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> byte(0, 255);
    Bytes out(len(rng));
    for (auto& b : out)
        b = static_cast<std::uint8_t>(byte(rng));
    return out;
}

// A random message satisfying every CoapMessage invariant.
inline coap::CoapMessage random_message(std::mt19937_64& rng)
{
    using namespace coap;
    std::uniform_int_distribution<int> type(0, 3);
    std::uniform_int_distribution<int> code(1, 255);
    std::uniform_int_distribution<int> mid(0, 0xFFFF);
    std::uniform_int_distribution<int> coin(0, 9);

    CoapMessage m;
    m.type = static_cast<MessageType>(type(rng));
    m.message_id = static_cast<std::uint16_t>(mid(rng));
    if (coin(rng) == 0) {
        m.code = code::Empty;
        return m;
    }
    m.code = static_cast<std::uint8_t>(code(rng));
    m.token = random_bytes(rng, kMaxTokenLength);

    std::uniform_int_distribution<int> count(0, 6);
    // Mix of small, one-byte-extended and two-byte-extended option numbers.
    std::uniform_int_distribution<int> small(1, 60);
    std::uniform_int_distribution<int> large(61, 65535);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        const auto number = static_cast<std::uint16_t>(coin(rng) < 8 ? small(rng) : large(rng));
        if (is_non_repeatable(number) && m.has_option(number))
            continue;
        const std::size_t max_len = coin(rng) == 0 ? 400 : 20;
        m.add_option(number, random_bytes(rng, max_len));
    }
    if (coin(rng) < 6) {
        m.payload = random_bytes(rng, 200);
        if (m.payload.empty())
            m.payload.push_back(0x2a);
    }
    return m;
}

}  // namespace coapicn::test
