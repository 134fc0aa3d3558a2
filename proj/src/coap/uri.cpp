#include "coapicn/coap/uri.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "coapicn/error.hpp"

namespace coapicn::coap {

namespace {

constexpr std::string_view kScheme = "coap://";

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string percent_decode(std::string_view in, std::string_view whole)
{
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] != '%') {
            out.push_back(in[i]);
            continue;
        }
        if (i + 2 >= in.size())
            throw Error(Errc::malformed_uri, "truncated percent escape in " + std::string(whole));
        const int hi = hex_value(in[i + 1]);
        const int lo = hex_value(in[i + 2]);
        if (hi < 0 || lo < 0)
            throw Error(Errc::malformed_uri, "bad percent escape in " + std::string(whole));
        out.push_back(static_cast<char>((hi << 4) | lo));
        i += 2;
    }
    return out;
}

bool is_unreserved(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_' || c == '~';
}

bool is_sub_delim(char c)
{
    return std::string_view("!$&'()*+,;=").find(c) != std::string_view::npos;
}

std::string percent_encode(std::string_view in, bool query)
{
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    for (char c : in) {
        bool keep = is_unreserved(c) || c == ':' || c == '@';
        if (query)
            keep = keep || c == '/' || c == '?' || (is_sub_delim(c) && c != '&');
        else
            keep = keep || is_sub_delim(c);
        if (keep) {
            out.push_back(c);
        } else {
            const auto b = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0x0F]);
        }
    }
    return out;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

bool starts_with_scheme(std::string_view uri)
{
    if (uri.size() < kScheme.size())
        return false;
    for (std::size_t i = 0; i < kScheme.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(uri[i])) != kScheme[i])
            return false;
    return true;
}

}  // namespace

ProxyUriParts split_proxy_uri(std::string_view uri)
{
    if (!starts_with_scheme(uri))
        throw Error(Errc::not_a_coap_uri, std::string(uri));
    if (uri.find('#') != std::string_view::npos)
        throw Error(Errc::malformed_uri, "fragment not allowed: " + std::string(uri));

    std::string_view rest = uri.substr(kScheme.size());
    const auto authority_end = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, authority_end);
    rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    ProxyUriParts parts;
    std::string_view host = authority;
    std::string_view port;
    if (!authority.empty() && authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos)
            throw Error(Errc::malformed_uri, "unterminated IP literal: " + std::string(uri));
        host = authority.substr(0, close + 1);
        std::string_view tail = authority.substr(close + 1);
        if (!tail.empty()) {
            if (tail.front() != ':')
                throw Error(Errc::malformed_uri, std::string(uri));
            port = tail.substr(1);
        }
    } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = authority.substr(colon + 1);
    }
    if (host.empty())
        throw Error(Errc::empty_host, std::string(uri));
    if (host.find('@') != std::string_view::npos)
        throw Error(Errc::malformed_uri, "userinfo not allowed: " + std::string(uri));
    parts.uri_host = std::string(host);

    if (!port.empty()) {
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
        if (ec != std::errc{} || ptr != port.data() + port.size() || value > 0xFFFF)
            throw Error(Errc::malformed_uri, "bad port in " + std::string(uri));
        parts.uri_port = static_cast<std::uint16_t>(value);
    }

    std::string_view path = rest;
    std::string_view query;
    if (const auto q = rest.find('?'); q != std::string_view::npos) {
        path = rest.substr(0, q);
        query = rest.substr(q + 1);
    }
    // "/" and "" both mean the root resource (no Uri-Path options).
    if (path.size() > 1) {
        for (auto seg : split(path.substr(1), '/'))
            parts.uri_path.push_back(percent_decode(seg, uri));
    }
    if (!query.empty()) {
        for (auto seg : split(query, '&'))
            parts.uri_query.push_back(percent_decode(seg, uri));
    }
    return parts;
}

std::string compose_uri(const ProxyUriParts& parts)
{
    std::string out(kScheme);
    out += parts.uri_host;
    if (parts.uri_port != kDefaultPort)
        out += ':' + std::to_string(parts.uri_port);
    if (parts.uri_path.empty())
        out += '/';
    for (const auto& seg : parts.uri_path)
        out += '/' + percent_encode(seg, false);
    for (std::size_t i = 0; i < parts.uri_query.size(); ++i)
        out += (i == 0 ? '?' : '&') + percent_encode(parts.uri_query[i], true);
    return out;
}

std::string normalize_uri(std::string_view uri)
{
    ProxyUriParts parts = split_proxy_uri(uri);
    std::transform(parts.uri_host.begin(), parts.uri_host.end(), parts.uri_host.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return compose_uri(parts);
}

std::string request_uri(const CoapMessage& req)
{
    if (const Option* proxy = req.find_option(option::ProxyUri))
        return normalize_uri(std::string_view(reinterpret_cast<const char*>(proxy->value.data()),
                                              proxy->value.size()));

    const auto hosts = req.string_options(option::UriHost);
    if (hosts.empty() || hosts.front().empty())
        throw Error(Errc::malformed_uri, "request has neither Proxy-Uri nor Uri-Host");
    ProxyUriParts parts;
    parts.uri_host = hosts.front();
    std::transform(parts.uri_host.begin(), parts.uri_host.end(), parts.uri_host.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (const Option* port = req.find_option(option::UriPort)) {
        const auto value = decode_uint(port->value);
        if (value > 0xFFFF)
            throw Error(Errc::malformed_uri, "Uri-Port out of range");
        parts.uri_port = static_cast<std::uint16_t>(value);
    }
    parts.uri_path = req.string_options(option::UriPath);
    parts.uri_query = req.string_options(option::UriQuery);
    return compose_uri(parts);
}

CoapMessage rebuild_origin_request(const CoapMessage& msg)
{
    const Option* proxy = msg.find_option(option::ProxyUri);
    if (proxy == nullptr)
        throw Error(Errc::missing_proxy_uri, describe(msg));
    const ProxyUriParts parts =
        split_proxy_uri(std::string_view(reinterpret_cast<const char*>(proxy->value.data()), proxy->value.size()));

    CoapMessage out = msg;
    out.remove_option(option::ProxyUri);
    out.remove_option(option::UriHost);
    out.remove_option(option::UriPort);
    out.remove_option(option::UriPath);
    out.remove_option(option::UriQuery);

    out.add_option(option::UriHost, parts.uri_host);
    if (parts.uri_port != kDefaultPort)
        out.add_uint_option(option::UriPort, parts.uri_port);
    for (const auto& seg : parts.uri_path)
        out.add_option(option::UriPath, seg);
    for (const auto& seg : parts.uri_query)
        out.add_option(option::UriQuery, seg);
    return out;
}

}  // namespace coapicn::coap
