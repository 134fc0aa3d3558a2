#include "doctest.h"

#include <random>

#include "coapicn/coap/codec.hpp"
#include "coapicn/coap/uri.hpp"
#include "test_util.hpp"

using namespace coapicn;
using namespace coapicn::coap;
using coapicn::test::error_of;

TEST_CASE("split: host, default port and path")
{
    const ProxyUriParts p = split_proxy_uri("coap://aueb.example.gr/R1");
    CHECK(p.uri_host == "aueb.example.gr");
    CHECK(p.uri_port == 5683);
    CHECK(p.uri_path == std::vector<std::string>{"R1"});
    CHECK(p.uri_query.empty());
}

TEST_CASE("split: explicit port, nested path and query")
{
    const ProxyUriParts p = split_proxy_uri("coap://h:9999/a/b?x=1");
    CHECK(p.uri_host == "h");
    CHECK(p.uri_port == 9999);
    CHECK(p.uri_path == std::vector<std::string>{"a", "b"});
    CHECK(p.uri_query == std::vector<std::string>{"x=1"});
}

TEST_CASE("split: errors")
{
    CHECK(error_of([] { split_proxy_uri("http://h/a"); }) == Errc::not_a_coap_uri);
    CHECK(error_of([] { split_proxy_uri("coap:///a"); }) == Errc::empty_host);
    CHECK(error_of([] { split_proxy_uri("coap://:5683/a"); }) == Errc::empty_host);
    CHECK(error_of([] { split_proxy_uri("coap://h:99999/a"); }) == Errc::malformed_uri);
    CHECK(error_of([] { split_proxy_uri("coap://h:x/a"); }) == Errc::malformed_uri);
    CHECK(error_of([] { split_proxy_uri("coap://h/a#frag"); }) == Errc::malformed_uri);
    CHECK(error_of([] { split_proxy_uri("coap://h/a%2"); }) == Errc::malformed_uri);
}

TEST_CASE("split: percent escapes and IP literals")
{
    const ProxyUriParts p = split_proxy_uri("coap://[::1]:61616/a%2Fb/c%20d?q=%26");
    CHECK(p.uri_host == "[::1]");
    CHECK(p.uri_port == 61616);
    CHECK(p.uri_path == std::vector<std::string>{"a/b", "c d"});
    CHECK(p.uri_query == std::vector<std::string>{"q=&"});
    CHECK(compose_uri(p) == "coap://[::1]:61616/a%2Fb/c%20d?q=%26");
}

TEST_CASE("compose elides the default port")
{
    CHECK(compose_uri(split_proxy_uri("coap://h:5683/a")) == "coap://h/a");
    CHECK(normalize_uri("COAP://Aueb.Example.GR:5683/R1") == "coap://aueb.example.gr/R1");
    CHECK(normalize_uri("coap://h") == "coap://h/");
}

TEST_CASE("property: recomposition equals input")
{
    std::mt19937_64 rng(17);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-._~";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<int> segs(1, 4);
    std::uniform_int_distribution<int> queries(0, 3);
    std::uniform_int_distribution<int> port(0, 65535);
    auto word = [&] {
        std::string s;
        for (int i = len(rng); i > 0; --i)
            s.push_back(alphabet[pick(rng)]);
        return s;
    };
    for (int i = 0; i < 500; ++i) {
        std::string uri = "coap://" + word();
        const int p = port(rng);
        if (p != kDefaultPort && i % 2 == 0)
            uri += ":" + std::to_string(p);
        for (int s = segs(rng); s > 0; --s)
            uri += "/" + word();
        for (int q = queries(rng), k = 0; k < q; ++k)
            uri += (k == 0 ? "?" : "&") + word() + "=" + word();
        REQUIRE(compose_uri(split_proxy_uri(uri)) == uri);
    }
}

namespace {

CoapMessage proxied_get(const std::string& uri)
{
    CoapMessage m;
    m.code = code::Get;
    m.message_id = 0x2222;
    m.token = to_bytes("t1");
    m.set_observe(kObserveRegister);
    m.add_option(option::ProxyUri, uri);
    return m;
}

}  // namespace

TEST_CASE("rebuild_origin_request: Proxy-Uri becomes Uri-* options")
{
    const CoapMessage in = proxied_get("coap://s/R1");
    const CoapMessage out = rebuild_origin_request(in);
    CHECK_FALSE(out.has_option(option::ProxyUri));
    CHECK(out.string_options(option::UriHost) == std::vector<std::string>{"s"});
    CHECK_FALSE(out.has_option(option::UriPort));
    CHECK(out.string_options(option::UriPath) == std::vector<std::string>{"R1"});
    CHECK(out.token == in.token);
    CHECK(out.message_id == in.message_id);
    CHECK(out.type == in.type);
    CHECK(out.code == in.code);
    CHECK(out.observe() == kObserveRegister);
}

TEST_CASE("rebuild_origin_request: non-default port and query")
{
    const CoapMessage out = rebuild_origin_request(proxied_get("coap://h:9999/a/b?x=1&y"));
    CHECK(out.find_option(option::UriPort)->value == encode_uint(9999));
    CHECK(out.string_options(option::UriPath) == std::vector<std::string>{"a", "b"});
    CHECK(out.string_options(option::UriQuery) == std::vector<std::string>{"x=1", "y"});
    CHECK(request_uri(out) == "coap://h:9999/a/b?x=1&y");
}

TEST_CASE("rebuild_origin_request: missing Proxy-Uri")
{
    CoapMessage m = proxied_get("coap://s/R1");
    m.remove_option(option::ProxyUri);
    CHECK(error_of([&] { rebuild_origin_request(m); }) == Errc::missing_proxy_uri);
}

TEST_CASE("rebuild_origin_request keeps the four header octets")
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> mid(0, 0xFFFF);
    std::uniform_int_distribution<int> type(0, 1);
    for (int i = 0; i < 200; ++i) {
        CoapMessage m = proxied_get("coap://srv.example/r" + std::to_string(i) + "?k=" + std::to_string(i));
        m.message_id = static_cast<std::uint16_t>(mid(rng));
        m.type = static_cast<MessageType>(type(rng));
        m.token = test::random_bytes(rng, kMaxTokenLength);
        const Bytes before = encode(m);
        const Bytes after = encode(rebuild_origin_request(m));
        REQUIRE(std::equal(before.begin(), before.begin() + 4, after.begin()));
        // Token follows the header unchanged.
        REQUIRE(std::equal(before.begin() + 4, before.begin() + 4 + static_cast<long>(m.token.size()),
                           after.begin() + 4));
    }
}

TEST_CASE("request_uri from Uri-Host options matches the Proxy-Uri form")
{
    const CoapMessage proxied = proxied_get("coap://Aueb.Example.gr/R1");
    CHECK(request_uri(proxied) == "coap://aueb.example.gr/R1");
    CHECK(request_uri(rebuild_origin_request(proxied)) == "coap://aueb.example.gr/R1");

    CoapMessage bare;
    bare.code = code::Get;
    bare.add_option(option::UriPath, "R1");
    CHECK(error_of([&] { request_uri(bare); }) == Errc::malformed_uri);
}
