#include "sciforge/util/http.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <stdexcept>

namespace sciforge::http {
namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("URL without scheme: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw std::invalid_argument("unsupported URL scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   int timeout_seconds) {
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);

    Response out;
    auto res = client.Post(parts.path, h, body, "application/json");
    if (!res) {
        out.error = httplib::to_string(res.error());
        return out;
    }
    out.transport_ok = true;
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace sciforge::http
