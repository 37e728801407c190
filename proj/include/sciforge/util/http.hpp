#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sciforge::http {

struct Response {
    bool transport_ok = false;  // false: connection/timeout failure, `error` says why
    int status = 0;
    std::string body;
    std::string error;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// POST a JSON body to an http:// or https:// URL.
Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   int timeout_seconds);

}  // namespace sciforge::http
