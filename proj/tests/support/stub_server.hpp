#pragma once

#include <functional>
#include <memory>
#include <string>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace sciforge::testing {

// Local HTTP server on an ephemeral port, serving one POST route.
class StubServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    StubServer(const std::string& route, Handler handler);
    ~StubServer();
    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + route_; }
    int port() const { return port_; }

private:
    httplib::Server server_;
    std::string route_;
    int port_ = 0;
    std::thread thread_;
};

// Deterministic chat-completion body answering a SIG request with `pairs`
// Q/A pairs derived from a hash of the user message.
std::string fake_completion_text(const std::string& user_message, int pairs);
std::string chat_response_body(const std::string& content, const std::string& finish = "stop");
// Handler that answers every chat request with fake_completion_text.
StubServer::Handler fake_chat_handler(int pairs = 2);

}  // namespace sciforge::testing
