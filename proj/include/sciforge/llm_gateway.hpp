#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sciforge::llm {

enum class Role { system, user, assistant };
std::string to_string(Role r);
Role parse_role(std::string_view s);

struct Message {
    Role role = Role::user;
    std::string content;
};

struct ChatRequest {
    std::vector<Message> messages;
    double temperature = 0.7;
    int max_output_tokens = 1024;
    std::string model_name;
};

// Throws std::invalid_argument when the request has no user message, an empty
// content, a negative temperature or a non-positive token limit.
void check(const ChatRequest& req);

enum class FinishReason { complete, truncated, error };
std::string to_string(FinishReason r);
FinishReason parse_finish_reason(std::string_view s);

struct Usage {
    long input_tokens = 0;
    long output_tokens = 0;
};

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::complete;
    Usage usage;
};

nlohmann::json canonical_json(const ChatRequest& req);
// SHA-256 over the canonical request: keys sorted, message whitespace collapsed.
std::string request_digest(const ChatRequest& req);

nlohmann::json to_json(const ChatResponse& r);
ChatResponse response_from_json(const nlohmann::json& j);

enum class Mode { record, replay, passthrough };
std::optional<Mode> parse_mode(std::string_view s);

class GatewayError : public std::runtime_error {
public:
    enum class Kind { transport, cache_miss, credentials, protocol, invalid_request };
    GatewayError(Kind kind, const std::string& what, int attempts = 0)
        : std::runtime_error(what), kind_(kind), attempts_(attempts) {}
    Kind kind() const noexcept { return kind_; }
    int attempts() const noexcept { return attempts_; }

private:
    Kind kind_;
    int attempts_;
};

// Append-only JSONL of {digest, request, response}. Later lines win on reload.
class TranscriptStore {
public:
    TranscriptStore() = default;  // in-memory only
    explicit TranscriptStore(std::filesystem::path path);

    std::optional<ChatResponse> find(const std::string& digest) const;
    void put(const ChatRequest& req, const ChatResponse& resp);
    std::size_t size() const;

private:
    std::optional<std::filesystem::path> path_;
    mutable std::mutex mutex_;
    std::map<std::string, ChatResponse> entries_;
};

// One HTTP exchange. Implementations report failures through the result,
// never by throwing.
struct TransportResult {
    bool ok = false;
    bool retryable = false;
    int status = 0;
    std::string body;
    std::string error;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResult post(const std::string& body, const std::string& api_key) = 0;
};

// Messages-array chat completion over http(s).
class HttpTransport final : public Transport {
public:
    HttpTransport(std::string endpoint, int timeout_seconds = 120);
    TransportResult post(const std::string& body, const std::string& api_key) override;

private:
    std::string endpoint_;
    int timeout_seconds_;
};

inline constexpr const char* kApiKeyEnv = "SCIFORGE_LLM_API_KEY";

struct GatewayConfig {
    Mode mode = Mode::passthrough;
    int max_retries = 3;
    std::vector<std::chrono::milliseconds> backoff = {std::chrono::milliseconds(1000),
                                                      std::chrono::milliseconds(2000),
                                                      std::chrono::milliseconds(4000)};
    // Empty: read from SCIFORGE_LLM_API_KEY.
    std::string api_key;
};

nlohmann::json wire_request(const ChatRequest& req);
ChatResponse parse_wire_response(const std::string& body);

struct CompletionResult {
    std::optional<ChatResponse> response;
    std::optional<GatewayError> error;
    bool ok() const noexcept { return response.has_value(); }
};

class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    // `transport` may be null in replay mode.
    Gateway(GatewayConfig config, std::shared_ptr<Transport> transport, std::shared_ptr<TranscriptStore> store);

    ChatResponse complete(const ChatRequest& req);
    // Responses in input order; at most max_in_flight requests outstanding.
    std::vector<CompletionResult> complete_batch(const std::vector<ChatRequest>& reqs, std::size_t max_in_flight);

    Mode mode() const noexcept { return config_.mode; }
    void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }

private:
    ChatResponse call_with_retries(const ChatRequest& req);

    GatewayConfig config_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<TranscriptStore> store_;
    Sleeper sleeper_;
};

// Parses "1000,2000,4000" into a backoff schedule.
std::vector<std::chrono::milliseconds> parse_backoff(std::string_view spec);

}  // namespace sciforge::llm
