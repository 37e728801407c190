#include "sciforge/llm_gateway.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "sciforge/util/http.hpp"
#include "sciforge/util/io.hpp"
#include "sciforge/util/log.hpp"
#include "sciforge/util/text.hpp"

namespace sciforge::llm {

std::string to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw std::invalid_argument("unknown chat role `" + std::string(s) + "`");
}

void check(const ChatRequest& req) {
    bool has_user = false;
    for (const auto& m : req.messages) {
        if (text::trim_view(m.content).empty()) throw std::invalid_argument("chat message with empty content");
        has_user = has_user || m.role == Role::user;
    }
    if (!has_user) throw std::invalid_argument("chat request needs at least one user message");
    if (!(req.temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (req.max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
}

std::string to_string(FinishReason r) {
    switch (r) {
        case FinishReason::complete: return "complete";
        case FinishReason::truncated: return "truncated";
        case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason parse_finish_reason(std::string_view s) {
    if (s == "complete" || s == "stop") return FinishReason::complete;
    if (s == "truncated" || s == "length") return FinishReason::truncated;
    if (s == "error") return FinishReason::error;
    return FinishReason::complete;
}

nlohmann::json canonical_json(const ChatRequest& req) {
    // nlohmann::json keeps object keys sorted.
    nlohmann::json j;
    j["model_name"] = req.model_name;
    j["temperature"] = req.temperature;
    j["max_output_tokens"] = req.max_output_tokens;
    auto msgs = nlohmann::json::array();
    for (const auto& m : req.messages) {
        msgs.push_back({{"role", to_string(m.role)}, {"content", text::collapse_whitespace(m.content)}});
    }
    j["messages"] = std::move(msgs);
    return j;
}

std::string request_digest(const ChatRequest& req) { return io::sha256_hex(canonical_json(req).dump()); }

nlohmann::json to_json(const ChatResponse& r) {
    return {{"content", r.content},
            {"finish_reason", to_string(r.finish_reason)},
            {"usage", {{"input_tokens", r.usage.input_tokens}, {"output_tokens", r.usage.output_tokens}}}};
}

ChatResponse response_from_json(const nlohmann::json& j) {
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    r.finish_reason = parse_finish_reason(j.value("finish_reason", "complete"));
    if (j.contains("usage")) {
        r.usage.input_tokens = j["usage"].value("input_tokens", 0L);
        r.usage.output_tokens = j["usage"].value("output_tokens", 0L);
    }
    return r;
}

std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "record") return Mode::record;
    if (s == "replay") return Mode::replay;
    if (s == "passthrough") return Mode::passthrough;
    return std::nullopt;
}

TranscriptStore::TranscriptStore(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(*path_, std::ios::binary);
    if (!in) return;  // a missing file is an empty store
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim_view(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            entries_[j.at("digest").get<std::string>()] = response_from_json(j.at("response"));
        } catch (const std::exception& e) {
            throw std::runtime_error("transcript " + path_->string() + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
}

std::optional<ChatResponse> TranscriptStore::find(const std::string& digest) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void TranscriptStore::put(const ChatRequest& req, const ChatResponse& resp) {
    const auto digest = request_digest(req);
    nlohmann::json line;
    line["digest"] = digest;
    line["request"] = canonical_json(req);
    line["response"] = to_json(resp);
    std::lock_guard lock(mutex_);
    entries_[digest] = resp;
    if (path_) {
        if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
        std::ofstream out(*path_, std::ios::binary | std::ios::app);
        if (!out) throw std::runtime_error("cannot append to transcript " + path_->string());
        out << line.dump() << '\n';
    }
}

std::size_t TranscriptStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

HttpTransport::HttpTransport(std::string endpoint, int timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {
    if (endpoint_.empty()) throw std::invalid_argument("chat endpoint URL is empty");
}

TransportResult HttpTransport::post(const std::string& body, const std::string& api_key) {
    TransportResult out;
    http::Headers headers;
    if (!api_key.empty()) headers.emplace_back("Authorization", "Bearer " + api_key);
    http::Response res;
    try {
        res = http::post_json(endpoint_, body, headers, timeout_seconds_);
    } catch (const std::exception& e) {
        out.error = e.what();
        return out;
    }
    if (!res.transport_ok) {
        out.retryable = true;
        out.error = res.error;
        return out;
    }
    out.status = res.status;
    out.body = std::move(res.body);
    if (res.status >= 200 && res.status < 300) {
        out.ok = true;
    } else {
        out.retryable = res.status == 429 || res.status >= 500;
        out.error = "HTTP " + std::to_string(res.status);
    }
    return out;
}

nlohmann::json wire_request(const ChatRequest& req) {
    nlohmann::json j;
    j["model"] = req.model_name;
    auto msgs = nlohmann::json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    j["messages"] = std::move(msgs);
    j["temperature"] = req.temperature;
    j["max_tokens"] = req.max_output_tokens;
    return j;
}

ChatResponse parse_wire_response(const std::string& body) {
    const auto j = nlohmann::json::parse(body);
    const auto& choice = j.at("choices").at(0);
    ChatResponse r;
    r.content = choice.at("message").at("content").get<std::string>();
    r.finish_reason = parse_finish_reason(choice.value("finish_reason", "stop"));
    if (j.contains("usage")) {
        r.usage.input_tokens = j["usage"].value("prompt_tokens", 0L);
        r.usage.output_tokens = j["usage"].value("completion_tokens", 0L);
    }
    if (r.content.empty()) r.finish_reason = FinishReason::error;
    return r;
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Transport> transport, std::shared_ptr<TranscriptStore> store)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      store_(store ? std::move(store) : std::make_shared<TranscriptStore>()),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (config_.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (config_.mode != Mode::replay && !transport_) {
        throw std::invalid_argument("a transport is required outside replay mode");
    }
}

ChatResponse Gateway::call_with_retries(const ChatRequest& req) {
    std::string key = config_.api_key;
    if (key.empty()) {
        if (const char* env = std::getenv(kApiKeyEnv)) key = env;
    }
    if (key.empty()) {
        throw GatewayError(GatewayError::Kind::credentials,
                           std::string("no API key configured; set ") + kApiKeyEnv);
    }
    const auto body = wire_request(req).dump();
    const int attempts_allowed = config_.max_retries + 1;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
        auto res = transport_->post(body, key);
        if (res.ok) {
            try {
                return parse_wire_response(res.body);
            } catch (const std::exception& e) {
                throw GatewayError(GatewayError::Kind::protocol,
                                   std::string("unreadable chat response: ") + e.what(), attempt);
            }
        }
        last_error = res.error;
        if (!res.retryable) {
            throw GatewayError(GatewayError::Kind::transport,
                               "chat request failed: " + last_error + " (attempt " + std::to_string(attempt) + ")",
                               attempt);
        }
        if (attempt < attempts_allowed && !config_.backoff.empty()) {
            const auto i = std::min<std::size_t>(static_cast<std::size_t>(attempt - 1), config_.backoff.size() - 1);
            log::warn("llm", "retrying chat request",
                      {{"attempt", std::to_string(attempt)}, {"error", last_error},
                       {"backoff_ms", std::to_string(config_.backoff[i].count())}});
            sleeper_(config_.backoff[i]);
        }
    }
    throw GatewayError(GatewayError::Kind::transport,
                       "chat request failed after " + std::to_string(attempts_allowed) + " attempts: " + last_error,
                       attempts_allowed);
}

ChatResponse Gateway::complete(const ChatRequest& req) {
    try {
        check(req);
    } catch (const std::invalid_argument& e) {
        throw GatewayError(GatewayError::Kind::invalid_request, e.what());
    }
    if (config_.mode == Mode::replay) {
        const auto digest = request_digest(req);
        if (auto hit = store_->find(digest)) return *hit;
        throw GatewayError(GatewayError::Kind::cache_miss, "replay miss: no transcript entry for request digest " + digest);
    }
    auto resp = call_with_retries(req);
    if (config_.mode == Mode::record) store_->put(req, resp);
    return resp;
}

std::vector<CompletionResult> Gateway::complete_batch(const std::vector<ChatRequest>& reqs,
                                                      std::size_t max_in_flight) {
    if (max_in_flight == 0) throw std::invalid_argument("max_in_flight must be >= 1");
    std::vector<CompletionResult> results(reqs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < reqs.size(); i = next++) {
            try {
                results[i].response = complete(reqs[i]);
            } catch (const GatewayError& e) {
                results[i].error = e;
            } catch (const std::exception& e) {
                results[i].error = GatewayError(GatewayError::Kind::protocol, e.what());
            }
        }
    };
    const auto n = std::min(max_in_flight, reqs.size());
    if (n <= 1) {
        worker();
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

std::vector<std::chrono::milliseconds> parse_backoff(std::string_view spec) {
    std::vector<std::chrono::milliseconds> out;
    if (text::trim_view(spec).empty()) return out;
    for (const auto& part : text::split(spec, ',')) {
        const auto v = text::parse_int(part);
        if (!v || *v < 0) throw std::invalid_argument("bad backoff entry `" + part + "`");
        out.emplace_back(*v);
    }
    return out;
}

}  // namespace sciforge::llm
