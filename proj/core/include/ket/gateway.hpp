#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ket/errors.hpp"

namespace ket {

struct Message {
    std::string role;  // system | user | assistant
    std::string content;
};

struct CompletionRequest {
    std::string model;
    std::vector<Message> messages;
    int max_new_tokens = 300;
    std::optional<double> temperature;
    std::optional<double> top_p;
};

struct CompletionResponse {
    std::string text;
    std::string model;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
    bool empty_content = false;  // endpoint returned empty content
};

struct WrappedPrompt {
    std::vector<Message> messages;
    bool preexisting_markers = false;  // input already contained [INST]
};

// "[INST] " + text + " [/INST]", verbatim, no escaping.
WrappedPrompt wrap_instruction(const std::string& prompt_text);

// One JSONL record per network call, success or failure.
class CallLog {
public:
    explicit CallLog(std::string path) : path_(std::move(path)) {}
    void append(const std::string& endpoint, const std::string& model,
                const std::string& request_hash, int status,
                std::int64_t latency_ms, const std::string& response_text);

private:
    std::string path_;
    std::mutex mu_;
};

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

struct HttpGatewayConfig {
    std::string base_url;   // e.g. http://localhost:8000
    std::string api_key;    // from LLM_API_KEY; never logged
    int max_inflight = 4;
    int retry_max = 5;      // total attempts per call
    int backoff_base_ms = 1000;
    int timeout_ms = 120000;
    std::string log_path;   // empty disables logging
};

// Chat-completions client: POST /v1/chat/completions, reads
// choices[0].message.content. Retries 429/5xx with exponential backoff.
class HttpGateway : public Gateway {
public:
    explicit HttpGateway(HttpGatewayConfig config);
    ~HttpGateway() override;

    CompletionResponse complete(const CompletionRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Fixture-backed gateway for offline runs. Rules are matched against the
// last user message, first match wins; "{last_line}" in a response is
// replaced by the last non-empty line of that message.
class MockGateway : public Gateway {
public:
    struct Rule {
        std::vector<std::string> contains;  // all substrings must be present
        std::string response;
    };

    MockGateway(std::vector<Rule> rules, std::string default_response);
    static MockGateway load(const std::string& fixtures_path);

    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::vector<Rule> rules_;
    std::string default_response_;
};

std::string request_hash(const CompletionRequest& request);

}  // namespace ket
