#include "ket/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ket/hash.hpp"

namespace ket {

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string last_user_content(const CompletionRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend();
         ++it) {
        if (it->role == "user") return it->content;
    }
    return request.messages.empty() ? std::string()
                                    : request.messages.back().content;
}

}  // namespace

WrappedPrompt wrap_instruction(const std::string& prompt_text) {
    if (prompt_text.empty()) {
        throw InputEmpty("cannot wrap an empty prompt");
    }
    WrappedPrompt w;
    // No escaping: preexisting markers are wrapped verbatim and flagged.
    w.preexisting_markers = prompt_text.find("[INST]") != std::string::npos;
    w.messages = {{"user", "[INST] " + prompt_text + " [/INST]"}};
    return w;
}

std::string request_hash(const CompletionRequest& request) {
    nlohmann::ordered_json j;
    j["model"] = request.model;
    j["max_new_tokens"] = request.max_new_tokens;
    auto msgs = nlohmann::ordered_json::array();
    for (const auto& m : request.messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    j["messages"] = std::move(msgs);
    if (request.temperature) j["temperature"] = *request.temperature;
    if (request.top_p) j["top_p"] = *request.top_p;
    return hash_hex(j.dump());
}

void CallLog::append(const std::string& endpoint, const std::string& model,
                     const std::string& req_hash, int status,
                     std::int64_t latency_ms,
                     const std::string& response_text) {
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) return;  // logging must not take the pipeline down
    nlohmann::ordered_json rec;
    rec["ts"] = now_ms();
    rec["endpoint"] = endpoint;
    rec["model"] = model;
    rec["request_hash"] = req_hash;
    rec["status"] = status;
    rec["latency_ms"] = latency_ms;
    rec["response_text"] = response_text;
    out << rec.dump() << "\n";
}

struct HttpGateway::Impl {
    HttpGatewayConfig config;
    std::unique_ptr<CallLog> log;

    std::mutex mu;
    std::condition_variable cv;
    int inflight = 0;

    struct Slot {
        Impl& impl;
        explicit Slot(Impl& i) : impl(i) {
            std::unique_lock lock(impl.mu);
            impl.cv.wait(lock, [&] {
                return impl.inflight < impl.config.max_inflight;
            });
            ++impl.inflight;
        }
        ~Slot() {
            {
                std::lock_guard lock(impl.mu);
                --impl.inflight;
            }
            impl.cv.notify_one();
        }
    };
};

HttpGateway::HttpGateway(HttpGatewayConfig config)
    : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    if (impl_->config.base_url.empty()) {
        throw ConfigError("gateway base URL not configured (LLM_BASE_URL)");
    }
    if (!impl_->config.log_path.empty()) {
        impl_->log = std::make_unique<CallLog>(impl_->config.log_path);
    }
}

HttpGateway::~HttpGateway() = default;

CompletionResponse HttpGateway::complete(const CompletionRequest& request) {
    if (request.messages.empty()) {
        throw InputEmpty("completion request has no messages");
    }
    if (request.max_new_tokens < 1) {
        throw ConfigError("max_new_tokens must be >= 1");
    }
    const auto& cfg = impl_->config;
    Impl::Slot slot(*impl_);

    nlohmann::ordered_json body;
    body["model"] = request.model;
    auto msgs = nlohmann::ordered_json::array();
    for (const auto& m : request.messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["max_tokens"] = request.max_new_tokens;
    if (request.temperature) body["temperature"] = *request.temperature;
    if (request.top_p) body["top_p"] = *request.top_p;
    const std::string payload = body.dump();
    const std::string req_hash = request_hash(request);

    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_ms / 1000,
                                  (cfg.timeout_ms % 1000) * 1000);
    client.set_read_timeout(cfg.timeout_ms / 1000,
                            (cfg.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!cfg.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + cfg.api_key);
    }

    int last_status = 0;
    for (int attempt = 1; attempt <= cfg.retry_max; ++attempt) {
        auto t0 = std::chrono::steady_clock::now();
        auto res = client.Post("/v1/chat/completions", headers, payload,
                               "application/json");
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
        last_status = res ? res->status : 0;

        if (res && res->status == 200) {
            CompletionResponse out;
            try {
                auto doc = nlohmann::json::parse(res->body);
                out.text = doc.at("choices").at(0).at("message")
                               .at("content").get<std::string>();
                out.model = doc.value("model", request.model);
                if (doc.contains("usage")) {
                    out.prompt_tokens =
                        doc["usage"].value("prompt_tokens", std::int64_t{0});
                    out.completion_tokens = doc["usage"].value(
                        "completion_tokens", std::int64_t{0});
                }
            } catch (const nlohmann::json::exception& e) {
                if (impl_->log) {
                    impl_->log->append(cfg.base_url, request.model, req_hash,
                                       res->status, latency, res->body);
                }
                throw ProtocolError("malformed completion body: " +
                                    std::string(e.what()));
            }
            out.latency_ms = latency;
            out.empty_content = out.text.empty();
            if (impl_->log) {
                impl_->log->append(cfg.base_url, request.model, req_hash, 200,
                                   latency, out.text);
            }
            return out;
        }

        if (impl_->log) {
            impl_->log->append(cfg.base_url, request.model, req_hash,
                               last_status, latency,
                               res ? res->body : "transport error");
        }

        bool retryable =
            !res || res->status == 429 || res->status >= 500;
        if (!retryable || attempt == cfg.retry_max) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(
            cfg.backoff_base_ms * (1LL << (attempt - 1))));
    }
    throw GatewayError("endpoint " + cfg.base_url + " failed after " +
                       std::to_string(cfg.retry_max) +
                       " attempts (last status " +
                       std::to_string(last_status) + ")");
}

MockGateway::MockGateway(std::vector<Rule> rules, std::string default_response)
    : rules_(std::move(rules)),
      default_response_(std::move(default_response)) {}

MockGateway MockGateway::load(const std::string& fixtures_path) {
    std::ifstream in(fixtures_path, std::ios::binary);
    if (!in) throw FormatError("cannot read fixtures: " + fixtures_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("fixtures " + fixtures_path + ": " + e.what());
    }
    std::vector<Rule> rules;
    for (const auto& r : doc.value("rules", nlohmann::json::array())) {
        Rule rule;
        if (r.at("contains").is_array()) {
            rule.contains = r.at("contains").get<std::vector<std::string>>();
        } else {
            rule.contains = {r.at("contains").get<std::string>()};
        }
        rule.response = r.at("response").get<std::string>();
        rules.push_back(std::move(rule));
    }
    return MockGateway(std::move(rules), doc.value("default", ""));
}

CompletionResponse MockGateway::complete(const CompletionRequest& request) {
    if (request.messages.empty()) {
        throw InputEmpty("completion request has no messages");
    }
    const std::string content = last_user_content(request);
    std::string response = default_response_;
    for (const auto& rule : rules_) {
        bool all = true;
        for (const auto& needle : rule.contains) {
            if (content.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) {
            response = rule.response;
            break;
        }
    }
    // "{last_line}" expands to the last non-empty line of the user message.
    auto pos = response.find("{last_line}");
    if (pos != std::string::npos) {
        std::string last_line;
        std::istringstream lines(content);
        for (std::string line; std::getline(lines, line);) {
            if (!line.empty()) last_line = line;
        }
        response.replace(pos, std::string("{last_line}").size(), last_line);
    }
    CompletionResponse out;
    out.text = response;
    out.model = request.model;
    out.empty_content = out.text.empty();
    return out;
}

}  // namespace ket
