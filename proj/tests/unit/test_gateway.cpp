#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ket/gateway.hpp"

using namespace ket;

namespace {

// Local chat-completions stand-in; handler decides status/body per call.
struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        thread.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

std::string ok_body(const std::string& content) {
    nlohmann::json doc;
    doc["model"] = "test-model";
    doc["choices"] = {{{"message", {{"role", "assistant"},
                                    {"content", content}}}}};
    doc["usage"] = {{"prompt_tokens", 7}, {"completion_tokens", 3}};
    return doc.dump();
}

CompletionRequest simple_request(const std::string& text) {
    CompletionRequest req;
    req.model = "test-model";
    req.messages = {{"user", text}};
    return req;
}

}  // namespace

TEST_CASE("wrap_instruction brackets the text verbatim") {
    auto w = wrap_instruction("Tell me a story.");
    REQUIRE(w.messages.size() == 1);
    CHECK(w.messages[0].role == "user");
    CHECK(w.messages[0].content == "[INST] Tell me a story. [/INST]");
    CHECK_FALSE(w.preexisting_markers);

    auto nested = wrap_instruction("already [INST] marked [/INST]");
    CHECK(nested.preexisting_markers);
    CHECK(nested.messages[0].content ==
          "[INST] already [INST] marked [/INST] [/INST]");

    CHECK_THROWS_AS(wrap_instruction(""), InputEmpty);
}

TEST_CASE("mock gateway matches rules in order against the last user message") {
    MockGateway gw(
        {
            {{"alpha", "beta"}, "both"},
            {{"alpha"}, "just alpha"},
        },
        "fallback");

    CHECK(gw.complete(simple_request("alpha and beta here")).text == "both");
    CHECK(gw.complete(simple_request("alpha only")).text == "just alpha");
    CHECK(gw.complete(simple_request("nothing matches")).text == "fallback");

    CompletionRequest multi;
    multi.model = "m";
    multi.messages = {{"user", "alpha beta"}, {"assistant", "hi"},
                      {"user", "plain"}};
    CHECK(gw.complete(multi).text == "fallback");  // only the last user turn
}

TEST_CASE("mock gateway expands {last_line}") {
    MockGateway gw({{{"rewrite"}, "Done: {last_line}"}}, "");
    auto res = gw.complete(simple_request("rewrite the following\n\nfinal line\n"));
    CHECK(res.text == "Done: final line");
}

TEST_CASE("mock gateway loads fixture files") {
    auto gw = MockGateway::load(std::string(KET_FIXTURES_DIR) +
                                "/mock_fixtures.json");
    auto res = gw.complete(simple_request("[INST] What of the keep? [/INST]"));
    CHECK(res.text.rfind("The chronicle answers:", 0) == 0);
    CHECK(gw.complete(simple_request("???")).text == "I have nothing to add.");
    CHECK_THROWS_AS(MockGateway::load("/nonexistent/fixtures.json"),
                    FormatError);
}

TEST_CASE("http gateway round-trips a completion") {
    std::string seen_auth, seen_body;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        res.set_content(ok_body("hello back"), "application/json");
    });

    HttpGatewayConfig cfg;
    cfg.base_url = server.url();
    cfg.api_key = "secret-key";
    cfg.backoff_base_ms = 1;
    HttpGateway gw(cfg);

    auto res = gw.complete(simple_request("hello"));
    CHECK(res.text == "hello back");
    CHECK(res.model == "test-model");
    CHECK(res.prompt_tokens == 7);
    CHECK(res.completion_tokens == 3);
    CHECK(seen_auth == "Bearer secret-key");

    auto body = nlohmann::json::parse(seen_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"][0]["content"] == "hello");
}

TEST_CASE("http gateway retries 429 and 5xx, then succeeds") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        int n = ++calls;
        if (n <= 3) {
            res.status = (n == 2) ? 503 : 429;
            res.set_content("busy", "text/plain");
        } else {
            res.set_content(ok_body("finally"), "application/json");
        }
    });

    HttpGatewayConfig cfg;
    cfg.base_url = server.url();
    cfg.retry_max = 5;
    cfg.backoff_base_ms = 1;
    HttpGateway gw(cfg);

    CHECK(gw.complete(simple_request("try")).text == "finally");
    CHECK(calls.load() == 4);
}

TEST_CASE("http gateway gives up after retry_max attempts") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 500;
    });

    HttpGatewayConfig cfg;
    cfg.base_url = server.url();
    cfg.retry_max = 3;
    cfg.backoff_base_ms = 1;
    HttpGateway gw(cfg);

    CHECK_THROWS_AS(gw.complete(simple_request("x")), GatewayError);
    CHECK(calls.load() == 3);
}

TEST_CASE("http gateway does not retry client errors") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
    });

    HttpGatewayConfig cfg;
    cfg.base_url = server.url();
    cfg.retry_max = 5;
    cfg.backoff_base_ms = 1;
    HttpGateway gw(cfg);

    CHECK_THROWS_AS(gw.complete(simple_request("x")), GatewayError);
    CHECK(calls.load() == 1);
}

TEST_CASE("http gateway rejects malformed success bodies") {
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"choices\": []}", "application/json");
    });

    HttpGatewayConfig cfg;
    cfg.base_url = server.url();
    cfg.backoff_base_ms = 1;
    HttpGateway gw(cfg);
    CHECK_THROWS_AS(gw.complete(simple_request("x")), ProtocolError);
}

TEST_CASE("call log captures every attempt without the api key") {
    auto log_path = (std::filesystem::temp_directory_path() /
                     "ket_gateway_log.jsonl")
                        .string();
    std::remove(log_path.c_str());

    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++calls == 1) {
            res.status = 429;
        } else {
            res.set_content(ok_body("logged"), "application/json");
        }
    });

    HttpGatewayConfig cfg;
    cfg.base_url = server.url();
    cfg.api_key = "super-secret-token";
    cfg.backoff_base_ms = 1;
    cfg.log_path = log_path;
    HttpGateway gw(cfg);
    gw.complete(simple_request("log me"));

    std::ifstream in(log_path);
    std::string line;
    std::vector<nlohmann::json> records;
    std::string whole;
    while (std::getline(in, line)) {
        whole += line;
        records.push_back(nlohmann::json::parse(line));
    }
    REQUIRE(records.size() == 2);
    CHECK(records[0]["status"] == 429);
    CHECK(records[1]["status"] == 200);
    CHECK(records[1]["response_text"] == "logged");
    CHECK(records[0]["request_hash"] == records[1]["request_hash"]);
    CHECK(whole.find("super-secret-token") == std::string::npos);
    std::remove(log_path.c_str());
}

TEST_CASE("gateway configuration errors") {
    CHECK_THROWS_AS(HttpGateway(HttpGatewayConfig{}), ConfigError);

    HttpGatewayConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    HttpGateway gw(cfg);
    CHECK_THROWS_AS(gw.complete(CompletionRequest{}), InputEmpty);

    auto bad = simple_request("x");
    bad.max_new_tokens = 0;
    CHECK_THROWS_AS(gw.complete(bad), ConfigError);
}

TEST_CASE("request_hash is stable and content-sensitive") {
    auto a = request_hash(simple_request("same"));
    auto b = request_hash(simple_request("same"));
    auto c = request_hash(simple_request("different"));
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 16);
}
