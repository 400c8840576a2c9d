#include "stackagent/error.hpp"
#include "stackagent/provider.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <thread>

using namespace stackagent;

namespace {

// Chat-completions stub that fails the first `failures` requests with `status`.
class Stub {
public:
    Stub(int failures, int status) : failures_(failures), status_(status)
    {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            if (hits_++ < failures_) {
                res.status = status_;
                res.set_content("{\"error\": \"busy\"}", "application/json");
                return;
            }
            res.set_content(R"({"choices": [{"message": {"content": "  ACTION:\nclick [1]\n"}},
                                               {"message": {"content": "stop []"}}],
                                  "usage": {"prompt_tokens": 11, "completion_tokens": 7}})",
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~Stub()
    {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    int hits() const { return hits_; }

    std::string last_body;
    std::string last_auth;

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    int failures_;
    int status_;
};

HttpProviderConfig config_for(const Stub& stub)
{
    HttpProviderConfig c;
    c.endpoint_url = stub.url();
    c.api_key = "test-key";
    c.initial_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::seconds(5);
    return c;
}

} // namespace

TEST_SUITE("provider")
{
    TEST_CASE("scripted routing: patterns, streams, default")
    {
        ScriptedProvider p;
        p.add_reply("a", "a1");
        p.add_reply("a", "a2");
        p.add_default_reply("d1");
        p.add_pattern({"MAGIC", "m", true});
        CHECK(p.remaining() == 3);
        CHECK(select_candidate(p.complete({"x MAGIC", 0.3, 3, 512, "a"})) == "m");
        CHECK(select_candidate(p.complete({"x MAGIC", 0.3, 3, 512, "a"})) == "a1");
        CHECK(select_candidate(p.complete({"x", 0.3, 3, 512, "b"})) == "d1");
        CHECK(select_candidate(p.complete({"x", 0.3, 3, 512, "a"})) == "a2");
        CHECK(p.calls() == 4);
        try {
            p.complete({"x", 0.3, 3, 512, "a"});
            FAIL("expected exhaustion");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ScriptExhausted);
        }
    }

    TEST_CASE("scripted usage is estimated from text")
    {
        ScriptedProvider p({"12345"});
        auto r = p.complete({std::string(41, 'p'), 0.3, 3, 512, ""});
        CHECK(r.usage.prompt_tokens == 11);
        CHECK(r.usage.completion_tokens == 2);
    }

    TEST_CASE("scripted provider from JSON")
    {
        auto p = ScriptedProvider::from_json(
            R"({"streams": {"s": ["one"]}, "default": ["two"], "patterns": [{"contains": "k", "reply": "three"}]})");
        CHECK(select_candidate(p.complete({"k", 0.3, 3, 512, "s"})) == "three");
        CHECK(select_candidate(p.complete({"k", 0.3, 3, 512, "s"})) == "three");
        CHECK(select_candidate(p.complete({"z", 0.3, 3, 512, "s"})) == "one");
        CHECK(select_candidate(p.complete({"z", 0.3, 3, 512, "s"})) == "two");
        CHECK_THROWS_AS(ScriptedProvider::from_json("{\"default\": [1]}"), Error);
    }

    TEST_CASE("select_candidate on an empty result")
    {
        CHECK_THROWS_AS(select_candidate(CompletionResult{}), std::invalid_argument);
    }

    TEST_CASE("request body")
    {
        HttpProviderConfig c;
        c.model_name = "m";
        HttpProvider p(c);
        const auto body = nlohmann::json::parse(p.request_body({"hello", 0.3, 3, 512, "stream-name"}));
        CHECK(body.at("model") == "m");
        CHECK(body.at("messages").size() == 1);
        CHECK(body.at("messages")[0].at("role") == "user");
        CHECK(body.at("messages")[0].at("content") == "hello");
        CHECK(body.at("temperature").get<double>() == doctest::Approx(0.3));
        CHECK(body.at("n") == 3);
        CHECK(body.at("max_tokens") == 512);
        CHECK(body.dump().find("stream-name") == std::string::npos);
    }

    TEST_CASE("response parsing")
    {
        auto r = parse_chat_completion(R"({"choices": [{"message": {"content": " a "}}], "usage": {"prompt_tokens": 3}})");
        CHECK(r.candidates == std::vector<std::string>{"a"});
        CHECK(r.usage.prompt_tokens == 3);
        CHECK(r.usage.completion_tokens == 0);
        CHECK_THROWS_AS(parse_chat_completion("{\"choices\": []}"), Error);
        CHECK_THROWS_AS(parse_chat_completion("<html>"), Error);
    }

    TEST_CASE("http success")
    {
        Stub stub(0, 500);
        HttpProvider p(config_for(stub));
        auto r = p.complete({"prompt text", 0.3, 3, 64, "x"});
        REQUIRE(r.candidates.size() == 2);
        CHECK(select_candidate(r) == "ACTION:\nclick [1]");
        CHECK(r.usage == Usage{11, 7});
        CHECK(stub.last_auth == "Bearer test-key");
        CHECK(nlohmann::json::parse(stub.last_body).at("max_tokens") == 64);
    }

    TEST_CASE("http retries transient failures")
    {
        Stub stub(2, 503);
        HttpProvider p(config_for(stub));
        CHECK(select_candidate(p.complete({"p", 0.3, 3, 64, ""})) == "ACTION:\nclick [1]");
        CHECK(stub.hits() == 3);
    }

    TEST_CASE("http gives up after the configured attempts")
    {
        Stub stub(5, 429);
        HttpProvider p(config_for(stub));
        try {
            p.complete({"p", 0.3, 3, 64, ""});
            FAIL("expected transport error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Transport);
        }
        CHECK(stub.hits() == 3);
    }

    TEST_CASE("http does not retry client errors")
    {
        Stub stub(5, 400);
        HttpProvider p(config_for(stub));
        CHECK_THROWS_AS(p.complete({"p", 0.3, 3, 64, ""}), Error);
        CHECK(stub.hits() == 1);
    }

    TEST_CASE("http rejects invalid sampling")
    {
        HttpProvider p(HttpProviderConfig{});
        CHECK_THROWS_AS(p.complete({"p", -1.0, 3, 64, ""}), std::invalid_argument);
        CHECK_THROWS_AS(p.complete({"p", 0.3, 0, 64, ""}), std::invalid_argument);
    }
}
