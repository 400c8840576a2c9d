#include "stackagent/error.hpp"
#include "stackagent/provider.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

namespace stackagent {

namespace {

struct SplitUrl {
    std::string base;
    std::string path;
};

SplitUrl split_url(const std::string& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::ConfigInvalid, "endpoint_url needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient(int status) { return status == 408 || status == 429 || status >= 500; }

} // namespace

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config))
{
    if (config_.api_key.empty()) {
        if (const char* key = std::getenv("STEP_API_KEY")) config_.api_key = key;
    }
    if (config_.attempts < 1) config_.attempts = 1;
    auto parts = split_url(config_.endpoint_url);
    base_ = std::move(parts.base);
    path_ = std::move(parts.path);
}

std::string HttpProvider::request_body(const CompletionRequest& request) const
{
    nlohmann::ordered_json body;
    body["model"] = config_.model_name;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["top_p"] = 1;
    body["n"] = request.n_candidates;
    body["max_tokens"] = request.max_tokens;
    return body.dump();
}

CompletionResult HttpProvider::complete(const CompletionRequest& request)
{
    if (request.temperature < 0) throw std::invalid_argument("temperature must be >= 0");
    if (request.n_candidates < 1) throw std::invalid_argument("n_candidates must be >= 1");

    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const std::string body = request_body(request);
    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (int attempt = 1; attempt <= config_.attempts; ++attempt) {
        auto res = client.Post(path_, headers, body, "application/json");
        if (res && res->status == 200) return parse_chat_completion(res->body);
        if (res) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
            if (!transient(res->status)) break;
        } else {
            last_error = httplib::to_string(res.error());
        }
        if (attempt < config_.attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(ErrorKind::Transport, last_error);
}

} // namespace stackagent
