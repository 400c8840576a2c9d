#pragma once

#include "stackagent/observation.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace stackagent {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.3;
    int n_candidates = 3;
    int max_tokens = 512;
    /// Name of the policy issuing the call. Routing metadata for scripted
    /// providers; never sent over the wire.
    std::string stream;
};

struct Usage {
    TokenCount prompt_tokens = 0;
    TokenCount completion_tokens = 0;

    Usage& operator+=(const Usage& other)
    {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

struct CompletionResult {
    std::vector<std::string> candidates;
    Usage usage;
};

/// Completion backend. Implementations must tolerate concurrent calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

/// First candidate. Throws std::invalid_argument on an empty result.
const std::string& select_candidate(const CompletionResult& result);

/// Deterministic replies for tests and gold runs.
///
/// Replies are looked up first in pattern rules (first rule whose substring
/// occurs in the prompt), then in the per-stream queue named by
/// request.stream, then in the default queue. Usage is estimated from text
/// length.
class ScriptedProvider : public Provider {
public:
    struct PatternRule {
        std::string contains;
        std::string reply;
        /// Rule is removed after its first use.
        bool once = false;
    };

    ScriptedProvider() = default;
    explicit ScriptedProvider(std::vector<std::string> default_replies);
    ScriptedProvider(ScriptedProvider&& other) noexcept;
    ScriptedProvider& operator=(ScriptedProvider&& other) noexcept;

    void add_reply(const std::string& stream, std::string reply);
    void add_default_reply(std::string reply);
    void add_pattern(PatternRule rule);

    CompletionResult complete(const CompletionRequest& request) override;

    std::size_t calls() const;
    std::size_t remaining() const;

    /// {"streams": {name: [reply...]}, "default": [...], "patterns": [{contains, reply, once}]}
    static ScriptedProvider from_json(std::string_view json_text);
    static ScriptedProvider load(const std::filesystem::path& path);

private:
    struct Script {
        std::map<std::string, std::deque<std::string>, std::less<>> streams;
        std::deque<std::string> fallback;
        std::vector<PatternRule> patterns;
        std::size_t calls = 0;
    };

    mutable std::mutex mutex_;
    Script script_;
};

struct HttpProviderConfig {
    /// Full URL of the chat-completions endpoint.
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string model_name = "gpt-4-turbo-preview";
    /// Read from STEP_API_KEY when empty.
    std::string api_key;
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{120};
};

/// OpenAI-compatible chat-completions client.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    CompletionResult complete(const CompletionRequest& request) override;

    /// Request body for `request`; exposed for inspection.
    std::string request_body(const CompletionRequest& request) const;

    const HttpProviderConfig& config() const { return config_; }

private:
    HttpProviderConfig config_;
    std::string base_;
    std::string path_;
};

/// Parses a chat-completions response body. Throws Error(Transport) when
/// the document has no usable choice.
CompletionResult parse_chat_completion(std::string_view body);

} // namespace stackagent
