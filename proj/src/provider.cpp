#include "stackagent/provider.hpp"

#include "stackagent/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stackagent {

const std::string& select_candidate(const CompletionResult& result)
{
    if (result.candidates.empty()) throw std::invalid_argument("select_candidate: no candidates");
    return result.candidates.front();
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> default_replies)
{
    script_.fallback.assign(default_replies.begin(), default_replies.end());
}

ScriptedProvider::ScriptedProvider(ScriptedProvider&& other) noexcept
{
    std::lock_guard lock(other.mutex_);
    script_ = std::move(other.script_);
}

ScriptedProvider& ScriptedProvider::operator=(ScriptedProvider&& other) noexcept
{
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        script_ = std::move(other.script_);
    }
    return *this;
}

void ScriptedProvider::add_reply(const std::string& stream, std::string reply)
{
    std::lock_guard lock(mutex_);
    script_.streams[stream].push_back(std::move(reply));
}

void ScriptedProvider::add_default_reply(std::string reply)
{
    std::lock_guard lock(mutex_);
    script_.fallback.push_back(std::move(reply));
}

void ScriptedProvider::add_pattern(PatternRule rule)
{
    std::lock_guard lock(mutex_);
    script_.patterns.push_back(std::move(rule));
}

CompletionResult ScriptedProvider::complete(const CompletionRequest& request)
{
    std::string reply;
    {
        std::lock_guard lock(mutex_);
        bool found = false;
        for (auto it = script_.patterns.begin(); it != script_.patterns.end(); ++it) {
            if (request.prompt.find(it->contains) == std::string::npos) continue;
            reply = it->reply;
            if (it->once) script_.patterns.erase(it);
            found = true;
            break;
        }
        if (!found) {
            auto stream = script_.streams.find(request.stream);
            if (stream != script_.streams.end() && !stream->second.empty()) {
                reply = std::move(stream->second.front());
                stream->second.pop_front();
            } else if (!script_.fallback.empty()) {
                reply = std::move(script_.fallback.front());
                script_.fallback.pop_front();
            } else {
                throw Error(ErrorKind::ScriptExhausted,
                            "no scripted reply left for stream '" + request.stream + "'");
            }
        }
        ++script_.calls;
    }
    CompletionResult result;
    result.usage = {estimate_tokens(request.prompt), estimate_tokens(reply)};
    result.candidates.push_back(std::move(reply));
    return result;
}

std::size_t ScriptedProvider::calls() const
{
    std::lock_guard lock(mutex_);
    return script_.calls;
}

std::size_t ScriptedProvider::remaining() const
{
    std::lock_guard lock(mutex_);
    std::size_t total = script_.fallback.size();
    for (const auto& [name, replies] : script_.streams) total += replies.size();
    return total;
}

ScriptedProvider ScriptedProvider::from_json(std::string_view json_text)
{
    ScriptedProvider provider;
    try {
        auto doc = nlohmann::json::parse(json_text);
        if (doc.contains("streams")) {
            for (const auto& [name, replies] : doc.at("streams").items()) {
                for (const auto& reply : replies) provider.add_reply(name, reply.get<std::string>());
            }
        }
        for (const auto& reply : doc.value("default", nlohmann::json::array()))
            provider.add_default_reply(reply.get<std::string>());
        for (const auto& rule : doc.value("patterns", nlohmann::json::array())) {
            provider.add_pattern({rule.at("contains").get<std::string>(), rule.at("reply").get<std::string>(),
                                  rule.value("once", false)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidFormat, std::string("script: ") + e.what());
    }
    return provider;
}

ScriptedProvider ScriptedProvider::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidFormat, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

CompletionResult parse_chat_completion(std::string_view body)
{
    try {
        auto doc = nlohmann::json::parse(body);
        CompletionResult result;
        for (const auto& choice : doc.at("choices")) {
            std::string content;
            if (choice.contains("message")) content = choice.at("message").value("content", "");
            else content = choice.value("text", "");
            // The reference client strips surrounding whitespace.
            auto first = content.find_first_not_of(" \t\r\n");
            auto last = content.find_last_not_of(" \t\r\n");
            content = first == std::string::npos ? std::string{} : content.substr(first, last - first + 1);
            result.candidates.push_back(std::move(content));
        }
        if (doc.contains("usage")) {
            const auto& usage = doc.at("usage");
            result.usage.prompt_tokens = usage.value("prompt_tokens", TokenCount{0});
            result.usage.completion_tokens = usage.value("completion_tokens", TokenCount{0});
        }
        if (result.candidates.empty()) throw Error(ErrorKind::Transport, "response has no choices");
        return result;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Transport, std::string("malformed completion response: ") + e.what());
    }
}

} // namespace stackagent
