#pragma once

#include "stackagent/error.hpp"
#include "stackagent/policy.hpp"
#include "stackagent/provider.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace stackagent {

struct Limits {
    std::size_t max_depth = 8;
    /// Pushes plus pops allowed inside one step call.
    std::size_t max_internal_transitions = 8;
    std::size_t max_env_actions = 30;
    bool operator==(const Limits&) const = default;
};

struct SamplingConfig {
    double temperature = 0.3;
    int n_candidates = 3;
    int max_tokens = 512;
};

enum class EpisodeStatus { Running, Finished, Failed };

struct StackState {
    std::vector<PolicyFrame> frames; // front() is the root policy
    Limits limits;
    SamplingConfig sampling;
    PromptOptions prompt_options;
    std::size_t env_actions_taken = 0;
    Usage usage;
    EpisodeStatus status = EpisodeStatus::Running;

    std::size_t depth() const { return frames.size(); }
    PolicyFrame& top() { return frames.back(); }
    const PolicyFrame& top() const { return frames.back(); }
};

namespace outcome {

struct EnvAction {
    Action action; // always a page operation
    std::string reason;
};
struct Finished {
    std::string answer;
};
struct Failed {
    ErrorKind kind;
    std::string message;
};

} // namespace outcome

using StepOutcome = std::variant<outcome::EnvAction, outcome::Finished, outcome::Failed>;

/// What happened after one provider call.
enum class Transition { EnvAction, Push, Pop, Finish, Retry, Fail };

std::string_view to_string(Transition t);

/// Emitted after every provider call, and on failures that happen before one.
struct StepEvent {
    std::int64_t timestamp = 0;
    std::size_t depth = 0;   // stack depth after the transition
    std::string policy;      // policy that was queried
    Usage usage;             // usage of this call (zero when no call was made)
    Transition transition = Transition::EnvAction;
    std::string action;      // rendered action, empty when none parsed
    std::string reason;
    std::string response;    // raw selected completion
    std::vector<std::string> ignored_actions;
    std::optional<ErrorKind> error;
};

/// Receives each event together with the state right after it.
using TraceSink = std::function<void(const StepEvent&, const StackState&)>;
using Clock = std::function<std::int64_t()>;

/// Milliseconds since the Unix epoch.
std::int64_t wall_clock_ms();

/// Throws Error(UnknownPolicy).
StackState init_episode(const PolicyLibrary& library, std::string_view root_name, std::string objective,
                        Limits limits = {});

struct StepContext {
    const PolicyLibrary& library;
    Provider& provider;
    TraceSink sink;
    Clock clock;
};

/// Runs the stack until the top policy issues a page operation or the root
/// stops. A push or pop is re-queried against the same observation. Errors
/// are reported as outcome::Failed; the state is then terminal.
StepOutcome step(StackState& state, const Observation& obs, const StepContext& ctx);

} // namespace stackagent
