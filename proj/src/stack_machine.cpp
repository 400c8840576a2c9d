#include "stackagent/stack_machine.hpp"

#include <chrono>
#include <stdexcept>

namespace stackagent {

std::string_view to_string(Transition t)
{
    switch (t) {
    case Transition::EnvAction: return "env_action";
    case Transition::Push: return "push";
    case Transition::Pop: return "pop";
    case Transition::Finish: return "finish";
    case Transition::Retry: return "retry";
    case Transition::Fail: return "fail";
    }
    return "unknown";
}

std::int64_t wall_clock_ms()
{
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

StackState init_episode(const PolicyLibrary& library, std::string_view root_name, std::string objective, Limits limits)
{
    StackState state;
    state.limits = limits;
    state.frames.push_back(PolicyFrame{library.get(root_name), std::move(objective), {}});
    return state;
}

namespace {

class Stepper {
public:
    Stepper(StackState& state, const Observation& obs, const StepContext& ctx) : state_(state), obs_(obs), ctx_(ctx) {}

    StepOutcome run()
    {
        if (state_.status != EpisodeStatus::Running) throw std::logic_error("step called on a terminated episode");
        state_.top().history.push_back(history::Observed{observation_digest(obs_), obs_.url});

        std::size_t transitions = 0;
        while (true) {
            StepEvent event;
            event.policy = state_.top().spec->name;

            std::string prompt;
            try {
                prompt = build_prompt(state_.top(), obs_, ctx_.library, state_.prompt_options);
            } catch (const Error& e) {
                return fail(std::move(event), e.kind(), e.what());
            }

            auto parsed = query(prompt, event);
            if (!parsed) return *failure_;

            const Action& action = parsed->action;
            if (const auto* call = std::get_if<actions::PolicyCall>(&action)) {
                if (transitions >= state_.limits.max_internal_transitions)
                    return fail(std::move(event), ErrorKind::InternalTransitionBudgetExceeded,
                                "more than " + std::to_string(state_.limits.max_internal_transitions) +
                                    " stack transitions in one step");
                if (state_.depth() + 1 > state_.limits.max_depth)
                    return fail(std::move(event), ErrorKind::DepthExceeded,
                                "stack depth would exceed " + std::to_string(state_.limits.max_depth));
                ++transitions;
                state_.frames.push_back(PolicyFrame{ctx_.library.get(call->name), call->query, {}});
                emit(std::move(event), Transition::Push);
                continue;
            }
            if (const auto* stop = std::get_if<actions::Stop>(&action)) {
                if (state_.depth() == 1) {
                    state_.status = EpisodeStatus::Finished;
                    emit(std::move(event), Transition::Finish);
                    return outcome::Finished{stop->answer};
                }
                if (transitions >= state_.limits.max_internal_transitions)
                    return fail(std::move(event), ErrorKind::InternalTransitionBudgetExceeded,
                                "more than " + std::to_string(state_.limits.max_internal_transitions) +
                                    " stack transitions in one step");
                ++transitions;
                auto returned = state_.top().as_call();
                state_.frames.pop_back();
                state_.top().history.push_back(history::ChildReturned{std::move(returned), stop->answer});
                emit(std::move(event), Transition::Pop);
                continue;
            }
            if (state_.env_actions_taken >= state_.limits.max_env_actions)
                return fail(std::move(event), ErrorKind::EnvActionBudgetExceeded,
                            "episode already used " + std::to_string(state_.limits.max_env_actions) +
                                " environment actions");
            state_.top().history.push_back(history::Acted{parsed->reason, action});
            ++state_.env_actions_taken;
            emit(std::move(event), Transition::EnvAction);
            return outcome::EnvAction{action, parsed->reason};
        }
    }

private:
    // One provider call plus one reprompt if the reply has no action.
    std::optional<ParsedResponse> query(const std::string& prompt, StepEvent& event)
    {
        const PolicyNames names = ctx_.library.callable_names(*state_.top().spec);
        CompletionRequest request{prompt, state_.sampling.temperature, state_.sampling.n_candidates,
                                  state_.sampling.max_tokens, event.policy};
        for (int attempt = 0; attempt < 2; ++attempt) {
            CompletionResult result;
            try {
                result = ctx_.provider.complete(request);
                if (result.candidates.empty()) throw Error(ErrorKind::ModelError, "provider returned no candidates");
            } catch (const Error& e) {
                auto kind = e.kind() == ErrorKind::ScriptExhausted ? ErrorKind::ScriptExhausted : ErrorKind::ModelError;
                fail(std::move(event), kind, e.what());
                return std::nullopt;
            } catch (const std::exception& e) {
                fail(std::move(event), ErrorKind::ModelError, e.what());
                return std::nullopt;
            }
            state_.usage += result.usage;
            event.usage = result.usage;
            event.response = select_candidate(result);
            try {
                auto parsed = parse_model_response(event.response, names);
                event.action = render_action(parsed.action);
                event.reason = parsed.reason;
                event.ignored_actions = parsed.ignored_actions;
                return parsed;
            } catch (const Error& e) {
                if (attempt == 0) {
                    StepEvent retry = event;
                    retry.error = e.kind();
                    emit(std::move(retry), Transition::Retry);
                    event.usage = {};
                    event.response.clear();
                    continue;
                }
                fail(std::move(event), ErrorKind::UnparseableResponse, e.what());
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    void emit(StepEvent event, Transition transition)
    {
        event.transition = transition;
        event.depth = state_.depth();
        event.timestamp = ctx_.clock ? ctx_.clock() : 0;
        if (ctx_.sink) ctx_.sink(event, state_);
    }

    StepOutcome fail(StepEvent event, ErrorKind kind, std::string message)
    {
        state_.status = EpisodeStatus::Failed;
        event.error = kind;
        emit(std::move(event), Transition::Fail);
        failure_ = outcome::Failed{kind, std::move(message)};
        return *failure_;
    }

    StackState& state_;
    const Observation& obs_;
    const StepContext& ctx_;
    std::optional<StepOutcome> failure_;
};

} // namespace

StepOutcome step(StackState& state, const Observation& obs, const StepContext& ctx)
{
    return Stepper(state, obs, ctx).run();
}

} // namespace stackagent
