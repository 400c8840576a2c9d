#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stackagent {

enum class ErrorKind {
    UnknownVerb,
    MalformedArguments,
    NoActionFound,
    DuplicateName,
    UnknownPolicy,
    BudgetImpossible,
    DepthExceeded,
    InternalTransitionBudgetExceeded,
    EnvActionBudgetExceeded,
    ModelError,
    UnparseableResponse,
    Transport,
    ScriptExhausted,
    UnknownScenario,
    NoSuchElement,
    ScenarioFinished,
    UnparseableLabel,
    EmptyInput,
    ConfigInvalid,
    InvalidFormat,
};

std::string_view to_string(ErrorKind kind);
ErrorKind error_kind_from_string(std::string_view name);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace stackagent
