#include "stackagent/error.hpp"

#include <array>
#include <utility>

namespace stackagent {

namespace {

constexpr std::array<std::pair<ErrorKind, std::string_view>, 20> kNames{{
    {ErrorKind::UnknownVerb, "UnknownVerb"},
    {ErrorKind::MalformedArguments, "MalformedArguments"},
    {ErrorKind::NoActionFound, "NoActionFound"},
    {ErrorKind::DuplicateName, "DuplicateName"},
    {ErrorKind::UnknownPolicy, "UnknownPolicy"},
    {ErrorKind::BudgetImpossible, "BudgetImpossible"},
    {ErrorKind::DepthExceeded, "DepthExceeded"},
    {ErrorKind::InternalTransitionBudgetExceeded, "InternalTransitionBudgetExceeded"},
    {ErrorKind::EnvActionBudgetExceeded, "EnvActionBudgetExceeded"},
    {ErrorKind::ModelError, "ModelError"},
    {ErrorKind::UnparseableResponse, "UnparseableResponse"},
    {ErrorKind::Transport, "Transport"},
    {ErrorKind::ScriptExhausted, "ScriptExhausted"},
    {ErrorKind::UnknownScenario, "UnknownScenario"},
    {ErrorKind::NoSuchElement, "NoSuchElement"},
    {ErrorKind::ScenarioFinished, "ScenarioFinished"},
    {ErrorKind::UnparseableLabel, "UnparseableLabel"},
    {ErrorKind::EmptyInput, "EmptyInput"},
    {ErrorKind::ConfigInvalid, "ConfigInvalid"},
    {ErrorKind::InvalidFormat, "InvalidFormat"},
}};

} // namespace

std::string_view to_string(ErrorKind kind)
{
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "Unknown";
}

ErrorKind error_kind_from_string(std::string_view name)
{
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    throw Error(ErrorKind::InvalidFormat, "unknown error kind '" + std::string(name) + "'");
}

} // namespace stackagent
