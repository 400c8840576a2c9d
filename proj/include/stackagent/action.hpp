#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stackagent {

struct ElementId {
    std::uint64_t value = 0;
    auto operator<=>(const ElementId&) const = default;
};

enum class ScrollDirection { Up, Down };

namespace actions {

struct Click {
    ElementId id;
    bool operator==(const Click&) const = default;
};
struct Type {
    ElementId id;
    std::string text;
    bool press_enter = true;
    bool operator==(const Type&) const = default;
};
struct Hover {
    ElementId id;
    bool operator==(const Hover&) const = default;
};
struct Press {
    std::string key_combo;
    bool operator==(const Press&) const = default;
};
struct Scroll {
    ScrollDirection direction = ScrollDirection::Down;
    bool operator==(const Scroll&) const = default;
};
struct Note {
    std::string content;
    bool operator==(const Note&) const = default;
};
struct GoBack {
    bool operator==(const GoBack&) const = default;
};
struct GoForward {
    bool operator==(const GoForward&) const = default;
};
struct Goto {
    std::string url;
    bool operator==(const Goto&) const = default;
};
struct NewTab {
    bool operator==(const NewTab&) const = default;
};
struct TabFocus {
    std::uint64_t index = 0;
    bool operator==(const TabFocus&) const = default;
};
struct CloseTab {
    bool operator==(const CloseTab&) const = default;
};
/// Invocation of another policy from the library.
struct PolicyCall {
    std::string name;
    std::string query;
    bool operator==(const PolicyCall&) const = default;
};
/// Terminates the active policy; the answer is handed to the caller.
struct Stop {
    std::string answer;
    bool operator==(const Stop&) const = default;
};

} // namespace actions

using Action = std::variant<actions::Click, actions::Type, actions::Hover, actions::Press,
                            actions::Scroll, actions::Note, actions::GoBack, actions::GoForward,
                            actions::Goto, actions::NewTab, actions::TabFocus, actions::CloseTab,
                            actions::PolicyCall, actions::Stop>;

using PolicyNames = std::set<std::string, std::less<>>;

/// True for actions that are sent to the web environment (everything except
/// policy calls and stop).
bool is_page_operation(const Action& action);

/// Verb token of the canonical form, e.g. "click" or the policy name.
std::string verb_of(const Action& action);

/// Built-in verbs; policy names may not shadow these.
bool is_reserved_verb(std::string_view token);

/// Parses one action line. Throws Error(UnknownVerb | MalformedArguments).
Action parse_action(std::string_view text, const PolicyNames& policy_names);

/// Canonical single-line form. parse_action(render_action(a)) == a.
std::string render_action(const Action& action);

struct ParsedResponse {
    std::string reason;
    Action action;
    /// Further parseable action lines after the chosen one; not executed.
    std::vector<std::string> ignored_actions;
};

/// Extracts the (reason, action) pair from a raw model completion.
/// Throws Error(NoActionFound).
ParsedResponse parse_model_response(std::string_view raw, const PolicyNames& policy_names);

} // namespace stackagent
