#include "stackagent/action.hpp"

#include "stackagent/error.hpp"
#include "text_util.hpp"

#include <array>
#include <optional>

namespace stackagent {

using detail::parse_uint;
using detail::trim;

namespace {

constexpr std::array<std::string_view, 13> kVerbs{
    "click", "type",     "hover",     "press",     "scroll", "note", "go_back",
    "go_forward", "goto", "new_tab", "tab_focus", "close_tab", "stop"};

// Legacy uppercase verbs from flat MiniWoB-style transcripts.
constexpr std::array<std::string_view, 3> kLegacyVerbs{"CLICK", "TYPE", "DONE"};

[[noreturn]] void malformed(std::string_view verb, std::string_view line, std::string_view why)
{
    throw Error(ErrorKind::MalformedArguments,
                std::string(verb) + ": " + std::string(why) + " in '" + std::string(line) + "'");
}

// Content of the single bracket group spanning the whole of `rest`,
// matched greedily to the last ']'.
std::string_view single_group(std::string_view verb, std::string_view rest, std::string_view line)
{
    if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']')
        malformed(verb, line, "expected one [argument]");
    return rest.substr(1, rest.size() - 2);
}

ElementId element_id(std::string_view verb, std::string_view arg, std::string_view line)
{
    auto value = parse_uint(arg);
    if (!value) malformed(verb, line, "element id must be a non-negative integer");
    return ElementId{*value};
}

std::optional<bool> parse_enter_flag(std::string_view token)
{
    token = trim(token);
    constexpr std::string_view kPrefix = "press_enter_after";
    if (token.substr(0, kPrefix.size()) == kPrefix) {
        token = trim(token.substr(kPrefix.size()));
        if (token.empty() || token.front() != '=') return std::nullopt;
        token = trim(token.substr(1));
    }
    if (token == "1") return true;
    if (token == "0") return false;
    return std::nullopt;
}

actions::Type parse_type(std::string_view rest, std::string_view line)
{
    if (rest.empty() || rest.front() != '[') malformed("type", line, "expected [id]");
    auto close = rest.find(']');
    if (close == std::string_view::npos) malformed("type", line, "unterminated [id]");
    actions::Type out;
    out.id = element_id("type", rest.substr(1, close - 1), line);

    auto inner = single_group("type", trim(rest.substr(close + 1)), line);
    // Optional trailing "[0|1]" flag: `<text>] [<flag>` at the end of the greedy group.
    auto open = inner.rfind('[');
    if (open != std::string_view::npos) {
        if (auto flag = parse_enter_flag(inner.substr(open + 1))) {
            auto before = detail::rtrim(inner.substr(0, open));
            if (!before.empty() && before.back() == ']') {
                out.text = std::string(before.substr(0, before.size() - 1));
                out.press_enter = *flag;
                return out;
            }
        }
    }
    out.text = std::string(inner);
    return out;
}

ScrollDirection parse_direction(std::string_view arg, std::string_view line)
{
    auto value = detail::to_lower(trim(arg));
    if (value.rfind("direction", 0) == 0) {
        auto eq = value.find('=');
        if (eq == std::string::npos) malformed("scroll", line, "expected direction=up|down");
        value = std::string(trim(std::string_view(value).substr(eq + 1)));
    }
    if (value == "up") return ScrollDirection::Up;
    if (value == "down") return ScrollDirection::Down;
    malformed("scroll", line, "direction must be up or down");
}

Action parse_legacy(std::string_view head, std::string_view rest, std::string_view line,
                    const PolicyNames& names)
{
    if (head == "DONE") {
        if (!rest.empty() && rest != "[]") malformed(head, line, "DONE takes no arguments");
        return actions::Stop{};
    }
    if (!rest.empty() && rest.front() == '[') {
        std::string canonical = detail::to_lower(head);
        canonical += ' ';
        canonical += rest;
        return parse_action(canonical, names);
    }
    // Bare form: "CLICK 24", "CLICK 22 Seattle", "TYPE 21 Boston", `TYPE 26 Depart "12/03/2023"`.
    auto space = rest.find_first_of(" \t");
    auto id_token = rest.substr(0, space);
    auto id = element_id(head, id_token, line);
    auto tail = space == std::string_view::npos ? std::string_view{} : trim(rest.substr(space));
    if (head == "CLICK") return actions::Click{id};

    if (tail.empty()) malformed(head, line, "TYPE needs a value");
    std::string text(tail);
    if (tail.size() >= 2 && tail.back() == '"') {
        auto open = tail.rfind('"', tail.size() - 2);
        if (open != std::string_view::npos) text = std::string(tail.substr(open + 1, tail.size() - open - 2));
    }
    return actions::Type{id, std::move(text), true};
}

std::string_view strip_backticks(std::string_view s)
{
    s = trim(s);
    while (s.size() >= 2 && s.front() == '`' && s.back() == '`') s = trim(s.substr(1, s.size() - 2));
    return s;
}

} // namespace

bool is_page_operation(const Action& action)
{
    return !std::holds_alternative<actions::PolicyCall>(action) &&
           !std::holds_alternative<actions::Stop>(action);
}

bool is_reserved_verb(std::string_view token)
{
    for (auto v : kVerbs)
        if (v == token) return true;
    for (auto v : kLegacyVerbs)
        if (v == token) return true;
    return false;
}

std::string verb_of(const Action& action)
{
    auto line = render_action(action);
    auto end = line.find(' ');
    return end == std::string::npos ? line : line.substr(0, end);
}

Action parse_action(std::string_view text, const PolicyNames& policy_names)
{
    const auto line = trim(text);
    auto head_end = line.find_first_of(" \t[");
    auto head = line.substr(0, head_end);
    auto rest = head_end == std::string_view::npos ? std::string_view{} : trim(line.substr(head_end));
    if (head.empty()) throw Error(ErrorKind::UnknownVerb, "empty action line");

    using namespace actions;
    auto no_args = [&](auto value) -> Action {
        if (!rest.empty()) malformed(head, line, "takes no arguments");
        return value;
    };

    if (head == "click") return Click{element_id(head, single_group(head, rest, line), line)};
    if (head == "hover") return Hover{element_id(head, single_group(head, rest, line), line)};
    if (head == "type") return parse_type(rest, line);
    if (head == "press") {
        auto arg = single_group(head, rest, line);
        if (arg.empty()) malformed(head, line, "empty key combination");
        return Press{std::string(arg)};
    }
    if (head == "scroll") return Scroll{parse_direction(single_group(head, rest, line), line)};
    if (head == "note") return Note{std::string(single_group(head, rest, line))};
    if (head == "go_back") return no_args(GoBack{});
    if (head == "go_forward") return no_args(GoForward{});
    if (head == "new_tab") return no_args(NewTab{});
    if (head == "close_tab") return no_args(CloseTab{});
    if (head == "goto") {
        auto arg = single_group(head, rest, line);
        if (trim(arg).empty()) malformed(head, line, "empty url");
        return Goto{std::string(arg)};
    }
    if (head == "tab_focus") {
        auto index = parse_uint(single_group(head, rest, line));
        if (!index) malformed(head, line, "tab index must be a non-negative integer");
        return TabFocus{*index};
    }
    if (head == "stop") return Stop{std::string(single_group(head, rest, line))};
    for (auto legacy : kLegacyVerbs)
        if (head == legacy) return parse_legacy(head, rest, line, policy_names);

    if (policy_names.find(head) != policy_names.end())
        return PolicyCall{std::string(head), std::string(single_group(head, rest, line))};

    throw Error(ErrorKind::UnknownVerb, "unknown action '" + std::string(head) + "'");
}

std::string render_action(const Action& action)
{
    using namespace actions;
    auto bracket = [](std::string_view s) { return "[" + std::string(s) + "]"; };
    return std::visit(
        [&](const auto& a) -> std::string {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, Click>) return "click " + bracket(std::to_string(a.id.value));
            else if constexpr (std::is_same_v<T, Type>)
                return "type " + bracket(std::to_string(a.id.value)) + " " + bracket(a.text) + " " +
                       bracket(a.press_enter ? "1" : "0");
            else if constexpr (std::is_same_v<T, Hover>) return "hover " + bracket(std::to_string(a.id.value));
            else if constexpr (std::is_same_v<T, Press>) return "press " + bracket(a.key_combo);
            else if constexpr (std::is_same_v<T, Scroll>)
                return std::string("scroll ") + (a.direction == ScrollDirection::Up ? "[up]" : "[down]");
            else if constexpr (std::is_same_v<T, Note>) return "note " + bracket(a.content);
            else if constexpr (std::is_same_v<T, GoBack>) return "go_back";
            else if constexpr (std::is_same_v<T, GoForward>) return "go_forward";
            else if constexpr (std::is_same_v<T, Goto>) return "goto " + bracket(a.url);
            else if constexpr (std::is_same_v<T, NewTab>) return "new_tab";
            else if constexpr (std::is_same_v<T, TabFocus>) return "tab_focus " + bracket(std::to_string(a.index));
            else if constexpr (std::is_same_v<T, CloseTab>) return "close_tab";
            else if constexpr (std::is_same_v<T, PolicyCall>) return a.name + " " + bracket(a.query);
            else return "stop " + bracket(a.answer);
        },
        action);
}

namespace {

struct Header {
    std::size_t line = 0;
    std::string_view inline_rest;
};

std::optional<std::string_view> header_rest(std::string_view line, std::initializer_list<std::string_view> names)
{
    auto s = trim(line);
    for (auto name : names) {
        if (detail::istarts_with(s, name)) return trim(s.substr(name.size()));
    }
    return std::nullopt;
}

std::optional<Action> try_parse(std::string_view candidate, const PolicyNames& names)
{
    candidate = strip_backticks(candidate);
    if (candidate.empty()) return std::nullopt;
    try {
        return parse_action(candidate, names);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string collect_reason(const std::vector<std::string_view>& lines, const Header& header, std::size_t end)
{
    std::vector<std::string> parts;
    if (!header.inline_rest.empty()) parts.emplace_back(header.inline_rest);
    for (std::size_t i = header.line + 1; i < end && i < lines.size(); ++i) parts.emplace_back(lines[i]);
    return std::string(trim(detail::join(parts, "\n")));
}

} // namespace

ParsedResponse parse_model_response(std::string_view raw, const PolicyNames& policy_names)
{
    const auto lines = detail::split_lines(raw);
    std::optional<Header> reason_header;
    std::optional<Header> action_header;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (auto rest = header_rest(lines[i], {"REASONING:", "REASON:"})) reason_header = Header{i, *rest};
        else if (auto rest2 = header_rest(lines[i], {"ACTION:"})) action_header = Header{i, *rest2};
    }

    auto scan = [&](std::vector<std::string_view> candidates, std::size_t first_line)
        -> std::optional<std::pair<ParsedResponse, std::size_t>> {
        std::optional<std::pair<ParsedResponse, std::size_t>> found;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            auto parsed = try_parse(candidates[k], policy_names);
            if (!parsed) continue;
            if (!found) found.emplace(ParsedResponse{"", *parsed, {}}, first_line + k);
            else found->first.ignored_actions.push_back(render_action(*parsed));
        }
        return found;
    };

    std::optional<std::pair<ParsedResponse, std::size_t>> result;
    if (action_header) {
        std::size_t stop = lines.size();
        if (reason_header && reason_header->line > action_header->line) stop = reason_header->line;
        std::vector<std::string_view> candidates{action_header->inline_rest};
        for (std::size_t i = action_header->line + 1; i < stop; ++i) candidates.push_back(lines[i]);
        result = scan(std::move(candidates), action_header->line);
        if (result && reason_header) {
            std::size_t end = reason_header->line < action_header->line ? action_header->line : lines.size();
            result->first.reason = collect_reason(lines, *reason_header, end);
        }
    }
    if (!result) {
        std::vector<std::string_view> candidates;
        for (auto line : lines) {
            if (auto rest = header_rest(line, {"ACTION:"})) candidates.push_back(*rest);
            else candidates.push_back(line);
        }
        result = scan(std::move(candidates), 0);
        if (result && reason_header && reason_header->line < result->second) {
            result->first.reason = collect_reason(lines, *reason_header, result->second);
        }
    }
    if (!result) throw Error(ErrorKind::NoActionFound, "no parseable action in model response");
    return std::move(result->first);
}

} // namespace stackagent
