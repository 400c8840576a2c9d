#include "stackagent/observation.hpp"

#include "stackagent/error.hpp"
#include "text_util.hpp"

namespace stackagent {

namespace {

enum class Context { Text, Quoted, Unquoted };

std::string escape(std::string_view s, Context ctx)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '\n': out += "&#10;"; break;
        case '"':
            if (ctx == Context::Text) out += c;
            else out += "&quot;";
            break;
        case '<':
            if (ctx == Context::Text) out += "&lt;";
            else out += c;
            break;
        case '>':
            if (ctx == Context::Text) out += "&gt;";
            else out += c;
            break;
        default: out += c;
        }
    }
    return out;
}

std::string unescape(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        auto rest = s.substr(i);
        bool matched = false;
        for (auto [entity, ch] : {std::pair{"&amp;", '&'}, std::pair{"&#10;", '\n'}, std::pair{"&quot;", '"'},
                                  std::pair{"&lt;", '<'}, std::pair{"&gt;", '>'}}) {
            std::string_view e(entity);
            if (rest.substr(0, e.size()) == e) {
                out += ch;
                i += e.size() - 1;
                matched = true;
                break;
            }
        }
        if (!matched) out += '&';
    }
    return out;
}

[[noreturn]] void bad_line(std::string_view line, std::string_view why)
{
    throw Error(ErrorKind::InvalidFormat, std::string(why) + " in element line '" + std::string(line) + "'");
}

WebElement parse_line(std::string_view line)
{
    WebElement el;
    if (line.size() < 2 || line.front() != '<') bad_line(line, "expected '<'");
    auto rest = line.substr(1);
    auto space = rest.find(' ');
    if (space == std::string_view::npos || space == 0) bad_line(line, "missing tag");
    el.tag = std::string(rest.substr(0, space));
    rest = rest.substr(space);
    if (rest.substr(0, 4) != " id=") bad_line(line, "missing id");
    rest = rest.substr(4);
    std::size_t digits = 0;
    while (digits < rest.size() && rest[digits] >= '0' && rest[digits] <= '9') ++digits;
    auto id = detail::parse_uint(rest.substr(0, digits));
    if (!id) bad_line(line, "bad id");
    el.id = ElementId{*id};
    rest = rest.substr(digits);

    while (true) {
        if (rest == "/>") return el;
        if (!rest.empty() && rest.front() == '>') {
            const std::string closing = "</" + el.tag + ">";
            if (rest.size() < 1 + closing.size() || rest.substr(rest.size() - closing.size()) != closing)
                bad_line(line, "missing closing tag");
            el.text = unescape(rest.substr(1, rest.size() - 1 - closing.size()));
            if (el.text.empty()) bad_line(line, "empty text must use the self-closing form");
            return el;
        }
        if (rest.substr(0, 5) == " val=" && (rest.size() == 5 || rest[5] != '"')) {
            if (rest.size() < 8 || rest.substr(rest.size() - 3) != " />") bad_line(line, "value element must end with ' />'");
            el.attributes.emplace_back("val", unescape(rest.substr(5, rest.size() - 8)));
            return el;
        }
        if (rest.empty() || rest.front() != ' ') bad_line(line, "unexpected character");
        rest = rest.substr(1);
        auto eq = rest.find("=\"");
        if (eq == std::string_view::npos || eq == 0) bad_line(line, "bad attribute");
        auto name = rest.substr(0, eq);
        auto close = rest.find('"', eq + 2);
        if (close == std::string_view::npos) bad_line(line, "unterminated attribute");
        el.attributes.emplace_back(std::string(name), unescape(rest.substr(eq + 2, close - eq - 2)));
        rest = rest.substr(close + 1);
    }
}

} // namespace

const std::string* WebElement::attribute(std::string_view name) const
{
    for (const auto& [key, value] : attributes) {
        if (key == name) return &value;
    }
    return nullptr;
}

const WebElement* Observation::find(ElementId id) const
{
    for (const auto& el : elements) {
        if (el.id == id) return &el;
    }
    return nullptr;
}

std::string serialize_elements(const Observation& obs)
{
    std::string out;
    for (const auto& el : obs.elements) {
        if (!out.empty()) out += '\n';
        out += '<';
        out += el.tag;
        out += " id=";
        out += std::to_string(el.id.value);
        const std::string* val = el.attribute("val");
        const bool value_style = val != nullptr && el.text.empty();
        for (const auto& [key, value] : el.attributes) {
            if (value_style && key == "val") continue;
            out += ' ';
            out += key;
            out += "=\"";
            out += escape(value, Context::Quoted);
            out += '"';
        }
        if (value_style) {
            out += " val=";
            out += escape(*val, Context::Unquoted);
            out += " />";
        } else if (el.text.empty()) {
            out += "/>";
        } else {
            out += '>';
            out += escape(el.text, Context::Text);
            out += "</";
            out += el.tag;
            out += '>';
        }
    }
    return out;
}

std::vector<WebElement> parse_elements(std::string_view text)
{
    std::vector<WebElement> out;
    for (auto line : detail::split_lines(text)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        out.push_back(parse_line(line));
    }
    return out;
}

TokenCount estimate_tokens(std::string_view text)
{
    return (text.size() + 3) / 4;
}

std::string truncate_to_budget(std::string_view text, TokenCount budget)
{
    if (estimate_tokens(text) <= budget) return std::string(text);
    const std::size_t max_chars = budget * 4;
    const auto lines = detail::split_lines(text);
    // prefix[k] = length of the first k lines joined with '\n'.
    std::vector<std::size_t> prefix(lines.size() + 1, 0);
    for (std::size_t k = 1; k <= lines.size(); ++k)
        prefix[k] = prefix[k - 1] + lines[k - 1].size() + (k > 1 ? 1 : 0);

    for (std::size_t k = lines.size(); k-- > 0;) {
        const std::size_t size = prefix[k] + (k > 0 ? 1 : 0) + kTruncationMarker.size();
        if (size > max_chars) continue;
        std::string out;
        out.reserve(size);
        for (std::size_t i = 0; i < k; ++i) {
            out += lines[i];
            out += '\n';
        }
        out += kTruncationMarker;
        return out;
    }
    return {};
}

} // namespace stackagent
