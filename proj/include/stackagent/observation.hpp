#pragma once

#include "stackagent/action.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stackagent {

/// Salient page element. Attributes keep insertion order; a "val" attribute
/// marks a value-style element (MiniWoB dialect).
struct WebElement {
    ElementId id;
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;

    const std::string* attribute(std::string_view name) const;
    bool operator==(const WebElement&) const = default;
};

struct Observation {
    std::vector<WebElement> elements;
    std::string url;

    const WebElement* find(ElementId id) const;
    bool operator==(const Observation&) const = default;
};

using TokenCount = std::size_t;

/// One line per element, document order. Value-style elements render as
/// `<tag id=N val=V />`, the rest as `<tag id=N attr="v">text</tag>` (or
/// `<tag id=N attr="v"/>` when the text is empty).
std::string serialize_elements(const Observation& obs);

/// Inverse of serialize_elements for text in the canonical format.
/// Throws Error(InvalidFormat).
std::vector<WebElement> parse_elements(std::string_view text);

/// ceil(chars / 4).
TokenCount estimate_tokens(std::string_view text);

inline constexpr std::string_view kTruncationMarker = "[truncated]";

/// Longest whole-line prefix that fits `budget`, plus a "[truncated]" line
/// when anything was dropped. The marker counts against the budget.
std::string truncate_to_budget(std::string_view text, TokenCount budget);

} // namespace stackagent
