#include "gen.hpp"
#include "stackagent/error.hpp"
#include "stackagent/observation.hpp"

#include <doctest.h>

using namespace stackagent;

namespace {

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Tries every prefix length from longest to shortest.
std::string truncate_oracle(const std::string& text, std::size_t budget)
{
    if ((text.size() + 3) / 4 <= budget) return text;
    const auto lines = lines_of(text);
    for (std::size_t k = lines.size() + 1; k-- > 0;) {
        std::string candidate;
        for (std::size_t i = 0; i < k; ++i) candidate += lines[i] + "\n";
        candidate += "[truncated]";
        if ((candidate.size() + 3) / 4 <= budget) return candidate;
    }
    return "";
}

} // namespace

TEST_SUITE("observation")
{
    TEST_CASE("text and value styles")
    {
        Observation obs;
        obs.elements.push_back({ElementId{1}, "button", {{"title", "Search flights"}}, "Search"});
        obs.elements.push_back({ElementId{2}, "input_text", {{"name", "flight-from"}, {"val", ""}}, ""});
        obs.elements.push_back({ElementId{3}, "text", {}, "Total < $5 & \"cheap\""});
        obs.elements.push_back({ElementId{4}, "div", {}, ""});
        const auto text = serialize_elements(obs);
        CHECK(text ==
              "<button id=1 title=\"Search flights\">Search</button>\n"
              "<input_text id=2 name=\"flight-from\" val= />\n"
              "<text id=3>Total &lt; $5 &amp; \"cheap\"</text>\n"
              "<div id=4/>");
        CHECK(parse_elements(text) == obs.elements);
    }

    TEST_CASE("value element keeps its position among attributes")
    {
        WebElement el{ElementId{5}, "input_text", {{"val", "JFK"}, {"name", "from"}}, ""};
        const auto text = serialize_elements(Observation{{el}, ""});
        CHECK(text == "<input_text id=5 name=\"from\" val=JFK />");
    }

    TEST_CASE("round trip over generated observations")
    {
        testgen::Rng rng(5);
        for (int i = 0; i < 1000; ++i) {
            auto obs = testgen::observation(rng, 12);
            // Value elements serialize val last.
            for (auto& el : obs.elements) {
                if (el.text.empty() && el.attribute("val")) {
                    auto it = std::find_if(el.attributes.begin(), el.attributes.end(),
                                           [](const auto& kv) { return kv.first == "val"; });
                    auto kv = *it;
                    el.attributes.erase(it);
                    el.attributes.push_back(kv);
                }
            }
            const auto text = serialize_elements(obs);
            INFO(text);
            REQUIRE(parse_elements(text) == obs.elements);
            REQUIRE(serialize_elements(Observation{parse_elements(text), obs.url}) == text);
        }
    }

    TEST_CASE("one line per element")
    {
        testgen::Rng rng(8);
        for (int i = 0; i < 200; ++i) {
            auto obs = testgen::observation(rng, 10);
            const auto text = serialize_elements(obs);
            const auto n = obs.elements.empty() ? 0 : std::count(text.begin(), text.end(), '\n') + 1;
            CHECK(static_cast<std::size_t>(n) == obs.elements.size());
        }
    }

    TEST_CASE("malformed element lines")
    {
        CHECK_THROWS_AS(parse_elements("button id=1>x</button>"), Error);
        CHECK_THROWS_AS(parse_elements("<button id=x>x</button>"), Error);
        CHECK_THROWS_AS(parse_elements("<button id=1>x</link>"), Error);
        CHECK_THROWS_AS(parse_elements("<button id=1 title=\"x>y</button>"), Error);
    }

    TEST_CASE("token estimate")
    {
        CHECK(estimate_tokens("") == 0);
        CHECK(estimate_tokens("a") == 1);
        CHECK(estimate_tokens("abcd") == 1);
        CHECK(estimate_tokens("abcde") == 2);
        CHECK(estimate_tokens(std::string(16000, 'x')) == 4000);
        CHECK(estimate_tokens(std::string(16001, 'x')) == 4001);
    }

    TEST_CASE("truncation matches a brute-force oracle")
    {
        testgen::Rng rng(21);
        const std::string alphabet = "abc xyz\n";
        for (int i = 0; i < 2000; ++i) {
            const auto text = testgen::text(rng, 120, alphabet);
            const auto budget = rng.below(40);
            const auto got = truncate_to_budget(text, budget);
            INFO(text);
            INFO(budget);
            REQUIRE(got == truncate_oracle(text, budget));
            REQUIRE(estimate_tokens(got) <= budget);
        }
    }

    TEST_CASE("truncation keeps whole lines")
    {
        const std::string text = "line one\nline two\nline three";
        CHECK(truncate_to_budget(text, 100) == text);
        CHECK(truncate_to_budget(text, 6) == "line one\n[truncated]");
        CHECK(truncate_to_budget(text, 3) == "[truncated]");
        CHECK(truncate_to_budget(text, 2) == "");
    }
}
