#include "gen.hpp"
#include "stackagent/action.hpp"
#include "stackagent/error.hpp"

#include <doctest.h>

#include <functional>

using namespace stackagent;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::InvalidFormat;
}

const PolicyNames kNames{"find_commits", "search_issues", "find_booking"};

} // namespace

TEST_SUITE("action")
{
    TEST_CASE("documented action lines")
    {
        CHECK(parse_action("click [7]", kNames) == Action{actions::Click{ElementId{7}}});
        CHECK(parse_action("type [15] [Carnegie Mellon University] [1]", kNames) ==
              Action{actions::Type{ElementId{15}, "Carnegie Mellon University", true}});
        CHECK(parse_action("find_commits [How many commits did user make to diffusionProject on 03/23/2023?]", kNames) ==
              Action{actions::PolicyCall{"find_commits",
                                         "How many commits did user make to diffusionProject on 03/23/2023?"}});
        CHECK(parse_action("stop [Closed]", kNames) == Action{actions::Stop{"Closed"}});
        CHECK(parse_action("scroll [down]", kNames) == Action{actions::Scroll{ScrollDirection::Down}});
    }

    TEST_CASE("every line of the example action block")
    {
        const PolicyNames names{"find_commits", "search_issues", "create_project", "create_group",
                                "find_subreddit", "find_user", "find_customer_review", "find_order",
                                "search_customer", "search_order", "list_products", "search_reviews",
                                "find_directions", "search_nearest_place"};
        const std::vector<std::string> lines{
            "click [7]",
            "type [15] [Carnegie Mellon University] [1]",
            "stop [Closed]",
            "hover [15]",
            "scroll [down]",
            "note [Spent $10 on 4/1/2024]",
            "find_commits [How many commits did user make to diffusionProject on 03/23/2023?]",
            "search_issues [Open my latest updated issue that has keyword \"better\" in its title to check if it is closed]",
            "create_project [Create a new public project \"awesome-llms\" and add primer, convexegg, abishek as members]",
            "create_group [Create a new group \"coding_friends\" with members qhduan, Agnes-U]",
            "find_subreddit [books]",
            "find_user [AdamCannon]",
            "find_customer_review [Show me customer reviews for Zoe products]",
            "find_order [Most recent pending order by Sarah Miller]",
            "search_customer [Search customer with phone number 8015551212]",
            "search_order [How much I spend on 4/19/2023 on shopping at One Stop Market?]",
            "list_products [List products from PS4 accessories category by ascending price]",
            "search_reviews [List out reviewers, if exist, who mention about ear cups being small]",
            "find_directions [Check if the social security administration in Pittsburgh can be reached in one hour by car from Carnegie Mellon University]",
            "search_nearest_place [Tell me the closest cafe(s) to CMU Hunt library]",
        };
        for (const auto& line : lines) {
            INFO(line);
            const auto a = parse_action(line, names);
            CHECK(render_action(a) == line);
        }
    }

    TEST_CASE("render canonical forms")
    {
        CHECK(render_action(actions::Click{ElementId{7}}) == "click [7]");
        CHECK(render_action(actions::Stop{""}) == "stop []");
        CHECK(render_action(actions::Note{"Spent $10 on 4/1/2024"}) == "note [Spent $10 on 4/1/2024]");
        CHECK(render_action(actions::Type{ElementId{3}, "JFK", false}) == "type [3] [JFK] [0]");
    }

    TEST_CASE("type flag")
    {
        CHECK(std::get<actions::Type>(parse_action("type [4] [hello]", {})).press_enter);
        CHECK_FALSE(std::get<actions::Type>(parse_action("type [4] [hello] [0]", {})).press_enter);
        CHECK_FALSE(std::get<actions::Type>(parse_action("type [4] [hello] [press_enter_after=0]", {})).press_enter);
        CHECK(std::get<actions::Type>(parse_action("type [4] [a] [b]", {})).text == "a] [b");
    }

    TEST_CASE("whitespace around the line is tolerated")
    {
        CHECK(parse_action("   click [12]  ", {}) == Action{actions::Click{ElementId{12}}});
    }

    TEST_CASE("brackets in the final argument")
    {
        auto a = parse_action("find_booking [reference [ABC] please]", kNames);
        CHECK(std::get<actions::PolicyCall>(a).query == "reference [ABC] please");
    }

    TEST_CASE("errors")
    {
        CHECK(kind_of([] { parse_action("fly [3]", kNames); }) == ErrorKind::UnknownVerb);
        CHECK(kind_of([] { parse_action("unknown_policy [x]", kNames); }) == ErrorKind::UnknownVerb);
        CHECK(kind_of([] { parse_action("click [x]", kNames); }) == ErrorKind::MalformedArguments);
        CHECK(kind_of([] { parse_action("click 7", kNames); }) == ErrorKind::MalformedArguments);
        CHECK(kind_of([] { parse_action("scroll [sideways]", kNames); }) == ErrorKind::MalformedArguments);
        CHECK(kind_of([] { parse_action("click [-1]", kNames); }) == ErrorKind::MalformedArguments);
        CHECK(kind_of([] { parse_action("", kNames); }) == ErrorKind::UnknownVerb);
    }

    TEST_CASE("legacy uppercase verbs")
    {
        CHECK(parse_action("CLICK 24", {}) == Action{actions::Click{ElementId{24}}});
        CHECK(parse_action("CLICK 24 Search flights", {}) == Action{actions::Click{ElementId{24}}});
        CHECK(parse_action("TYPE 21 Boston", {}) == Action{actions::Type{ElementId{21}, "Boston", true}});
        CHECK(parse_action("TYPE 26 \"12/03/2023\"", {}) == Action{actions::Type{ElementId{26}, "12/03/2023", true}});
        CHECK(parse_action("DONE", {}) == Action{actions::Stop{""}});
    }

    TEST_CASE("page operation classification")
    {
        CHECK(is_page_operation(actions::Click{}));
        CHECK(is_page_operation(actions::GoBack{}));
        CHECK_FALSE(is_page_operation(actions::PolicyCall{"x", "y"}));
        CHECK_FALSE(is_page_operation(actions::Stop{}));
    }

    TEST_CASE("round trip over generated actions")
    {
        testgen::Rng rng(11);
        std::vector<std::string> names;
        for (int i = 0; i < 6; ++i) names.push_back(testgen::word(rng));
        PolicyNames set(names.begin(), names.end());
        for (const auto& n : names)
            if (is_reserved_verb(n)) set.erase(n);
        names.assign(set.begin(), set.end());
        for (int i = 0; i < 3000; ++i) {
            const auto a = testgen::action(rng, names);
            const auto line = render_action(a);
            INFO(line);
            REQUIRE(parse_action(line, set) == a);
            REQUIRE(parse_action(line, set) == parse_action(line, set));
        }
    }

    TEST_CASE("model response with reason")
    {
        auto r = parse_model_response("REASON:\nOrders page has the target.\nACTION:\nclick [5]", {});
        CHECK(r.reason == "Orders page has the target.");
        CHECK(r.action == Action{actions::Click{ElementId{5}}});
    }

    TEST_CASE("model response without reason")
    {
        auto r = parse_model_response("ACTION: stop [N/A]", {});
        CHECK(r.reason.empty());
        CHECK(r.action == Action{actions::Stop{"N/A"}});
    }

    TEST_CASE("model response with no valid action")
    {
        CHECK(kind_of([] { parse_model_response("REASON: done\nACTION:\nfly [3]", {}); }) == ErrorKind::NoActionFound);
        CHECK(kind_of([] { parse_model_response("", {}); }) == ErrorKind::NoActionFound);
    }

    TEST_CASE("model response takes the first action and keeps the rest")
    {
        auto r = parse_model_response("Reason: go\naction:\nfind_booking [ABC]\nclick [3]", kNames);
        CHECK(r.reason == "go");
        CHECK(r.action == Action{actions::PolicyCall{"find_booking", "ABC"}});
        REQUIRE(r.ignored_actions.size() == 1);
        CHECK(r.ignored_actions[0] == "click [3]");
    }

    TEST_CASE("model response uses the last headers")
    {
        auto r = parse_model_response("REASON: a\nACTION: click [1]\nREASON:\nsecond\nthoughts\nACTION:\n`click [2]`", {});
        CHECK(r.reason == "second\nthoughts");
        CHECK(r.action == Action{actions::Click{ElementId{2}}});
    }

    TEST_CASE("model response falls back to any parseable line")
    {
        auto r = parse_model_response("I will now click.\nclick [9]", {});
        CHECK(r.action == Action{actions::Click{ElementId{9}}});
    }
}
