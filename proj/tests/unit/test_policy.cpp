#include "gen.hpp"
#include "stackagent/error.hpp"
#include "stackagent/policy.hpp"

#include <doctest.h>

#include <filesystem>

using namespace stackagent;

namespace {

PolicySpec spec(std::string name, std::vector<std::string> callable = {}, TokenCount budget = kDefaultPromptBudget)
{
    PolicySpec s;
    s.name = name;
    s.description = "Does " + name;
    s.instruction = "{general_instruction_template}\n\nYou handle " + name + ".";
    s.examples = {"Task: example for " + name};
    s.callable = std::move(callable);
    s.prompt_budget = budget;
    return s;
}

PolicyFrame frame(const PolicyLibrary& lib, std::string_view name, std::string objective)
{
    return PolicyFrame{lib.get(name), std::move(objective), {}};
}

Observation page(std::size_t n)
{
    Observation obs;
    obs.url = "http://crm.test/#results";
    for (std::size_t i = 0; i < n; ++i)
        obs.elements.push_back({ElementId{i + 1}, "button", {{"title", "row " + std::to_string(i)}}, "Select"});
    return obs;
}

} // namespace

TEST_SUITE("policy")
{
    TEST_CASE("registration rejects duplicates and reserved names")
    {
        PolicyLibrary lib;
        lib.add(spec("find_booking"));
        CHECK_THROWS_AS(lib.add(spec("find_booking")), Error);
        CHECK_THROWS_AS(lib.add(spec("click")), Error);
        CHECK_THROWS_AS(lib.add(spec("stop")), Error);
        try {
            lib.add(spec("type"));
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DuplicateName);
        }
        CHECK(lib.size() == 1);
    }

    TEST_CASE("validate reports unregistered callees")
    {
        PolicyLibrary lib;
        lib.add(spec("root", {"missing"}));
        try {
            lib.validate();
            FAIL("validate should throw");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnknownPolicy);
        }
        CHECK_THROWS_AS(lib.get("nope"), Error);
        CHECK(lib.find("nope") == nullptr);
    }

    TEST_CASE("functional registration leaves the input untouched")
    {
        PolicyLibrary a;
        auto b = register_policy(a, spec("x"));
        CHECK(a.size() == 0);
        CHECK(b.size() == 1);
    }

    TEST_CASE("prompt sections and subroutine block")
    {
        PolicyLibrary lib;
        lib.add(spec("root", {"find_booking"}));
        lib.add(spec("find_booking"));
        auto f = frame(lib, "root", "Cancel booking ABC123");
        f.history.push_back(history::Acted{"", actions::Click{ElementId{3}}});
        f.history.push_back(history::Observed{"digest", "u"});
        f.history.push_back(history::ChildReturned{{"find_booking", "ABC123"}, "Booking ABC123 is open"});
        const auto prompt = build_prompt(f, page(3), lib);
        CHECK(prompt.find("Subroutine Actions:\n`find_booking [query]`: Does find_booking") != std::string::npos);
        CHECK(prompt.find("OBJECTIVE:\nCancel booking ABC123\nOBSERVATION:\n<button id=1") != std::string::npos);
        CHECK(prompt.find("\nURL:\nhttp://crm.test/#results\nPREVIOUS ACTIONS:\n1 = click [3]\n"
                          "2 = find_booking [ABC123] -> Booking ABC123 is open") != std::string::npos);
        CHECK(prompt.find("REASON:") != std::string::npos);
        CHECK(prompt.find("{") == std::string::npos);

        const auto plain = build_prompt(f, page(3), lib, PromptOptions{false});
        CHECK(plain.find("REASON:") == std::string::npos);
        CHECK(plain.find("ACTION:") != std::string::npos);
    }

    TEST_CASE("leaf policy has no subroutine block")
    {
        PolicyLibrary lib;
        lib.add(spec("leaf"));
        const auto prompt = build_prompt(frame(lib, "leaf", "q"), page(1), lib);
        CHECK(prompt.find("Subroutine Actions:") == std::string::npos);
    }

    TEST_CASE("only the observation is shrunk")
    {
        testgen::Rng rng(3);
        for (int i = 0; i < 300; ++i) {
            PolicyLibrary lib;
            const TokenCount budget = 1000 + rng.below(3000);
            lib.add(spec("p", {}, budget));
            auto f = frame(lib, "p", testgen::text(rng, 200));
            for (std::size_t h = rng.below(6); h > 0; --h)
                f.history.push_back(history::Acted{"", testgen::action(rng, {})});
            const auto obs = page(rng.below(400));
            std::string prompt;
            try {
                prompt = build_prompt(f, obs, lib);
            } catch (const Error& e) {
                REQUIRE(e.kind() == ErrorKind::BudgetImpossible);
                continue;
            }
            REQUIRE(estimate_tokens(prompt) <= budget);
            REQUIRE(prompt.find("OBJECTIVE:\n" + f.objective + "\n") != std::string::npos);
            REQUIRE(prompt.find("PREVIOUS ACTIONS:\n" + format_history(f)) != std::string::npos);
            const auto full = serialize_elements(obs);
            if (prompt.find(full + "\nURL:") == std::string::npos)
                REQUIRE(prompt.find(std::string(kTruncationMarker) + "\nURL:") != std::string::npos);
        }
    }

    TEST_CASE("budget impossible when fixed parts exceed it")
    {
        PolicyLibrary lib;
        lib.add(spec("p", {}, 50));
        CHECK_THROWS_AS(build_prompt(frame(lib, "p", "q"), page(1), lib), Error);
    }

    TEST_CASE("history numbering skips observations")
    {
        PolicyLibrary lib;
        lib.add(spec("p"));
        auto f = frame(lib, "p", "q");
        f.history.push_back(history::Observed{"d", "u"});
        f.history.push_back(history::Acted{"", actions::Note{"x"}});
        f.history.push_back(history::Observed{"d", "u"});
        f.history.push_back(history::Acted{"", actions::Stop{""}});
        CHECK(format_history(f) == "1 = note [x]\n2 = stop []");
    }

    TEST_CASE("digest is capped")
    {
        const auto obs = page(100);
        const auto d = observation_digest(obs);
        CHECK(std::count(d.begin(), d.end(), '\n') == static_cast<long>(kDigestElementLines));
        std::string expected = obs.url;
        for (std::size_t i = 0; i < kDigestElementLines; ++i)
            expected += "\n" + serialize_elements(Observation{{obs.elements[i]}, ""});
        CHECK(d == expected);
    }

    TEST_CASE("spec JSON round trip")
    {
        auto s = spec("fill_payment", {"a", "b"}, 1234);
        CHECK(policy_spec_from_json(policy_spec_to_json(s)) == s);
        CHECK_THROWS_AS(policy_spec_from_json("{\"name\": 1}"), Error);
        CHECK_THROWS_AS(policy_spec_from_json("not json"), Error);
    }

    TEST_CASE("shipped library")
    {
        const auto lib = load_library(std::filesystem::path(STACKAGENT_DATA_DIR) / "policies");
        CHECK(lib.find("crm_agent") != nullptr);
        CHECK(lib.callable_names(*lib.get("crm_agent")).count("find_flight") == 1);
        CHECK(lib.callable_names(*lib.get("search_list")).count("search_list") == 1);
        const auto flat = make_flat_spec(lib);
        CHECK(flat.callable.empty());
        CHECK(flat.prompt_budget == 8000);
        std::size_t examples = 0;
        for (const auto& n : lib.names_in_order()) examples += lib.get(n)->examples.size();
        CHECK(flat.examples.size() == examples);
    }
}
