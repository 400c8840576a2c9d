#include "label_oracle.hpp"
#include "stackagent/autolabel.hpp"
#include "stackagent/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace stackagent;
using namespace stackagent::autolabel;
namespace fs = std::filesystem;

namespace {

const fs::path kData = STACKAGENT_DATA_DIR;

LabelVocab vocab() { return load_label_vocab(kData / "label_vocab.json"); }

std::vector<LabeledDemo> hand_labeled() { return load_demos(kData / "demos"); }

Demonstration tiny_demo()
{
    Demonstration d;
    d.context = "Open booking ABC123";
    Observation obs;
    obs.url = "http://crm.test/#find-booking";
    obs.elements.push_back({ElementId{2}, "input_text", {{"name", "booking-reference"}, {"val", ""}}, ""});
    obs.elements.push_back({ElementId{3}, "button", {}, "Search"});
    d.steps.push_back({obs, actions::Type{ElementId{2}, "ABC123", false}});
    d.steps.push_back({obs, actions::Click{ElementId{3}}});
    return d;
}

} // namespace

TEST_SUITE("autolabel")
{
    TEST_CASE("vocabulary")
    {
        const auto v = vocab();
        CHECK(v.contains("FILL_TEXT"));
        CHECK(v.contains("CLICK"));
        CHECK_FALSE(v.contains("SCROLL"));
        CHECK_THROWS_AS(label_vocab_from_json(R"({"labels": []})"), Error);
        CHECK_THROWS_AS(label_vocab_from_json(R"({"labels": [{"name": "TWO WORDS"}]})"), Error);
        CHECK_THROWS_AS(label_vocab_from_json("[]"), Error);
    }

    TEST_CASE("label parsing")
    {
        const auto v = vocab();
        CHECK(parse_label("FILL_TEXT From \"BOS\"", v) == LabeledStep{"FILL_TEXT", "FILL_TEXT From \"BOS\""});
        CHECK(parse_label("  `CLICK Search`  ", v) == LabeledStep{"CLICK", "CLICK Search"});
        CHECK_FALSE(parse_label("PRESS Enter", v));
        CHECK_FALSE(parse_label("", v));
        CHECK(policy_name_for("CHOOSE_DATE") == "choose_date");
        CHECK(policy_name_for("CLICK") == "click_element");
        CHECK(label_argument({"CHOOSE_DATE", "CHOOSE_DATE Depart \"10/18/2024\""}) == "Depart \"10/18/2024\"");
    }

    TEST_CASE("shipped demonstrations load with labels for every step")
    {
        const auto demos = hand_labeled();
        REQUIRE(demos.size() == 5);
        const auto v = vocab();
        for (const auto& d : demos) {
            CHECK(d.labels.size() == d.demo.steps.size());
            for (const auto& l : d.labels) CHECK(v.contains(l.policy));
        }
    }

    TEST_CASE("demo JSON round trip")
    {
        for (const auto& d : hand_labeled()) {
            const auto back = demo_from_json(demo_to_json(d));
            CHECK(back.demo.context == d.demo.context);
            CHECK(back.labels == d.labels);
            REQUIRE(back.demo.steps.size() == d.demo.steps.size());
            for (std::size_t i = 0; i < d.demo.steps.size(); ++i) {
                CHECK(back.demo.steps[i].action == d.demo.steps[i].action);
                CHECK(back.demo.steps[i].observation == d.demo.steps[i].observation);
            }
        }
        CHECK_THROWS_AS(demo_from_json(R"({"context": "x", "steps": []})"), Error);
        CHECK_THROWS_AS(demo_from_json(
                            R"({"context": "x", "steps": [{"observation": "", "action": "click [1]", "label": "CLICK a"},
                                                          {"observation": "", "action": "click [1]"}]})"),
                        Error);
    }

    TEST_CASE("prompt carries the step and the previous label")
    {
        const auto d = tiny_demo();
        const auto p = autolabel_prompt(d, 1, LabeledStep{"FILL_TEXT", "FILL_TEXT Reference \"ABC123\""}, vocab());
        const auto input = p.substr(p.rfind("### Input:"));
        CHECK(input.find("CONTEXT:\nOpen booking ABC123\n") != std::string::npos);
        CHECK(input.find("CURRENT ACTION:\nclick [3]\n") != std::string::npos);
        CHECK(input.find("PREVIOUS LABEL:\nFILL_TEXT Reference \"ABC123\"\n") != std::string::npos);
        CHECK(p.substr(p.size() - 15) == "CURRENT LABEL:\n");
        CHECK(p.find("- FILL_TEXT field \"TEXT\"") != std::string::npos);
    }

    TEST_CASE("one label per step with a single reprompt")
    {
        const auto d = tiny_demo();
        ScriptedProvider p;
        p.add_reply("autolabel", "CURRENT LABEL:\nFILL_TEXT Reference \"ABC123\"");
        p.add_reply("autolabel", "hmm");
        p.add_reply("autolabel", "CLICK Search");
        const auto labels = autolabel::autolabel(d, vocab(), p);
        REQUIRE(labels.size() == 2);
        CHECK(labels[1] == LabeledStep{"CLICK", "CLICK Search"});
        CHECK(p.calls() == 3);

        ScriptedProvider bad({"FILL_TEXT x", "hmm", "still nothing"});
        try {
            autolabel::autolabel(d, vocab(), bad);
            FAIL("expected UnparseableLabel");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnparseableLabel);
        }
    }

    TEST_CASE("oracle labeler reproduces the hand labels")
    {
        const auto demos = hand_labeled();
        testgen::LabelOracle oracle(demos);
        for (const auto& d : demos) CHECK(autolabel::autolabel(d.demo, vocab(), oracle) == d.labels);
    }

    TEST_CASE("synthesis partitions the labeled steps")
    {
        const auto demos = hand_labeled();
        const auto out = synthesize_prompts(demos);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        std::size_t total = 0, examples = 0;
        for (const auto& d : demos) total += d.demo.steps.size();
        REQUIRE(out.sources.size() == out.policies.size());
        for (std::size_t p = 0; p < out.policies.size(); ++p) {
            REQUIRE(out.sources[p].size() == out.policies[p].examples.size());
            examples += out.policies[p].examples.size();
            for (const auto& src : out.sources[p]) {
                CHECK(seen.insert(src).second);
                CHECK(policy_name_for(demos[src.first].labels[src.second].policy) == out.policies[p].name);
            }
        }
        CHECK(examples == total);
        CHECK(seen.size() == total);
        CHECK(out.planner.examples.size() == demos.size());
        CHECK(out.planner.callable.size() == out.policies.size());

        // The synthesized prompts form a valid library.
        PolicyLibrary lib;
        lib.add(out.planner);
        for (const auto& p : out.policies) lib.add(p);
        CHECK_NOTHROW(lib.validate());
    }

    TEST_CASE("planner calls collapse repeated labels")
    {
        const auto out = synthesize_prompts(hand_labeled());
        const auto& first = out.planner.examples.front();
        CHECK(first.find("1 = fill_text [From \"BOS\"]\n2 = fill_text [To") != std::string::npos);
    }

    TEST_CASE("reasons are inserted into examples")
    {
        auto demos = hand_labeled();
        SynthesisOptions options;
        options.reasons[{0, 0}] = "The origin field is empty.";
        const auto out = synthesize_prompts(demos, options);
        CHECK(out.policies.front().examples.front().find("Reason: The origin field is empty.\nNext action:") !=
              std::string::npos);
        CHECK_THROWS_AS(synthesize_prompts({}), Error);
        demos[0].labels.pop_back();
        CHECK_THROWS_AS(synthesize_prompts(demos), Error);
    }

    TEST_CASE("reasoning augmentation")
    {
        const auto d = tiny_demo();
        ScriptedProvider p;
        p.add_reply("reasoning", "Sure.\nREASONING: The reference must be entered first.");
        p.add_reply("reasoning", "Plain answer.");
        CHECK(augment_reasoning(d, 0, p) == "The reference must be entered first.");
        CHECK(augment_reasoning(d, 1, p) == "Plain answer.");
        CHECK_THROWS_AS(augment_reasoning(d, 5, p), std::out_of_range);
        CHECK(reasoning_prompt(d, 1).find("PREVIOUS ACTIONS:\n1 = type [2] [ABC123] [0]") != std::string::npos);
    }
}
