#include "gen.hpp"
#include "stackagent/error.hpp"
#include "stackagent/harness.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

using namespace stackagent;
using namespace stackagent::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kData = STACKAGENT_DATA_DIR;

const PolicyLibrary& sample()
{
    static const PolicyLibrary lib = load_library(kData / "policies");
    return lib;
}

EpisodeRecord gold_episode(crm::ScenarioKind kind, std::uint64_t seed, AgentVariant agent)
{
    const auto s = crm::generate_scenario(kind, seed);
    auto provider = gold_provider(s, agent);
    return run_crm_episode(s, seed, agent, library_for(sample(), agent), provider);
}

fs::path temp_dir(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("stackagent_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_SUITE("harness")
{
    TEST_CASE("gold episodes succeed for both variants")
    {
        for (auto agent : {AgentVariant::Stacked, AgentVariant::Flat}) {
            for (auto kind : crm::kAllKinds) {
                const auto r = gold_episode(kind, 12, agent);
                INFO(to_string(agent) << " " << crm::to_string(kind) << ": " << r.failure_message);
                CHECK_FALSE(r.failure);
                CHECK(r.suc == 1);
                CHECK(r.prog == 1.0);
                CHECK(r.num_actions == crm::gold_trace(r.scenario).size());
                CHECK(r.answer == crm::gold_answer(r.scenario));
                CHECK(r.max_depth == (agent == AgentVariant::Stacked ? 2u : 1u));
            }
        }
    }

    TEST_CASE("trace events")
    {
        const auto r = gold_episode(crm::ScenarioKind::FindBooking, 4, AgentVariant::Stacked);
        REQUIRE(r.steps.size() >= 3);
        const auto first = nlohmann::json::parse(r.steps.front());
        CHECK(first.at("event") == "episode_start");
        CHECK(first.at("kind") == "FIND_BOOKING");
        CHECK(first.at("root") == "crm_agent");
        const auto last = nlohmann::json::parse(r.steps.back());
        CHECK(last.at("event") == "episode_end");
        CHECK(last.at("suc") == 1);
        std::int64_t t = -1;
        std::size_t env = 0, calls = 0;
        for (std::size_t i = 1; i < r.steps.size(); ++i) {
            const auto j = nlohmann::json::parse(r.steps[i]);
            CHECK(j.at("t").get<std::int64_t>() > t);
            t = j.at("t").get<std::int64_t>();
            if (j.at("event") == "env_action") ++env;
            if (j.at("event") == "model_call") {
                ++calls;
                for (const char* key : {"depth", "policy", "transition", "action", "reason", "prompt_tokens",
                                        "completion_tokens", "ignored_actions", "error", "response"})
                    CHECK(j.contains(key));
            }
        }
        CHECK(env == r.num_actions);
        CHECK(calls == r.model_calls);
    }

    TEST_CASE("a looping policy exhausts the action budget")
    {
        const auto s = crm::generate_scenario(crm::ScenarioKind::FindFlight, 1);
        ScriptedProvider provider;
        for (int i = 0; i < 100; ++i) provider.add_reply("flat_agent", "ACTION:\ngo_back");
        const auto r = run_crm_episode(s, 1, AgentVariant::Flat, library_for(sample(), AgentVariant::Flat), provider);
        REQUIRE(r.failure);
        CHECK(*r.failure == ErrorKind::EnvActionBudgetExceeded);
        CHECK(r.num_actions == 30);
        CHECK(r.suc == 0);
        CHECK_FALSE(is_infrastructure_error(*r.failure));
    }

    TEST_CASE("an empty script is an infrastructure error")
    {
        const auto s = crm::generate_scenario(crm::ScenarioKind::FindFlight, 1);
        ScriptedProvider provider;
        const auto r = run_crm_episode(s, 1, AgentVariant::Stacked, sample(), provider);
        REQUIRE(r.failure);
        CHECK(*r.failure == ErrorKind::ScriptExhausted);
        CHECK(is_infrastructure_error(*r.failure));
        CHECK(r.suc == 0);
    }

    TEST_CASE("clicking a missing element is logged and the episode continues")
    {
        const auto s = crm::generate_scenario(crm::ScenarioKind::FindFlight, 1);
        ScriptedProvider provider;
        provider.add_reply("flat_agent", "ACTION: click [777]");
        provider.add_reply("flat_agent", "ACTION: stop []");
        const auto r = run_crm_episode(s, 1, AgentVariant::Flat, library_for(sample(), AgentVariant::Flat), provider);
        CHECK_FALSE(r.failure);
        CHECK(r.num_actions == 1);
        bool logged = false;
        for (const auto& line : r.steps) {
            const auto j = nlohmann::json::parse(line);
            if (j.at("event") == "env_action") logged = j.at("error") == "NoSuchElement";
        }
        CHECK(logged);
    }

    TEST_CASE("replay reproduces live metrics")
    {
        for (auto kind : crm::kAllKinds) {
            const auto r = gold_episode(kind, 31, AgentVariant::Stacked);
            CHECK(replay_trace(r.steps) == summary_of(r));
        }
        const auto s = crm::generate_scenario(crm::ScenarioKind::CancelBooking, 8);
        ScriptedProvider partial;
        partial.add_reply("crm_agent", "ACTION: find_booking [" + s.details.booking->reference + "]");
        partial.add_reply("find_booking", "ACTION: type [2] [" + s.details.booking->reference + "] [0]");
        partial.add_reply("find_booking", "ACTION: click [3]");
        const auto r = run_crm_episode(s, 8, AgentVariant::Stacked, sample(), partial);
        CHECK(r.failure == ErrorKind::ScriptExhausted);
        CHECK(replay_trace(r.steps) == summary_of(r));
        CHECK(summary_of(r).prog == doctest::Approx(1.0 / 3.0));
    }

    TEST_CASE("replay rejects a trace whose scenario does not match")
    {
        auto r = gold_episode(crm::ScenarioKind::FindFlight, 2, AgentVariant::Stacked);
        auto start = nlohmann::json::parse(r.steps.front());
        start["seed"] = 3;
        r.steps.front() = start.dump();
        CHECK_THROWS_AS(replay_trace(r.steps), Error);
        CHECK_THROWS_AS(replay_trace({}), Error);
    }

    TEST_CASE("aggregation matches a direct computation")
    {
        testgen::Rng rng(17);
        std::vector<EpisodeRecord> records;
        for (int i = 0; i < 200; ++i) {
            EpisodeRecord r;
            r.scenario.kind = crm::kAllKinds[rng.below(6)];
            r.subgoals_total = crm::subgoals_for(r.scenario.kind).size();
            r.subgoals_hit = rng.below(r.subgoals_total + 1);
            r.prog = static_cast<double>(r.subgoals_hit) / static_cast<double>(r.subgoals_total);
            r.suc = r.subgoals_hit == r.subgoals_total && rng.coin();
            r.num_actions = rng.below(30);
            r.prompt_tokens_total = rng.below(100000);
            r.completion_tokens_total = rng.below(5000);
            if (rng.below(10) == 0) r.failure = rng.coin() ? ErrorKind::Transport : ErrorKind::DepthExceeded;
            records.push_back(r);
        }
        const auto table = aggregate(records);
        REQUIRE(table.rows.back().kind == "ALL");
        double prog_all = 0;
        std::size_t infra = 0;
        for (const auto& r : records) {
            prog_all += r.prog;
            infra += r.failure == ErrorKind::Transport;
        }
        CHECK(table.rows.back().prog == doctest::Approx(prog_all / records.size()).epsilon(1e-12));
        CHECK(table.infrastructure_errors == infra);
        for (const auto& row : table.rows) {
            if (row.kind == "ALL") continue;
            double suc = 0, prog = 0, tokens = 0;
            std::size_t n = 0;
            for (const auto& r : records) {
                if (crm::to_string(r.scenario.kind) != row.kind) continue;
                ++n;
                suc += r.suc;
                prog += r.prog;
                tokens += static_cast<double>(r.prompt_tokens_total);
            }
            CHECK(row.episodes == n);
            CHECK(row.suc == doctest::Approx(suc / n).epsilon(1e-12));
            CHECK(row.prog == doctest::Approx(prog / n).epsilon(1e-12));
            CHECK(row.prompt_tokens == doctest::Approx(tokens / n).epsilon(1e-12));
        }

        // Order of records must not matter, bit for bit.
        for (int k = 0; k < 20; ++k) {
            auto shuffled = records;
            for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
            CHECK(metrics_to_json(aggregate(shuffled)) == metrics_to_json(table));
        }
    }

    TEST_CASE("token histogram")
    {
        std::vector<EpisodeRecord> records(3);
        records[0].prompt_tokens_total = 100;
        records[1].prompt_tokens_total = 12000;
        records[2].prompt_tokens_total = 4999;
        records[2].completion_tokens_total = 1;
        CHECK(token_histogram(records) == "bin_start\tbin_end\tcount\n0\t5000\t1\n5000\t10000\t1\n10000\t15000\t1\n");
    }

    TEST_CASE("suite config parsing")
    {
        const auto c = suite_config_from_json(
            R"({"kinds": ["FIND_FLIGHT", "TASK_CANCEL_BOOKING"], "seeds": 3, "library": "pol", "workers": 2,
                "limits": {"max_depth": 4}, "temperature": 0.5})",
            "/base");
        CHECK(c.kinds.size() == 2);
        CHECK(c.seeds == 3);
        CHECK(c.library == fs::path("/base/pol"));
        CHECK(c.limits.max_depth == 4);
        CHECK(c.limits.max_env_actions == 30);
        CHECK(c.sampling.temperature == 0.5);

        for (const char* bad : {R"({"library": "x", "colour": 1})", R"({"seeds": 2})",
                                R"({"library": "x", "kinds": ["NOPE"]})", R"({"library": "x", "provider": "http"})",
                                R"({"library": "x", "limits": {"depth": 1}})", R"({"library": "x", "seeds": 0})",
                                "[1, 2]", "{"}) {
            INFO(bad);
            try {
                suite_config_from_json(bad);
                FAIL("expected ConfigInvalid");
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::ConfigInvalid);
            }
        }
    }

    TEST_CASE("suite outputs are byte-identical across runs and worker counts")
    {
        SuiteConfig c;
        c.kinds = {crm::ScenarioKind::BookFlight, crm::ScenarioKind::ModifyFlights};
        c.seeds = 3;
        c.master_seed = 5;
        c.library = kData / "policies";
        const auto dir_a = temp_dir("suite_a");
        c.output_dir = dir_a;
        const auto a = run_suite(c);
        c.output_dir = temp_dir("suite_b");
        c.workers = 3;
        const auto b = run_suite(c);
        REQUIRE(a.records.size() == 6);
        for (const auto* f : {"metrics.json", "metrics.tsv", "token_histogram.tsv", "episodes.jsonl",
                              "traces/BOOK_FLIGHT_000.jsonl", "traces/MODIFY_FLIGHTS_002.jsonl"}) {
            INFO(f);
            CHECK(slurp(dir_a / f) == slurp(c.output_dir / f));
            CHECK_FALSE(slurp(c.output_dir / f).empty());
        }
        CHECK(a.table.rows.back().suc == 1.0);
        CHECK(b.table.rows.back().prog == 1.0);
        CHECK(replay_trace_file(c.output_dir / "traces/BOOK_FLIGHT_001.jsonl") == summary_of(b.records[1]));
    }

    TEST_CASE("suite seeds")
    {
        CHECK(suite_seed(1, 0) != suite_seed(1, 1));
        CHECK(suite_seed(1, 0) != suite_seed(2, 0));
        CHECK(suite_seed(7, 3) == suite_seed(7, 3));
    }

    TEST_CASE("variant names")
    {
        CHECK(agent_variant_from_string("flat") == AgentVariant::Flat);
        CHECK_THROWS_AS(agent_variant_from_string("tall"), Error);
    }
}
