#include "stackagent/harness.hpp"

#include "stackagent/error.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace stackagent::harness {

using ojson = nlohmann::ordered_json;

CrmEnvironment::CrmEnvironment(crm::Simulator& simulator, std::string scenario_id)
    : simulator_(simulator), id_(std::move(scenario_id))
{
}

Observation CrmEnvironment::reset() { return simulator_.reset(id_); }
Observation CrmEnvironment::apply(const Action& action) { return simulator_.apply(id_, action); }
Observation CrmEnvironment::observe() const { return simulator_.observe(id_); }
void CrmEnvironment::finish() { simulator_.finish(id_); }
crm::EvalResult CrmEnvironment::evaluate() const { return simulator_.evaluate(id_); }

std::string_view to_string(AgentVariant variant)
{
    return variant == AgentVariant::Stacked ? "stacked" : "flat";
}

AgentVariant agent_variant_from_string(std::string_view name)
{
    auto lower = detail::to_lower(detail::trim(name));
    if (lower == "stacked") return AgentVariant::Stacked;
    if (lower == "flat") return AgentVariant::Flat;
    throw Error(ErrorKind::ConfigInvalid, "agent must be 'stacked' or 'flat', got '" + std::string(name) + "'");
}

bool is_infrastructure_error(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::ModelError:
    case ErrorKind::Transport:
    case ErrorKind::ScriptExhausted:
    case ErrorKind::BudgetImpossible:
    case ErrorKind::UnknownPolicy:
    case ErrorKind::ConfigInvalid: return true;
    default: return false;
    }
}

namespace {

ojson error_field(const std::optional<ErrorKind>& kind)
{
    return kind ? ojson(std::string(to_string(*kind))) : ojson(nullptr);
}

std::optional<ErrorKind> error_from_field(const nlohmann::json& j)
{
    if (j.is_null()) return std::nullopt;
    return error_kind_from_string(j.get<std::string>());
}

} // namespace

EpisodeRecord run_episode(Environment& env, const PolicyLibrary& library, std::string_view root_name,
                          const std::string& objective, Provider& provider, const EpisodeOptions& options)
{
    EpisodeRecord record;
    std::int64_t tick = 0;
    Clock clock = options.clock ? options.clock : Clock([&tick] { return tick++; });

    auto sink = [&](const StepEvent& e, const StackState& state) {
        if (!e.response.empty() || !(e.usage == Usage{})) ++record.model_calls;
        record.max_depth = std::max(record.max_depth, state.depth());
        ojson j;
        j["event"] = "model_call";
        j["t"] = e.timestamp;
        j["depth"] = e.depth;
        j["policy"] = e.policy;
        j["transition"] = to_string(e.transition);
        j["action"] = e.action;
        j["reason"] = e.reason;
        j["prompt_tokens"] = e.usage.prompt_tokens;
        j["completion_tokens"] = e.usage.completion_tokens;
        j["ignored_actions"] = e.ignored_actions;
        j["error"] = error_field(e.error);
        j["response"] = e.response;
        record.steps.push_back(j.dump());
    };

    StackState state;
    try {
        state = init_episode(library, root_name, objective, options.limits);
    } catch (const Error& e) {
        record.failure = e.kind();
        record.failure_message = e.what();
    }
    state.sampling = options.sampling;
    state.prompt_options = options.prompt;
    record.max_depth = state.depth();

    StepContext ctx{library, provider, sink, clock};
    if (!record.failure) {
        Observation obs = env.observe();
        while (true) {
            auto out = step(state, obs, ctx);
            if (auto* act = std::get_if<outcome::EnvAction>(&out)) {
                ++record.num_actions;
                ojson j;
                j["event"] = "env_action";
                j["t"] = clock();
                j["action"] = render_action(act->action);
                try {
                    obs = env.apply(act->action);
                    j["error"] = nullptr;
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NoSuchElement) throw;
                    j["error"] = std::string(to_string(e.kind()));
                }
                record.steps.push_back(j.dump());
                continue;
            }
            if (auto* done = std::get_if<outcome::Finished>(&out)) {
                record.answer = done->answer;
                env.finish();
                break;
            }
            const auto& failed = std::get<outcome::Failed>(out);
            record.failure = failed.kind;
            record.failure_message = failed.message;
            break;
        }
    }

    record.prompt_tokens_total = state.usage.prompt_tokens;
    record.completion_tokens_total = state.usage.completion_tokens;
    const auto eval = env.evaluate();
    record.subgoals_hit = eval.subgoals_hit.size();
    record.subgoals_total = eval.subgoals_total;
    record.prog = eval.task_progress;
    record.suc = record.failure ? 0 : eval.success;

    ojson end;
    end["event"] = "episode_end";
    end["t"] = clock();
    end["answer"] = record.answer;
    end["failure"] = error_field(record.failure);
    end["failure_message"] = record.failure_message;
    end["suc"] = record.suc;
    end["prog"] = record.prog;
    end["subgoals_hit"] = record.subgoals_hit;
    end["num_actions"] = record.num_actions;
    end["prompt_tokens"] = record.prompt_tokens_total;
    end["completion_tokens"] = record.completion_tokens_total;
    record.steps.push_back(end.dump());
    return record;
}

// Gold scripts ----------------------------------------------------------------

namespace {

std::string reply(const std::string& reason, const Action& action)
{
    return "REASON:\n" + reason + "\nACTION:\n" + render_action(action);
}

std::string reason_for(const Action& action)
{
    if (const auto* t = std::get_if<actions::Type>(&action))
        return "Element " + std::to_string(t->id.value) + " is the field that needs \"" + t->text + "\".";
    if (const auto* c = std::get_if<actions::Click>(&action))
        return "Element " + std::to_string(c->id.value) + " is the control for the next step.";
    return "Continuing with the task.";
}

} // namespace

ScriptedProvider gold_provider(const crm::Scenario& scenario, AgentVariant agent)
{
    ScriptedProvider provider;
    const auto plan = crm::gold_plan(scenario);
    const std::string answer = crm::gold_answer(scenario);

    if (agent == AgentVariant::Flat) {
        const std::string stream(kFlatRoot);
        for (const auto& phase : plan)
            for (const auto& a : phase.actions) provider.add_reply(stream, reply(reason_for(a), a));
        provider.add_reply(stream, reply("All steps of the task are done.", actions::Stop{answer}));
        return provider;
    }

    const std::string root(kStackedRoot);
    for (const auto& phase : plan) {
        if (phase.instruction.empty()) {
            for (const auto& a : phase.actions) provider.add_reply(root, reply(reason_for(a), a));
            continue;
        }
        provider.add_reply(root, reply("The " + phase.skill + " skill handles the next part of the task.",
                                       actions::PolicyCall{phase.skill, phase.instruction}));
        for (const auto& a : phase.actions) provider.add_reply(phase.skill, reply(reason_for(a), a));
        provider.add_reply(phase.skill, reply("This part is complete.", actions::Stop{phase.answer}));
    }
    provider.add_reply(root, reply("All steps of the task are done.", actions::Stop{answer}));
    return provider;
}

PolicyLibrary library_for(const PolicyLibrary& sample, AgentVariant agent)
{
    if (agent == AgentVariant::Stacked) return sample;
    PolicyLibrary flat;
    flat.add(make_flat_spec(sample, std::string(kFlatRoot)));
    return flat;
}

EpisodeRecord run_crm_episode(const crm::Scenario& scenario, std::uint64_t seed, AgentVariant agent,
                              const PolicyLibrary& agent_library, Provider& provider, const EpisodeOptions& options)
{
    crm::Simulator simulator;
    simulator.add(scenario);
    CrmEnvironment env(simulator, scenario.id);
    env.reset();
    const std::string objective = crm::objective_for(scenario);
    const auto root = agent == AgentVariant::Stacked ? kStackedRoot : kFlatRoot;
    auto record = run_episode(env, agent_library, root, objective, provider, options);
    record.scenario = scenario;
    record.seed = seed;
    record.agent = agent;

    ojson start;
    start["event"] = "episode_start";
    start["kind"] = crm::to_string(scenario.kind);
    start["seed"] = seed;
    start["scenario_id"] = scenario.id;
    start["agent"] = to_string(agent);
    start["root"] = root;
    start["objective"] = objective;
    record.steps.insert(record.steps.begin(), start.dump());
    return record;
}

// Replay ------------------------------------------------------------------------

ReplayResult replay_trace(const std::vector<std::string>& lines)
{
    try {
        std::optional<crm::Simulator> simulator;
        std::string id;
        ReplayResult r;
        bool ended = false;
        for (const auto& line : lines) {
            if (detail::trim(line).empty()) continue;
            const auto j = nlohmann::json::parse(line);
            const auto event = j.at("event").get<std::string>();
            if (event == "episode_start") {
                const auto kind = crm::scenario_kind_from_string(j.at("kind").get<std::string>());
                const auto scenario = crm::generate_scenario(kind, j.at("seed").get<std::uint64_t>());
                if (scenario.id != j.at("scenario_id").get<std::string>())
                    throw Error(ErrorKind::InvalidFormat, "trace scenario id does not match its seed");
                simulator.emplace();
                simulator->add(scenario);
                simulator->reset(scenario.id);
                id = scenario.id;
            } else if (event == "model_call") {
                r.prompt_tokens_total += j.at("prompt_tokens").get<TokenCount>();
                r.completion_tokens_total += j.at("completion_tokens").get<TokenCount>();
            } else if (event == "env_action") {
                if (!simulator) throw Error(ErrorKind::InvalidFormat, "env_action before episode_start");
                ++r.num_actions;
                try {
                    simulator->apply(id, parse_action(j.at("action").get<std::string>(), {}));
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NoSuchElement) throw;
                }
            } else if (event == "episode_end") {
                r.failure = error_from_field(j.at("failure"));
                ended = true;
            }
        }
        if (!simulator || !ended) throw Error(ErrorKind::InvalidFormat, "trace is missing its start or end event");
        const auto eval = simulator->evaluate(id);
        r.prog = eval.task_progress;
        r.subgoals_hit = eval.subgoals_hit.size();
        r.suc = r.failure ? 0 : eval.success;
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidFormat, std::string("trace: ") + e.what());
    }
}

ReplayResult replay_trace_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidFormat, "cannot read trace " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return replay_trace(lines);
}

ReplayResult summary_of(const EpisodeRecord& record)
{
    return {record.suc,
            record.prog,
            record.subgoals_hit,
            record.num_actions,
            record.prompt_tokens_total,
            record.completion_tokens_total,
            record.failure};
}

void write_trace(const EpisodeRecord& record, const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write " + path.string());
    for (const auto& line : record.steps) out << line << '\n';
}

namespace {

ojson record_json(const EpisodeRecord& r)
{
    ojson j;
    j["kind"] = crm::to_string(r.scenario.kind);
    j["seed"] = r.seed;
    j["scenario_id"] = r.scenario.id;
    j["agent"] = to_string(r.agent);
    j["suc"] = r.suc;
    j["prog"] = r.prog;
    j["num_actions"] = r.num_actions;
    j["prompt_tokens"] = r.prompt_tokens_total;
    j["completion_tokens"] = r.completion_tokens_total;
    j["model_calls"] = r.model_calls;
    j["max_depth"] = r.max_depth;
    j["answer"] = r.answer;
    j["failure"] = error_field(r.failure);
    return j;
}

} // namespace

std::string record_to_json(const EpisodeRecord& record) { return record_json(record).dump(); }

// Suites ------------------------------------------------------------------------

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); }

template <typename T>
T number(const nlohmann::json& doc, const char* key, T fallback)
{
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) invalid(std::string(key) + " must be a number");
    } else {
        if (!v.is_number_unsigned()) invalid(std::string(key) + " must be a non-negative integer");
    }
    return v.get<T>();
}

std::string text(const nlohmann::json& doc, const char* key, std::string fallback = {})
{
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_string()) invalid(std::string(key) + " must be a string");
    return doc.at(key).get<std::string>();
}

bool flag(const nlohmann::json& doc, const char* key, bool fallback)
{
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_boolean()) invalid(std::string(key) + " must be true or false");
    return doc.at(key).get<bool>();
}

} // namespace

SuiteConfig suite_config_from_json(std::string_view json_text, const std::filesystem::path& base_dir)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        invalid(std::string("suite config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) invalid("suite config must be an object");

    static const std::set<std::string> known{"kinds",      "seeds",       "master_seed",      "agent",
                                             "provider",   "library",     "output_dir",       "workers",
                                             "limits",     "endpoint_url", "model_name",      "temperature",
                                             "n",          "max_tokens",  "chain_of_thought", "wall_clock"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) invalid("unknown suite config key '" + key + "'");

    SuiteConfig c;
    if (doc.contains("kinds")) {
        const auto& kinds = doc.at("kinds");
        if (!kinds.is_array() || kinds.empty()) invalid("kinds must be a non-empty list");
        c.kinds.clear();
        for (const auto& k : kinds) {
            if (!k.is_string()) invalid("kinds entries must be strings");
            c.kinds.push_back(crm::scenario_kind_from_string(k.get<std::string>()));
        }
    }
    c.seeds = number<std::size_t>(doc, "seeds", c.seeds);
    if (c.seeds == 0) invalid("seeds must be positive");
    c.master_seed = number<std::uint64_t>(doc, "master_seed", c.master_seed);
    c.agent = agent_variant_from_string(text(doc, "agent", "stacked"));
    const auto provider = detail::to_lower(text(doc, "provider", "scripted"));
    if (provider == "scripted") c.provider = ProviderKind::Scripted;
    else if (provider == "http") c.provider = ProviderKind::Http;
    else invalid("provider must be 'scripted' or 'http'");

    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        if (p.empty()) return {};
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    c.library = resolve(text(doc, "library"));
    if (c.library.empty()) invalid("library is required");
    c.output_dir = resolve(text(doc, "output_dir"));
    c.workers = number<std::size_t>(doc, "workers", c.workers);
    if (c.workers == 0) invalid("workers must be positive");

    if (doc.contains("limits")) {
        const auto& l = doc.at("limits");
        if (!l.is_object()) invalid("limits must be an object");
        for (const auto& [key, _] : l.items())
            if (key != "max_depth" && key != "max_internal_transitions" && key != "max_env_actions")
                invalid("unknown limits key '" + key + "'");
        c.limits.max_depth = number<std::size_t>(l, "max_depth", c.limits.max_depth);
        c.limits.max_internal_transitions =
            number<std::size_t>(l, "max_internal_transitions", c.limits.max_internal_transitions);
        c.limits.max_env_actions = number<std::size_t>(l, "max_env_actions", c.limits.max_env_actions);
        if (c.limits.max_depth == 0) invalid("max_depth must be positive");
    }
    c.endpoint_url = text(doc, "endpoint_url");
    c.model_name = text(doc, "model_name");
    c.sampling.temperature = number<double>(doc, "temperature", c.sampling.temperature);
    if (c.sampling.temperature < 0) invalid("temperature must be >= 0");
    c.sampling.n_candidates = static_cast<int>(number<unsigned>(doc, "n", static_cast<unsigned>(c.sampling.n_candidates)));
    if (c.sampling.n_candidates < 1) invalid("n must be >= 1");
    c.sampling.max_tokens = static_cast<int>(number<unsigned>(doc, "max_tokens", static_cast<unsigned>(c.sampling.max_tokens)));
    c.chain_of_thought = flag(doc, "chain_of_thought", c.chain_of_thought);
    c.wall_clock = flag(doc, "wall_clock", c.wall_clock);
    if (c.provider == ProviderKind::Http && c.endpoint_url.empty()) invalid("endpoint_url is required for provider http");
    return c;
}

SuiteConfig load_suite_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) invalid("cannot read suite config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return suite_config_from_json(buffer.str(), path.parent_path());
}

std::uint64_t suite_seed(std::uint64_t master_seed, std::size_t index)
{
    std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

MetricsTable aggregate(const std::vector<EpisodeRecord>& records)
{
    struct Sums {
        std::size_t n = 0, suc = 0, hits = 0, subgoal_slots = 0, actions = 0, prompt = 0, completion = 0;
        void add(const EpisodeRecord& r)
        {
            ++n;
            suc += static_cast<std::size_t>(r.suc);
            hits += r.subgoals_hit;
            subgoal_slots += r.subgoals_total;
            actions += r.num_actions;
            prompt += r.prompt_tokens_total;
            completion += r.completion_tokens_total;
        }
        MetricsRow row(std::string kind) const
        {
            auto mean = [this](std::size_t v) { return n ? static_cast<double>(v) / static_cast<double>(n) : 0.0; };
            MetricsRow out{std::move(kind), n, mean(suc), 0.0, mean(actions), mean(prompt), mean(completion)};
            // Every record of a kind has the same subgoal count, so this is the
            // mean of per-episode progress.
            out.prog = subgoal_slots ? static_cast<double>(hits) / static_cast<double>(subgoal_slots) : 0.0;
            return out;
        }
    };

    MetricsTable table;
    std::map<crm::ScenarioKind, Sums> per_kind;
    Sums all;
    std::set<std::string> agents;
    for (const auto& r : records) {
        per_kind[r.scenario.kind].add(r);
        all.add(r);
        agents.insert(std::string(to_string(r.agent)));
        if (r.failure && is_infrastructure_error(*r.failure)) ++table.infrastructure_errors;
    }
    table.agent = detail::join(std::vector<std::string>(agents.begin(), agents.end()), "+");
    for (auto kind : crm::kAllKinds) {
        auto it = per_kind.find(kind);
        if (it != per_kind.end()) table.rows.push_back(it->second.row(std::string(crm::to_string(kind))));
    }
    // The overall progress is the mean over kinds' per-episode progress, not
    // the pooled subgoal ratio, since kinds have different subgoal counts.
    auto overall = all.row("ALL");
    if (all.n) {
        double prog_sum = 0.0;
        for (const auto& row : table.rows) prog_sum += row.prog * static_cast<double>(row.episodes);
        overall.prog = prog_sum / static_cast<double>(all.n);
    }
    table.rows.push_back(overall);
    return table;
}

std::string metrics_to_json(const MetricsTable& table)
{
    ojson j;
    j["agent"] = table.agent;
    j["infrastructure_errors"] = table.infrastructure_errors;
    ojson rows = ojson::array();
    for (const auto& r : table.rows) {
        ojson row;
        row["kind"] = r.kind;
        row["episodes"] = r.episodes;
        row["suc"] = r.suc;
        row["prog"] = r.prog;
        row["num_actions"] = r.num_actions;
        row["prompt_tokens"] = r.prompt_tokens;
        row["completion_tokens"] = r.completion_tokens;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(2);
}

std::string metrics_to_tsv(const MetricsTable& table)
{
    std::ostringstream out;
    out << "kind\tepisodes\tsuc\tprog\tnum_actions\tprompt_tokens\tcompletion_tokens\n";
    char buf[256];
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%s\t%zu\t%.4f\t%.4f\t%.2f\t%.1f\t%.1f\n", r.kind.c_str(), r.episodes, r.suc,
                      r.prog, r.num_actions, r.prompt_tokens, r.completion_tokens);
        out << buf;
    }
    return out.str();
}

std::string token_histogram(const std::vector<EpisodeRecord>& records, TokenCount bin_width)
{
    if (bin_width == 0) bin_width = 1;
    std::map<TokenCount, std::size_t> bins;
    for (const auto& r : records) ++bins[(r.prompt_tokens_total + r.completion_tokens_total) / bin_width];
    std::ostringstream out;
    out << "bin_start\tbin_end\tcount\n";
    if (bins.empty()) return out.str();
    for (auto b = bins.begin()->first; b <= bins.rbegin()->first; ++b) {
        auto it = bins.find(b);
        out << b * bin_width << '\t' << (b + 1) * bin_width << '\t' << (it == bins.end() ? 0 : it->second) << '\n';
    }
    return out.str();
}

SuiteResult run_suite(const SuiteConfig& config)
{
    const PolicyLibrary sample = load_library(config.library);
    const PolicyLibrary library = library_for(sample, config.agent);

    std::unique_ptr<HttpProvider> http;
    if (config.provider == ProviderKind::Http) {
        HttpProviderConfig hc;
        hc.endpoint_url = config.endpoint_url;
        if (!config.model_name.empty()) hc.model_name = config.model_name;
        http = std::make_unique<HttpProvider>(hc);
    }

    struct Job {
        crm::ScenarioKind kind;
        std::size_t index;
    };
    std::vector<Job> jobs;
    for (auto kind : config.kinds)
        for (std::size_t i = 0; i < config.seeds; ++i) jobs.push_back({kind, i});

    EpisodeOptions options;
    options.limits = config.limits;
    options.sampling = config.sampling;
    options.prompt.chain_of_thought = config.chain_of_thought;

    std::vector<EpisodeRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto seed = suite_seed(config.master_seed, jobs[j].index);
            const auto scenario = crm::generate_scenario(jobs[j].kind, seed);
            EpisodeOptions episode_options = options;
            if (config.wall_clock) episode_options.clock = wall_clock_ms;
            if (http) {
                records[j] = run_crm_episode(scenario, seed, config.agent, library, *http, episode_options);
            } else {
                auto gold = gold_provider(scenario, config.agent);
                records[j] = run_crm_episode(scenario, seed, config.agent, library, gold, episode_options);
            }
        }
    };
    const std::size_t threads = std::min(config.workers, jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SuiteResult result{std::move(records), {}};
    result.table = aggregate(result.records);

    if (!config.output_dir.empty()) {
        const auto& dir = config.output_dir;
        std::filesystem::create_directories(dir / "traces");
        ojson episodes = ojson::array();
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            char name[64];
            std::snprintf(name, sizeof name, "%s_%03zu.jsonl", std::string(crm::to_string(jobs[j].kind)).c_str(),
                          jobs[j].index);
            write_trace(result.records[j], dir / "traces" / name);
            episodes.push_back(record_json(result.records[j]));
        }
        auto write = [&](const std::string& file, const std::string& content) {
            std::ofstream out(dir / file, std::ios::binary);
            if (!out) invalid("cannot write " + (dir / file).string());
            out << content;
        };
        write("metrics.json", metrics_to_json(result.table) + "\n");
        write("metrics.tsv", metrics_to_tsv(result.table));
        write("token_histogram.tsv", token_histogram(result.records));
        write("episodes.jsonl", [&] {
            std::string out;
            for (const auto& e : episodes) out += e.dump() + "\n";
            return out;
        }());
    }
    return result;
}

} // namespace stackagent::harness
