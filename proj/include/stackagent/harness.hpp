#pragma once

#include "stackagent/crm.hpp"
#include "stackagent/stack_machine.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stackagent::harness {

/// What the agent loop needs from a web environment.
class Environment {
public:
    virtual ~Environment() = default;
    virtual Observation reset() = 0;
    /// Throws Error(NoSuchElement) for an action on a missing element.
    virtual Observation apply(const Action& action) = 0;
    virtual Observation observe() const = 0;
    virtual void finish() = 0;
    virtual crm::EvalResult evaluate() const = 0;
};

/// One scenario of an in-process simulator.
class CrmEnvironment : public Environment {
public:
    CrmEnvironment(crm::Simulator& simulator, std::string scenario_id);

    Observation reset() override;
    Observation apply(const Action& action) override;
    Observation observe() const override;
    void finish() override;
    crm::EvalResult evaluate() const override;

private:
    crm::Simulator& simulator_;
    std::string id_;
};

enum class AgentVariant { Stacked, Flat };
std::string_view to_string(AgentVariant variant);
/// Throws Error(ConfigInvalid).
AgentVariant agent_variant_from_string(std::string_view name);

inline constexpr std::string_view kStackedRoot = "crm_agent";
inline constexpr std::string_view kFlatRoot = "flat_agent";

/// Errors caused by the model backend or configuration rather than by the
/// agent's behaviour. A run containing one exits non-zero.
bool is_infrastructure_error(ErrorKind kind);

struct EpisodeOptions {
    Limits limits;
    SamplingConfig sampling;
    PromptOptions prompt;
    /// Trace timestamps. Defaults to a logical counter so traces are reproducible.
    Clock clock;
};

struct EpisodeRecord {
    crm::Scenario scenario;
    std::uint64_t seed = 0;
    AgentVariant agent = AgentVariant::Stacked;
    int suc = 0;
    double prog = 0.0;
    std::size_t subgoals_hit = 0;
    std::size_t subgoals_total = 0;
    std::size_t num_actions = 0;
    TokenCount prompt_tokens_total = 0;
    TokenCount completion_tokens_total = 0;
    std::size_t model_calls = 0;
    std::size_t max_depth = 0;
    std::string answer;
    std::optional<ErrorKind> failure;
    std::string failure_message;
    /// JSONL trace, one event per line.
    std::vector<std::string> steps;
};

/// Algorithm loop: step the stack machine, send page operations to the
/// environment, stop on Finished or Failed, then evaluate. The environment
/// must already be reset. Errors end up in record.failure.
EpisodeRecord run_episode(Environment& env, const PolicyLibrary& library, std::string_view root_name,
                          const std::string& objective, Provider& provider, const EpisodeOptions& options = {});

/// Gold behaviour of the sample library as a scripted provider: the root
/// delegates each gold phase to its skill, skills emit the phase actions.
/// The flat variant emits the whole gold trace from a single stream.
ScriptedProvider gold_provider(const crm::Scenario& scenario, AgentVariant agent);

/// The library an agent variant runs with: the sample library itself, or a
/// single flat policy built from it.
PolicyLibrary library_for(const PolicyLibrary& sample, AgentVariant agent);

/// Runs one episode on `scenario` in a fresh simulator and fills in the
/// scenario fields of the record.
EpisodeRecord run_crm_episode(const crm::Scenario& scenario, std::uint64_t seed, AgentVariant agent,
                              const PolicyLibrary& agent_library, Provider& provider,
                              const EpisodeOptions& options = {});

/// Metrics recomputed from a JSONL trace by re-executing its environment
/// actions against a freshly generated scenario.
struct ReplayResult {
    int suc = 0;
    double prog = 0.0;
    std::size_t subgoals_hit = 0;
    std::size_t num_actions = 0;
    TokenCount prompt_tokens_total = 0;
    TokenCount completion_tokens_total = 0;
    std::optional<ErrorKind> failure;
    bool operator==(const ReplayResult&) const = default;
};

ReplayResult replay_trace(const std::vector<std::string>& lines);
ReplayResult replay_trace_file(const std::filesystem::path& path);
/// The same fields taken from a live record.
ReplayResult summary_of(const EpisodeRecord& record);

void write_trace(const EpisodeRecord& record, const std::filesystem::path& path);
/// Compact JSON summary of a record (no trace).
std::string record_to_json(const EpisodeRecord& record);

// Suites ----------------------------------------------------------------------

enum class ProviderKind { Scripted, Http };

struct SuiteConfig {
    std::vector<crm::ScenarioKind> kinds{crm::kAllKinds.begin(), crm::kAllKinds.end()};
    std::size_t seeds = 20;
    std::uint64_t master_seed = 0;
    AgentVariant agent = AgentVariant::Stacked;
    ProviderKind provider = ProviderKind::Scripted;
    std::filesystem::path library;
    std::filesystem::path output_dir;
    std::size_t workers = 1;
    Limits limits;
    SamplingConfig sampling;
    bool chain_of_thought = true;
    bool wall_clock = false;
    std::string endpoint_url;
    std::string model_name;
};

/// Keys: kinds, seeds, master_seed, agent, provider, library, output_dir,
/// workers, limits{max_depth, max_internal_transitions, max_env_actions},
/// endpoint_url, model_name, temperature, n, max_tokens, chain_of_thought,
/// wall_clock. Relative paths resolve against `base_dir`.
/// Throws Error(ConfigInvalid).
SuiteConfig suite_config_from_json(std::string_view json_text, const std::filesystem::path& base_dir = {});
SuiteConfig load_suite_config(const std::filesystem::path& path);

/// Seed i of a suite; the same for every kind.
std::uint64_t suite_seed(std::uint64_t master_seed, std::size_t index);

struct MetricsRow {
    std::string kind;
    std::size_t episodes = 0;
    double suc = 0.0;
    double prog = 0.0;
    double num_actions = 0.0;
    double prompt_tokens = 0.0;
    double completion_tokens = 0.0;
};

struct MetricsTable {
    std::string agent;
    std::vector<MetricsRow> rows; // one per kind, in kind order, then "ALL"
    std::size_t infrastructure_errors = 0;
};

/// Means over records. Sums are taken over integers, so the result does not
/// depend on record order.
MetricsTable aggregate(const std::vector<EpisodeRecord>& records);
std::string metrics_to_json(const MetricsTable& table);
std::string metrics_to_tsv(const MetricsTable& table);

/// Counts of per-trajectory total tokens (prompt + completion) in bins of
/// `bin_width`, as "bin_start\tbin_end\tcount" lines with a header.
std::string token_histogram(const std::vector<EpisodeRecord>& records, TokenCount bin_width = 5000);

struct SuiteResult {
    std::vector<EpisodeRecord> records; // kind order, then seed index
    MetricsTable table;
};

/// Runs every (kind, seed) pair, using up to config.workers threads. When
/// output_dir is set writes metrics.json, metrics.tsv, token_histogram.tsv
/// and traces/<KIND>_<index>.jsonl.
SuiteResult run_suite(const SuiteConfig& config);

} // namespace stackagent::harness
