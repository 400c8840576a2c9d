#pragma once

#include "stackagent/action.hpp"
#include "stackagent/observation.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace stackagent {

inline constexpr TokenCount kDefaultPromptBudget = 4000;

struct PolicySpec {
    std::string name;
    /// One line; shown to callers in their "Subroutine Actions" block.
    std::string description;
    /// Template. Recognised placeholders: {general_instruction_template},
    /// {base_actions}, {policies}, {examples}.
    std::string instruction;
    std::vector<std::string> examples;
    std::vector<std::string> callable;
    TokenCount prompt_budget = kDefaultPromptBudget;

    bool operator==(const PolicySpec&) const = default;
};

namespace history {

struct Acted {
    std::string reason;
    Action action;
    bool operator==(const Acted&) const = default;
};
struct Observed {
    std::string digest;
    std::string url;
    bool operator==(const Observed&) const = default;
};
struct ChildReturned {
    actions::PolicyCall call;
    std::string value;
    bool operator==(const ChildReturned&) const = default;
};

} // namespace history

using HistoryEntry = std::variant<history::Acted, history::Observed, history::ChildReturned>;

inline constexpr std::size_t kDigestElementLines = 40;

/// URL plus the first kDigestElementLines serialized element lines.
std::string observation_digest(const Observation& obs);

struct PolicyFrame {
    std::shared_ptr<const PolicySpec> spec;
    std::string objective;
    std::vector<HistoryEntry> history;

    actions::PolicyCall as_call() const { return {spec->name, objective}; }
};

class PolicyLibrary {
public:
    /// Throws Error(DuplicateName) for a repeated or reserved name.
    void add(PolicySpec spec);

    std::shared_ptr<const PolicySpec> find(std::string_view name) const;
    /// Throws Error(UnknownPolicy).
    std::shared_ptr<const PolicySpec> get(std::string_view name) const;

    /// Every registered name.
    PolicyNames invokable_names() const;
    /// The subset of spec.callable that is registered, in declaration order.
    std::vector<std::shared_ptr<const PolicySpec>> callable_specs(const PolicySpec& spec) const;
    PolicyNames callable_names(const PolicySpec& spec) const;

    /// Checks that every callable entry names a registered policy.
    /// Throws Error(UnknownPolicy).
    void validate() const;

    const std::vector<std::string>& names_in_order() const { return order_; }
    std::size_t size() const { return order_.size(); }

private:
    std::map<std::string, std::shared_ptr<const PolicySpec>, std::less<>> specs_;
    std::vector<std::string> order_;
};

/// Functional form of PolicyLibrary::add.
PolicyLibrary register_policy(PolicyLibrary library, PolicySpec spec);

/// "k = <action>" lines, oldest first; child returns append " -> value".
std::string format_history(const PolicyFrame& frame);

struct PromptOptions {
    /// When false the response format asks for ACTION only.
    bool chain_of_thought = true;
};

/// Documentation block for the page, tab, URL and completion actions.
std::string_view base_actions_doc();
/// Shared preamble expanded for {general_instruction_template}.
std::string_view general_instruction_template();

/// Instantiated instruction followed by OBJECTIVE / OBSERVATION / URL /
/// PREVIOUS ACTIONS sections. Only the observation is shrunk to fit the
/// budget. Throws Error(BudgetImpossible).
std::string build_prompt(const PolicyFrame& frame, const Observation& obs, const PolicyLibrary& library,
                         const PromptOptions& options = {});

// File format: one JSON document per policy.
PolicySpec policy_spec_from_json(std::string_view json_text);
std::string policy_spec_to_json(const PolicySpec& spec);
PolicySpec load_policy_spec(const std::filesystem::path& path);
void save_policy_spec(const PolicySpec& spec, const std::filesystem::path& path);

/// Loads every *.json file in `dir` (sorted by file name) and validates.
PolicyLibrary load_library(const std::filesystem::path& dir);

/// Single root policy whose instruction and examples concatenate the whole
/// library and which calls nothing.
PolicySpec make_flat_spec(const PolicyLibrary& library, std::string name = "flat_agent",
                          TokenCount prompt_budget = 8000);

} // namespace stackagent
