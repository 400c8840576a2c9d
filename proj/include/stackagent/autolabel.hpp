#pragma once

#include "stackagent/policy.hpp"
#include "stackagent/provider.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stackagent::autolabel {

struct DemoStep {
    Observation observation;
    Action action;
};

/// A recorded human episode: the task context and what was done on each page.
struct Demonstration {
    std::string context;
    std::vector<DemoStep> steps;
};

/// (policy, instruction) assigned to one timestep. `instruction` is the full
/// label line, e.g. `FILL_TEXT From "Boston"`.
struct LabeledStep {
    std::string policy;
    std::string instruction;
    bool operator==(const LabeledStep&) const = default;
};

struct LabelType {
    std::string name;  // e.g. FILL_TEXT
    std::string usage; // e.g. FILL_TEXT "description" "TEXT" - fill a text box
};

struct LabelVocab {
    std::vector<LabelType> types;
    bool contains(std::string_view name) const;
};

/// {"labels": [{"name", "usage"}]}. Throws Error(InvalidFormat | EmptyInput).
LabelVocab label_vocab_from_json(std::string_view json_text);
LabelVocab load_label_vocab(const std::filesystem::path& path);

/// A demonstration plus its labels; labels are empty for unlabeled demos.
struct LabeledDemo {
    Demonstration demo;
    std::vector<LabeledStep> labels;
};

/// {"context", "steps": [{"url", "observation", "action", "label"?}]}; the
/// observation is serialized element text, the action a rendered action line.
/// Throws Error(InvalidFormat | EmptyInput).
LabeledDemo demo_from_json(std::string_view json_text);
std::string demo_to_json(const LabeledDemo& demo);
LabeledDemo load_demo(const std::filesystem::path& path);
/// Every *.json in `dir`, sorted by file name.
std::vector<LabeledDemo> load_demos(const std::filesystem::path& dir);

/// The policy label of a line: its first token when that token is in the
/// vocabulary.
std::optional<LabeledStep> parse_label(std::string_view line, const LabelVocab& vocab);

/// Prompt asking for the label of step `index` given the previous label.
std::string autolabel_prompt(const Demonstration& demo, std::size_t index, const std::optional<LabeledStep>& previous,
                             const LabelVocab& vocab);

/// Relaxed per-step labeling: each step is labeled from its context, page,
/// action and the previous label. One reprompt per step on an unusable
/// reply, then Error(UnparseableLabel). Provider errors propagate.
std::vector<LabeledStep> autolabel(const Demonstration& demo, const LabelVocab& vocab, Provider& provider);

struct SynthesisOptions {
    std::string planner_name = "planner";
    /// Previous actions shown in each policy example.
    std::size_t history = 3;
    /// Optional reasoning per (demo index, step index), inserted into the
    /// policy examples.
    std::map<std::pair<std::size_t, std::size_t>, std::string> reasons;
};

struct SynthesizedPrompts {
    PolicySpec planner;
    std::vector<PolicySpec> policies; // first-appearance order
    /// (demo index, step index) behind each example, parallel to
    /// policies[i].examples.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> sources;
};

/// Planner examples map context and first page to the collapsed sequence of
/// policy calls; each policy's examples are all of its labeled steps.
/// Throws Error(EmptyInput).
SynthesizedPrompts synthesize_prompts(const std::vector<LabeledDemo>& labeled, const SynthesisOptions& options = {});

/// Name a label type gets as a policy, e.g. FILL_TEXT -> fill_text. Names
/// that would shadow a built-in verb get an "_element" suffix.
std::string policy_name_for(std::string_view label_type);
/// Argument part of a label line, used as the call query.
std::string label_argument(const LabeledStep& label);

/// Prompt asking why the action of step `index` was taken.
std::string reasoning_prompt(const Demonstration& demo, std::size_t index);
/// Text after the last REASONING: header of the reply, else the whole
/// trimmed reply. Throws std::out_of_range for a bad index.
std::string augment_reasoning(const Demonstration& demo, std::size_t index, Provider& provider);

} // namespace stackagent::autolabel
