#include "stackagent/autolabel.hpp"

#include "stackagent/error.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace stackagent::autolabel {

namespace {

constexpr TokenCount kPageBudget = 1500;
constexpr std::size_t kExamplePageLines = 12;

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidFormat, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string page_text(const Observation& obs, TokenCount budget = kPageBudget)
{
    return truncate_to_budget(serialize_elements(obs), budget);
}

std::string first_lines(const Observation& obs, std::size_t n)
{
    const auto text = serialize_elements(obs);
    auto lines = detail::split_lines(text);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < lines.size() && i < n; ++i) kept.emplace_back(lines[i]);
    if (lines.size() > n) kept.emplace_back(kTruncationMarker);
    return detail::join(kept, "\n");
}

std::string previous_actions(const Demonstration& demo, std::size_t index, std::size_t k)
{
    std::vector<std::string> lines;
    const std::size_t from = index > k ? index - k : 0;
    for (std::size_t i = from; i < index; ++i)
        lines.push_back(std::to_string(i - from + 1) + " = " + render_action(demo.steps[i].action));
    return detail::join(lines, "\n");
}

// The line following the last `header` (or the rest of the header line).
std::optional<std::string> section_after(std::string_view reply, std::string_view header)
{
    auto lines = detail::split_lines(reply);
    std::optional<std::size_t> at;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (detail::istarts_with(detail::trim(lines[i]), header)) at = i;
    if (!at) return std::nullopt;
    auto inline_rest = detail::trim(detail::trim(lines[*at]).substr(header.size()));
    if (!inline_rest.empty()) return std::string(inline_rest);
    for (std::size_t i = *at + 1; i < lines.size(); ++i) {
        auto t = detail::trim(lines[i]);
        if (!t.empty()) return std::string(t);
    }
    return std::string{};
}

constexpr std::string_view kAutolabelInstruction = R"(### Instruction:
You sort the steps of a recorded web session into skills. For one step you get:
- CONTEXT: what the user set out to do, stated directly or implied by a conversation
- CURRENT BROWSER CONTENT: the page the step happened on, one element per line
- CURRENT ACTION: the action taken on that page
- PREVIOUS LABEL: the label of the step before, empty for the first step

Answer with one label line. A label is one of:
{label_types}

A label stays the same while the actions still serve one skill, for instance a click that focuses a field that is being filled.

Example:

### Input:
CONTEXT:
Find flights from BOS to ORD leaving 12/01/2023 and coming back 12/12/2023
CURRENT BROWSER CONTENT:
<text id=1>Search flights</text>
<input_text id=2 name="flight-from" val= />
<input_text id=3 name="flight-to" val= />
<button id=6>Search</button>
CURRENT ACTION:
type [2] [BOS] [0]
PREVIOUS LABEL:

### Response:
CURRENT LABEL:
FILL_TEXT From "BOS"

Example:

### Input:
CONTEXT:
Find flights from BOS to ORD leaving 12/01/2023 and coming back 12/12/2023
CURRENT BROWSER CONTENT:
<text id=1>Search flights</text>
<input_text id=2 name="flight-from" val=BOS />
<input_text id=3 name="flight-to" val=ORD />
<input_text id=4 name="departure-date" type="datepicker" val=12/01/2023 />
<input_text id=5 name="return-date" type="datepicker" val=12/12/2023 />
<button id=6>Search</button>
CURRENT ACTION:
click [6]
PREVIOUS LABEL:
CHOOSE_DATE Return "12/12/2023"

### Response:
CURRENT LABEL:
CLICK Search)";

constexpr std::string_view kReasoningInstruction = R"(### Instruction:
A person completed a web task; one of their actions is shown below together with the task context, the page it was taken on and the actions before it. In one or two sentences, say why this action was the right thing to do at that point. Start your answer with REASONING:)";

} // namespace

bool LabelVocab::contains(std::string_view name) const
{
    return std::any_of(types.begin(), types.end(), [&](const LabelType& t) { return t.name == name; });
}

LabelVocab label_vocab_from_json(std::string_view json_text)
{
    LabelVocab vocab;
    try {
        auto doc = nlohmann::json::parse(json_text);
        for (const auto& entry : doc.at("labels"))
            vocab.types.push_back({entry.at("name").get<std::string>(), entry.value("usage", "")});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidFormat, std::string("label vocabulary: ") + e.what());
    }
    if (vocab.types.empty()) throw Error(ErrorKind::EmptyInput, "label vocabulary is empty");
    for (const auto& t : vocab.types)
        if (t.name.empty() || t.name.find(' ') != std::string::npos)
            throw Error(ErrorKind::InvalidFormat, "label names must be single non-empty tokens");
    return vocab;
}

LabelVocab load_label_vocab(const std::filesystem::path& path) { return label_vocab_from_json(read_file(path)); }

LabeledDemo demo_from_json(std::string_view json_text)
{
    LabeledDemo out;
    try {
        auto doc = nlohmann::json::parse(json_text);
        out.demo.context = doc.at("context").get<std::string>();
        bool any_label = false;
        for (const auto& step : doc.at("steps")) {
            DemoStep s;
            s.observation.url = step.value("url", "");
            s.observation.elements = parse_elements(step.at("observation").get<std::string>());
            s.action = parse_action(step.at("action").get<std::string>(), {});
            out.demo.steps.push_back(std::move(s));
            if (step.contains("label")) {
                any_label = true;
                const auto line = std::string(detail::trim(step.at("label").get<std::string>()));
                const auto space = line.find(' ');
                out.labels.push_back({line.substr(0, space), line});
            } else if (any_label) {
                throw Error(ErrorKind::InvalidFormat, "either every step has a label or none does");
            }
        }
        if (any_label && out.labels.size() != out.demo.steps.size())
            throw Error(ErrorKind::InvalidFormat, "either every step has a label or none does");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidFormat, std::string("demonstration: ") + e.what());
    }
    if (out.demo.steps.empty()) throw Error(ErrorKind::EmptyInput, "demonstration has no steps");
    return out;
}

std::string demo_to_json(const LabeledDemo& demo)
{
    nlohmann::ordered_json doc;
    doc["context"] = demo.demo.context;
    doc["steps"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < demo.demo.steps.size(); ++i) {
        const auto& s = demo.demo.steps[i];
        nlohmann::ordered_json step;
        step["url"] = s.observation.url;
        step["observation"] = serialize_elements(s.observation);
        step["action"] = render_action(s.action);
        if (i < demo.labels.size()) step["label"] = demo.labels[i].instruction;
        doc["steps"].push_back(std::move(step));
    }
    return doc.dump(2);
}

LabeledDemo load_demo(const std::filesystem::path& path) { return demo_from_json(read_file(path)); }

std::vector<LabeledDemo> load_demos(const std::filesystem::path& dir)
{
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<LabeledDemo> out;
    for (const auto& f : files) out.push_back(load_demo(f));
    return out;
}

std::optional<LabeledStep> parse_label(std::string_view line, const LabelVocab& vocab)
{
    auto t = detail::trim(line);
    if (t.size() >= 2 && t.front() == '`' && t.back() == '`') t = detail::trim(t.substr(1, t.size() - 2));
    const auto head = t.substr(0, t.find(' '));
    if (head.empty() || !vocab.contains(head)) return std::nullopt;
    return LabeledStep{std::string(head), std::string(t)};
}

std::string autolabel_prompt(const Demonstration& demo, std::size_t index, const std::optional<LabeledStep>& previous,
                             const LabelVocab& vocab)
{
    const auto& step = demo.steps.at(index);
    std::vector<std::string> types;
    for (const auto& t : vocab.types) types.push_back("- " + (t.usage.empty() ? t.name : t.usage));
    std::string prompt(kAutolabelInstruction);
    detail::replace_all(prompt, "{label_types}", detail::join(types, "\n"));
    prompt += "\n\n### Input:\nCONTEXT:\n" + demo.context;
    prompt += "\nCURRENT BROWSER CONTENT:\n" + page_text(step.observation);
    prompt += "\nCURRENT ACTION:\n" + render_action(step.action);
    prompt += "\nPREVIOUS LABEL:\n" + (previous ? previous->instruction : std::string{});
    prompt += "\n\n### Response:\nCURRENT LABEL:\n";
    return prompt;
}

std::vector<LabeledStep> autolabel(const Demonstration& demo, const LabelVocab& vocab, Provider& provider)
{
    if (vocab.types.empty()) throw Error(ErrorKind::EmptyInput, "label vocabulary is empty");
    std::vector<LabeledStep> labels;
    std::optional<LabeledStep> previous;
    for (std::size_t i = 0; i < demo.steps.size(); ++i) {
        CompletionRequest request;
        request.prompt = autolabel_prompt(demo, i, previous, vocab);
        request.stream = "autolabel";
        std::optional<LabeledStep> label;
        std::string last_reply;
        for (int attempt = 0; attempt < 2 && !label; ++attempt) {
            last_reply = select_candidate(provider.complete(request));
            auto line = section_after(last_reply, "CURRENT LABEL:");
            if (!line) {
                for (auto l : detail::split_lines(last_reply)) {
                    if (!detail::trim(l).empty()) {
                        line = std::string(detail::trim(l));
                        break;
                    }
                }
            }
            if (line) label = parse_label(*line, vocab);
        }
        if (!label)
            throw Error(ErrorKind::UnparseableLabel,
                        "step " + std::to_string(i) + ": no label in reply '" + last_reply + "'");
        labels.push_back(*label);
        previous = label;
    }
    return labels;
}

std::string policy_name_for(std::string_view label_type)
{
    auto name = detail::to_lower(label_type);
    // CLICK would otherwise shadow the built-in click action.
    if (is_reserved_verb(name)) name += "_element";
    return name;
}

std::string label_argument(const LabeledStep& label)
{
    auto rest = std::string_view(label.instruction).substr(std::min(label.policy.size(), label.instruction.size()));
    return std::string(detail::trim(rest));
}

SynthesizedPrompts synthesize_prompts(const std::vector<LabeledDemo>& labeled, const SynthesisOptions& options)
{
    if (labeled.empty()) throw Error(ErrorKind::EmptyInput, "no labeled demonstrations");
    SynthesizedPrompts out;
    std::map<std::string, std::size_t> index_of;

    out.planner.name = options.planner_name;
    out.planner.description = "Breaks a task into calls to the learned skills";
    out.planner.instruction =
        "{general_instruction_template}\n\nSolve the task by calling one skill at a time. Each skill takes a short "
        "query naming the field or button and the value to use.";

    for (std::size_t d = 0; d < labeled.size(); ++d) {
        const auto& [demo, labels] = labeled[d];
        if (demo.steps.empty()) throw Error(ErrorKind::EmptyInput, "demonstration " + std::to_string(d) + " has no steps");
        if (labels.size() != demo.steps.size())
            throw Error(ErrorKind::EmptyInput, "demonstration " + std::to_string(d) + " is not fully labeled");

        std::vector<std::string> calls;
        const LabeledStep* last = nullptr;
        for (std::size_t t = 0; t < labels.size(); ++t) {
            const auto& label = labels[t];
            const auto name = policy_name_for(label.policy);
            if (!last || !(*last == label)) {
                calls.push_back(std::to_string(calls.size() + 1) + " = " +
                                render_action(actions::PolicyCall{name, label_argument(label)}));
            }
            last = &label;

            auto [it, inserted] = index_of.try_emplace(name, out.policies.size());
            if (inserted) {
                PolicySpec spec;
                spec.name = name;
                spec.description = "Carries out one " + label.policy + " step: " +
                                   "the query names the element and the value";
                spec.instruction = "{general_instruction_template}\n\nYou handle " + label.policy +
                                   " steps. Stop with an empty answer once the query is done.";
                out.policies.push_back(std::move(spec));
                out.sources.emplace_back();
                out.planner.callable.push_back(name);
            }

            std::string example = "Query: " + label_argument(label) + "\nPage:\n" +
                                  first_lines(demo.steps[t].observation, kExamplePageLines) + "\nEarlier actions:\n" +
                                  previous_actions(demo, t, options.history);
            if (auto r = options.reasons.find({d, t}); r != options.reasons.end()) example += "\nReason: " + r->second;
            example += "\nNext action: " + render_action(demo.steps[t].action);
            out.policies[it->second].examples.push_back(std::move(example));
            out.sources[it->second].emplace_back(d, t);
        }

        out.planner.examples.push_back("Task: " + demo.context + "\nPage:\n" +
                                       first_lines(demo.steps.front().observation, kExamplePageLines) +
                                       "\nCalls:\n" + detail::join(calls, "\n"));
    }
    return out;
}

std::string reasoning_prompt(const Demonstration& demo, std::size_t index)
{
    const auto& step = demo.steps.at(index);
    std::string prompt(kReasoningInstruction);
    prompt += "\n\n### Input:\nCONTEXT:\n" + demo.context;
    prompt += "\nBROWSER CONTENT:\n" + page_text(step.observation);
    prompt += "\nURL:\n" + step.observation.url;
    prompt += "\nPREVIOUS ACTIONS:\n" + previous_actions(demo, index, index);
    prompt += "\nCURRENT ACTION:\n" + render_action(step.action);
    prompt += "\n\n### Response:\n";
    return prompt;
}

std::string augment_reasoning(const Demonstration& demo, std::size_t index, Provider& provider)
{
    if (index >= demo.steps.size()) throw std::out_of_range("augment_reasoning: step index out of range");
    CompletionRequest request;
    request.prompt = reasoning_prompt(demo, index);
    request.stream = "reasoning";
    const auto reply = select_candidate(provider.complete(request));

    const auto lines = detail::split_lines(reply);
    std::optional<std::size_t> at;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (detail::istarts_with(detail::trim(lines[i]), "REASONING:")) at = i;
    if (!at) return std::string(detail::trim(reply));
    std::vector<std::string> rest;
    rest.emplace_back(detail::trim(detail::trim(lines[*at]).substr(10)));
    for (std::size_t i = *at + 1; i < lines.size(); ++i) rest.emplace_back(lines[i]);
    return std::string(detail::trim(detail::join(rest, "\n")));
}

} // namespace stackagent::autolabel
