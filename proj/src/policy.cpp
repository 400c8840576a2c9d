#include "stackagent/policy.hpp"

#include "stackagent/error.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace stackagent {

namespace {

constexpr std::string_view kBaseActions = R"(Page Operation Actions:
`click [id]`: Click the element with the given id.
`type [id] [content] [press_enter_after=0|1]`: Type content into the field with the given id. Enter is pressed afterwards unless the last argument is 0.
`hover [id]`: Move the pointer over the element with the given id.
`press [key_comb]`: Press a key combination, e.g. Ctrl+v.
`scroll [direction=down|up]`: Scroll the page.
`note [content]`: Record something you want to remember. Notes appear in your PREVIOUS ACTIONS.
`go_back`: Return to the previously viewed page.

Tab Management Actions:
`new_tab`: Open an empty tab.
`tab_focus [tab_index]`: Focus the tab with the given index.
`close_tab`: Close the current tab.

URL Navigation Actions:
`goto [url]`: Open the given URL.
`go_forward`: Undo a go_back.

Completion Action:
`stop [answer]`: Finish. Put the answer in the brackets if the objective asks for one; leave them empty otherwise.)";

constexpr std::string_view kGeneralTemplate = R"(You are an assistant that operates a web browser on behalf of a user. You make progress by issuing one action per turn.

The actions available to you:
{base_actions}

{policies}

{examples}

Each turn you receive:
    OBJECTIVE - what you must achieve
    OBSERVATION - a simplified text form of the current page, one element per line
    URL - the address of the current page
    PREVIOUS ACTIONS - what you already did, with the value a subroutine returned, e.g. 1 = find_booking [ABC123] -> Booking ABC123 found

{response_format})";

constexpr std::string_view kFormatWithReason =
    "Answer in exactly this format and issue a single action:\nREASON:\nwhy the action below is the right next step\nACTION:\nthe action";
constexpr std::string_view kFormatActionOnly =
    "Answer in exactly this format and issue a single action:\nACTION:\nthe action";

std::string policies_block(const PolicySpec& spec, const PolicyLibrary& library)
{
    auto callees = library.callable_specs(spec);
    if (callees.empty()) return {};
    std::string out = "Subroutine Actions:";
    for (const auto& callee : callees) {
        out += "\n`" + callee->name + " [query]`: " + callee->description;
    }
    return out;
}

std::string examples_block(const PolicySpec& spec)
{
    if (spec.examples.empty()) return {};
    std::string out = "Examples:";
    for (std::size_t i = 0; i < spec.examples.size(); ++i) {
        out += "\n\nExample " + std::to_string(i + 1) + "\n" + spec.examples[i];
    }
    return out;
}

// Collapses runs of three or more newlines left by empty blocks.
std::string squeeze_blank_lines(std::string s)
{
    std::string out;
    out.reserve(s.size());
    int newlines = 0;
    for (char c : s) {
        if (c == '\n') {
            if (++newlines > 2) continue;
        } else {
            newlines = 0;
        }
        out += c;
    }
    return out;
}

std::string instantiate(const PolicySpec& spec, const PolicyLibrary& library, const PromptOptions& options)
{
    std::string text = spec.instruction;
    detail::replace_all(text, "{general_instruction_template}", kGeneralTemplate);
    detail::replace_all(text, "{response_format}",
                        options.chain_of_thought ? kFormatWithReason : kFormatActionOnly);
    detail::replace_all(text, "{base_actions}", kBaseActions);

    auto policies = policies_block(spec, library);
    if (text.find("{policies}") != std::string::npos) detail::replace_all(text, "{policies}", policies);
    else if (!policies.empty()) text += "\n\n" + policies;

    auto examples = examples_block(spec);
    if (text.find("{examples}") != std::string::npos) detail::replace_all(text, "{examples}", examples);
    else if (!examples.empty()) text += "\n\n" + examples;

    return squeeze_blank_lines(std::string(detail::rtrim(text)));
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidFormat, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string observation_digest(const Observation& obs)
{
    const auto text = serialize_elements(obs);
    auto lines = detail::split_lines(text);
    std::string out = obs.url;
    for (std::size_t i = 0; i < lines.size() && i < kDigestElementLines; ++i) {
        out += '\n';
        out += lines[i];
    }
    return out;
}

void PolicyLibrary::add(PolicySpec spec)
{
    if (spec.name.empty()) throw Error(ErrorKind::DuplicateName, "policy name must not be empty");
    if (is_reserved_verb(spec.name))
        throw Error(ErrorKind::DuplicateName, "policy name '" + spec.name + "' collides with a built-in action");
    if (specs_.count(spec.name)) throw Error(ErrorKind::DuplicateName, "policy '" + spec.name + "' already registered");
    order_.push_back(spec.name);
    auto name = spec.name;
    specs_.emplace(std::move(name), std::make_shared<const PolicySpec>(std::move(spec)));
}

std::shared_ptr<const PolicySpec> PolicyLibrary::find(std::string_view name) const
{
    auto it = specs_.find(name);
    return it == specs_.end() ? nullptr : it->second;
}

std::shared_ptr<const PolicySpec> PolicyLibrary::get(std::string_view name) const
{
    auto spec = find(name);
    if (!spec) throw Error(ErrorKind::UnknownPolicy, "no policy named '" + std::string(name) + "'");
    return spec;
}

PolicyNames PolicyLibrary::invokable_names() const
{
    return PolicyNames(order_.begin(), order_.end());
}

std::vector<std::shared_ptr<const PolicySpec>> PolicyLibrary::callable_specs(const PolicySpec& spec) const
{
    std::vector<std::shared_ptr<const PolicySpec>> out;
    for (const auto& name : spec.callable) {
        auto callee = find(name);
        if (!callee) continue;
        if (std::find(out.begin(), out.end(), callee) == out.end()) out.push_back(callee);
    }
    return out;
}

PolicyNames PolicyLibrary::callable_names(const PolicySpec& spec) const
{
    PolicyNames out;
    for (const auto& callee : callable_specs(spec)) out.insert(callee->name);
    return out;
}

void PolicyLibrary::validate() const
{
    for (const auto& name : order_) {
        const auto& spec = *specs_.at(name);
        for (const auto& callee : spec.callable) {
            if (!specs_.count(callee))
                throw Error(ErrorKind::UnknownPolicy,
                            "policy '" + name + "' lists unregistered callable '" + callee + "'");
        }
    }
}

PolicyLibrary register_policy(PolicyLibrary library, PolicySpec spec)
{
    library.add(std::move(spec));
    return library;
}

std::string format_history(const PolicyFrame& frame)
{
    std::string out;
    std::size_t k = 0;
    for (const auto& entry : frame.history) {
        std::string line;
        if (const auto* acted = std::get_if<history::Acted>(&entry)) {
            line = render_action(acted->action);
        } else if (const auto* ret = std::get_if<history::ChildReturned>(&entry)) {
            line = render_action(ret->call) + " -> " + ret->value;
        } else {
            continue;
        }
        if (!out.empty()) out += '\n';
        out += std::to_string(++k) + " = " + line;
    }
    return out;
}

std::string_view base_actions_doc() { return kBaseActions; }
std::string_view general_instruction_template() { return kGeneralTemplate; }

std::string build_prompt(const PolicyFrame& frame, const Observation& obs, const PolicyLibrary& library,
                         const PromptOptions& options)
{
    const auto& spec = *frame.spec;
    std::string head = instantiate(spec, library, options);
    head += "\n\nOBJECTIVE:\n" + frame.objective + "\nOBSERVATION:\n";
    std::string tail = "\nURL:\n" + obs.url + "\nPREVIOUS ACTIONS:\n" + format_history(frame);

    const std::size_t fixed_chars = head.size() + tail.size();
    if (estimate_tokens(head + tail) > spec.prompt_budget) {
        throw Error(ErrorKind::BudgetImpossible,
                    "policy '" + spec.name + "' needs " + std::to_string(estimate_tokens(head + tail)) +
                        " tokens before the observation; budget is " + std::to_string(spec.prompt_budget));
    }
    const std::size_t observation_budget = (spec.prompt_budget * 4 - fixed_chars) / 4;
    return head + truncate_to_budget(serialize_elements(obs), observation_budget) + tail;
}

PolicySpec policy_spec_from_json(std::string_view json_text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
        PolicySpec spec;
        spec.name = doc.at("name").get<std::string>();
        spec.description = doc.value("description", "");
        spec.instruction = doc.at("instruction").get<std::string>();
        spec.examples = doc.value("examples", std::vector<std::string>{});
        spec.callable = doc.value("callable", std::vector<std::string>{});
        spec.prompt_budget = doc.value("prompt_budget", kDefaultPromptBudget);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidFormat, std::string("policy spec: ") + e.what());
    }
}

std::string policy_spec_to_json(const PolicySpec& spec)
{
    nlohmann::ordered_json doc;
    doc["name"] = spec.name;
    doc["description"] = spec.description;
    doc["instruction"] = spec.instruction;
    doc["examples"] = spec.examples;
    doc["callable"] = spec.callable;
    doc["prompt_budget"] = spec.prompt_budget;
    return doc.dump(2) + "\n";
}

PolicySpec load_policy_spec(const std::filesystem::path& path)
{
    return policy_spec_from_json(read_file(path));
}

void save_policy_spec(const PolicySpec& spec, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidFormat, "cannot write " + path.string());
    out << policy_spec_to_json(spec);
}

PolicyLibrary load_library(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::InvalidFormat, "not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    PolicyLibrary library;
    for (const auto& file : files) library.add(load_policy_spec(file));
    library.validate();
    return library;
}

PolicySpec make_flat_spec(const PolicyLibrary& library, std::string name, TokenCount prompt_budget)
{
    PolicySpec flat;
    flat.name = std::move(name);
    flat.description = "Single policy covering every task in the library";
    flat.prompt_budget = prompt_budget;
    flat.instruction = "{general_instruction_template}";
    for (const auto& policy_name : library.names_in_order()) {
        auto spec = library.get(policy_name);
        std::string specific = spec->instruction;
        for (auto placeholder : {"{general_instruction_template}", "{base_actions}", "{policies}", "{examples}"})
            detail::replace_all(specific, placeholder, "");
        specific = std::string(detail::trim(specific));
        if (!specific.empty()) flat.instruction += "\n\nWhen working on " + spec->name + " tasks:\n" + specific;
        flat.examples.insert(flat.examples.end(), spec->examples.begin(), spec->examples.end());
    }
    return flat;
}

} // namespace stackagent
