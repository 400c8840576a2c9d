#include "stackagent/action.hpp"
#include "stackagent/autolabel.hpp"
#include "stackagent/crm.hpp"
#include "stackagent/error.hpp"
#include "stackagent/harness.hpp"
#include "stackagent/observation.hpp"
#include "stackagent/policy.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
namespace sa = stackagent;

namespace {

sa::PolicyNames names_of(const std::vector<std::string>& names) { return {names.begin(), names.end()}; }

py::dict replay_dict(const sa::harness::ReplayResult& r)
{
    py::dict d;
    d["suc"] = r.suc;
    d["prog"] = r.prog;
    d["subgoals_hit"] = r.subgoals_hit;
    d["num_actions"] = r.num_actions;
    d["prompt_tokens"] = r.prompt_tokens_total;
    d["completion_tokens"] = r.completion_tokens_total;
    d["failure"] = r.failure ? py::object(py::str(std::string(sa::to_string(*r.failure)))) : py::object(py::none());
    return d;
}

py::dict eval_dict(const sa::crm::EvalResult& e)
{
    py::dict d;
    d["success"] = e.success;
    d["task_progress"] = e.task_progress;
    d["subgoals_hit"] = e.subgoals_hit;
    d["subgoals_total"] = e.subgoals_total;
    return d;
}

sa::crm::Scenario scenario_for(const std::string& kind, std::uint64_t seed)
{
    return kind.empty() ? sa::crm::generate_random_scenario(seed)
                        : sa::crm::generate_scenario(sa::crm::scenario_kind_from_string(kind), seed);
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    // Owned by the module for the life of the interpreter.
    static py::handle error_type = py::exception<sa::Error>(m, "Error").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const sa::Error& e) {
            py::object exc = error_type(std::string(e.what()));
            exc.attr("kind") = std::string(sa::to_string(e.kind()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    // Actions and observations.
    m.def(
        "canonical_action",
        [](const std::string& text, const std::vector<std::string>& policies) {
            return sa::render_action(sa::parse_action(text, names_of(policies)));
        },
        py::arg("text"), py::arg("policies") = std::vector<std::string>{});
    m.def(
        "is_page_operation",
        [](const std::string& text, const std::vector<std::string>& policies) {
            return sa::is_page_operation(sa::parse_action(text, names_of(policies)));
        },
        py::arg("text"), py::arg("policies") = std::vector<std::string>{});
    m.def(
        "parse_response",
        [](const std::string& raw, const std::vector<std::string>& policies) {
            const auto r = sa::parse_model_response(raw, names_of(policies));
            return py::make_tuple(r.reason, sa::render_action(r.action));
        },
        py::arg("raw"), py::arg("policies") = std::vector<std::string>{});
    m.def("estimate_tokens", [](const std::string& text) { return sa::estimate_tokens(text); });
    m.def("truncate_to_budget", [](const std::string& text, std::size_t budget) {
        return sa::truncate_to_budget(text, budget);
    });

    // Scenarios.
    m.def(
        "generate_scenario",
        [](std::uint64_t seed, const std::string& kind) { return sa::crm::scenario_to_json(scenario_for(kind, seed)); },
        py::arg("seed"), py::arg("kind") = "");
    m.def("objective_for", [](const std::string& scenario_json) {
        return sa::crm::objective_for(sa::crm::scenario_from_json(scenario_json));
    });
    m.def("gold_trace", [](const std::string& scenario_json) {
        std::vector<std::string> out;
        for (const auto& a : sa::crm::gold_trace(sa::crm::scenario_from_json(scenario_json)))
            out.push_back(sa::render_action(a));
        return out;
    });

    py::class_<sa::crm::Simulator>(m, "Simulator")
        .def(py::init<>())
        .def("add",
             [](sa::crm::Simulator& s, const std::string& scenario_json) {
                 const auto scenario = sa::crm::scenario_from_json(scenario_json);
                 s.add(scenario);
                 return scenario.id;
             })
        .def("reset", [](sa::crm::Simulator& s,
                         const std::string& id) { return sa::serialize_elements(s.reset(id)); })
        .def("apply",
             [](sa::crm::Simulator& s, const std::string& id, const std::string& action) {
                 return sa::serialize_elements(s.apply(id, sa::parse_action(action, {})));
             })
        .def("observe", [](const sa::crm::Simulator& s, const std::string& id) {
            return sa::serialize_elements(s.observe(id));
        })
        .def("url", [](const sa::crm::Simulator& s, const std::string& id) { return s.observe(id).url; })
        .def("evaluate", [](const sa::crm::Simulator& s, const std::string& id) { return eval_dict(s.evaluate(id)); });

    // Episodes.
    m.def(
        "run_gold_episode",
        [](const std::string& kind, std::uint64_t seed, const std::string& agent, const std::string& library_dir) {
            const auto variant = sa::harness::agent_variant_from_string(agent);
            const auto scenario = sa::crm::generate_scenario(sa::crm::scenario_kind_from_string(kind), seed);
            const auto library = sa::harness::library_for(sa::load_library(library_dir), variant);
            auto provider = sa::harness::gold_provider(scenario, variant);
            sa::harness::EpisodeRecord record;
            {
                py::gil_scoped_release release;
                record = sa::harness::run_crm_episode(scenario, seed, variant, library, provider);
            }
            return py::make_tuple(sa::harness::record_to_json(record), record.steps);
        },
        py::arg("kind"), py::arg("seed"), py::arg("agent"), py::arg("library_dir"));
    m.def("replay_trace", [](const std::vector<std::string>& lines) {
        return replay_dict(sa::harness::replay_trace(lines));
    });

    // Autolabeling and prompt synthesis.
    m.def("label_prompts", [](const std::string& demo_json, const std::string& vocab_json) {
        const auto demo = sa::autolabel::demo_from_json(demo_json);
        const auto vocab = sa::autolabel::label_vocab_from_json(vocab_json);
        std::vector<std::string> prompts;
        std::optional<sa::autolabel::LabeledStep> previous;
        for (std::size_t i = 0; i < demo.demo.steps.size(); ++i) {
            prompts.push_back(sa::autolabel::autolabel_prompt(demo.demo, i, previous, vocab));
            if (i < demo.labels.size()) previous = demo.labels[i];
        }
        return prompts;
    });
    m.def("synthesize_prompts", [](const std::string& demos_dir) {
        const auto out = sa::autolabel::synthesize_prompts(sa::autolabel::load_demos(demos_dir));
        std::vector<std::string> specs{sa::policy_spec_to_json(out.planner)};
        for (const auto& p : out.policies) specs.push_back(sa::policy_spec_to_json(p));
        return specs;
    });
}
