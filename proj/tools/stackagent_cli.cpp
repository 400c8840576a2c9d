#include "stackagent/autolabel.hpp"
#include "stackagent/crm.hpp"
#include "stackagent/crm_server.hpp"
#include "stackagent/error.hpp"
#include "stackagent/harness.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

namespace sa = stackagent;
namespace fs = std::filesystem;

#ifndef STACKAGENT_DATA_DIR
#define STACKAGENT_DATA_DIR "data"
#endif

namespace {

constexpr int kInfraExit = 2;

sa::crm::Server* g_server = nullptr;

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sa::Error(sa::ErrorKind::ConfigInvalid, "cannot write " + path.string());
    out << text;
}

std::unique_ptr<sa::Provider> make_provider(const std::string& kind, const std::string& script,
                                            const std::string& endpoint, const std::string& model)
{
    if (kind == "scripted") {
        if (script.empty()) throw sa::Error(sa::ErrorKind::ConfigInvalid, "--script is required for a scripted provider");
        return std::make_unique<sa::ScriptedProvider>(sa::ScriptedProvider::load(script));
    }
    sa::HttpProviderConfig config;
    if (!endpoint.empty()) config.endpoint_url = endpoint;
    if (!model.empty()) config.model_name = model;
    return std::make_unique<sa::HttpProvider>(config);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stacked prompted-policy web agent with an airline CRM simulator"};
    app.require_subcommand(1);
    const std::string default_library = std::string(STACKAGENT_DATA_DIR) + "/policies";

    // scenario gen
    auto* scenario = app.add_subcommand("scenario", "Scenario utilities");
    scenario->require_subcommand(1);
    auto* gen = scenario->add_subcommand("gen", "Print a generated scenario document");
    std::uint64_t gen_seed = 0;
    std::string gen_kind;
    gen->add_option("--seed", gen_seed, "Seed")->required();
    gen->add_option("--kind", gen_kind, "Scenario kind; drawn from the seed when omitted");

    // run
    auto* run = app.add_subcommand("run", "Run one episode and print its record");
    std::string run_kind, run_agent = "stacked", run_provider = "scripted", run_library = default_library;
    std::string run_trace, run_endpoint, run_model;
    std::uint64_t run_seed = 0;
    bool run_no_cot = false;
    run->add_option("--kind", run_kind, "Scenario kind")->required();
    run->add_option("--seed", run_seed, "Scenario seed")->required();
    run->add_option("--agent", run_agent, "stacked or flat")->check(CLI::IsMember({"stacked", "flat"}));
    run->add_option("--provider", run_provider, "scripted (gold behaviour) or http")
        ->check(CLI::IsMember({"scripted", "http"}));
    run->add_option("--library", run_library, "Policy library directory");
    run->add_option("--trace", run_trace, "Write the JSONL trace here");
    run->add_option("--endpoint", run_endpoint, "Chat-completions URL for --provider http");
    run->add_option("--model", run_model, "Model name for --provider http");
    run->add_flag("--no-reason", run_no_cot, "Ask for ACTION only");

    // suite
    auto* suite = app.add_subcommand("suite", "Run a suite described by a JSON config");
    std::string suite_config;
    suite->add_option("--config", suite_config, "Suite config file")->required()->check(CLI::ExistingFile);

    // replay
    auto* replay = app.add_subcommand("replay", "Recompute metrics from a JSONL trace");
    std::string replay_trace;
    replay->add_option("--trace", replay_trace, "Trace file")->required()->check(CLI::ExistingFile);

    // autolabel
    auto* label = app.add_subcommand("autolabel", "Label demonstrations with skills");
    std::string label_demos, label_vocab, label_out, label_provider = "http", label_script, label_endpoint, label_model;
    label->add_option("--demos", label_demos, "Directory of demonstration files")->required()->check(CLI::ExistingDirectory);
    label->add_option("--vocab", label_vocab, "Label vocabulary file")->required()->check(CLI::ExistingFile);
    label->add_option("--out", label_out, "Directory for labeled demonstrations (default: print)");
    label->add_option("--provider", label_provider, "scripted or http")->check(CLI::IsMember({"scripted", "http"}));
    label->add_option("--script", label_script, "Script file for --provider scripted");
    label->add_option("--endpoint", label_endpoint, "Chat-completions URL");
    label->add_option("--model", label_model, "Model name");

    // gen-prompts
    auto* prompts = app.add_subcommand("gen-prompts", "Build planner and skill prompts from labeled demonstrations");
    std::string prompts_labeled, prompts_out, prompts_provider, prompts_script, prompts_endpoint, prompts_model;
    prompts->add_option("--labeled", prompts_labeled, "Directory of labeled demonstrations")
        ->required()
        ->check(CLI::ExistingDirectory);
    prompts->add_option("--out", prompts_out, "Directory for the policy files (default: print)");
    prompts->add_option("--reasons", prompts_provider, "Add reasoning to examples using scripted or http provider")
        ->check(CLI::IsMember({"scripted", "http"}));
    prompts->add_option("--script", prompts_script, "Script file for --reasons scripted");
    prompts->add_option("--endpoint", prompts_endpoint, "Chat-completions URL");
    prompts->add_option("--model", prompts_model, "Model name");

    // serve-crm
    auto* serve = app.add_subcommand("serve-crm", "Serve the CRM simulator over HTTP");
    int serve_port = 8080;
    std::string serve_host = "127.0.0.1";
    std::uint64_t serve_seed = 0;
    serve->add_option("--port", serve_port, "Port");
    serve->add_option("--host", serve_host, "Host");
    serve->add_option("--seed-base", serve_seed, "First seed for unseeded scenario requests");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto s = gen_kind.empty() ? sa::crm::generate_random_scenario(gen_seed)
                                      : sa::crm::generate_scenario(sa::crm::scenario_kind_from_string(gen_kind), gen_seed);
            std::cout << sa::crm::scenario_to_json(s) << "\n";
            return 0;
        }
        if (run->parsed()) {
            const auto agent = sa::harness::agent_variant_from_string(run_agent);
            const auto s = sa::crm::generate_scenario(sa::crm::scenario_kind_from_string(run_kind), run_seed);
            const auto library = sa::harness::library_for(sa::load_library(run_library), agent);
            sa::harness::EpisodeOptions options;
            options.prompt.chain_of_thought = !run_no_cot;
            std::unique_ptr<sa::Provider> provider;
            if (run_provider == "scripted")
                provider = std::make_unique<sa::ScriptedProvider>(sa::harness::gold_provider(s, agent));
            else
                provider = make_provider("http", "", run_endpoint, run_model);
            auto record = sa::harness::run_crm_episode(s, run_seed, agent, library, *provider, options);
            if (!run_trace.empty()) sa::harness::write_trace(record, run_trace);
            std::cout << sa::harness::record_to_json(record) << "\n";
            return record.failure && sa::harness::is_infrastructure_error(*record.failure) ? kInfraExit : 0;
        }
        if (suite->parsed()) {
            auto result = sa::harness::run_suite(sa::harness::load_suite_config(suite_config));
            std::cout << sa::harness::metrics_to_tsv(result.table);
            return result.table.infrastructure_errors == 0 ? 0 : kInfraExit;
        }
        if (replay->parsed()) {
            auto r = sa::harness::replay_trace_file(replay_trace);
            std::cout << "{\"suc\": " << r.suc << ", \"prog\": " << r.prog << ", \"num_actions\": " << r.num_actions
                      << ", \"prompt_tokens\": " << r.prompt_tokens_total
                      << ", \"completion_tokens\": " << r.completion_tokens_total << ", \"failure\": "
                      << (r.failure ? "\"" + std::string(sa::to_string(*r.failure)) + "\"" : std::string("null"))
                      << "}\n";
            return 0;
        }
        if (label->parsed()) {
            const auto vocab = sa::autolabel::load_label_vocab(label_vocab);
            auto provider = make_provider(label_provider, label_script, label_endpoint, label_model);
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(label_demos))
                if (e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                auto demo = sa::autolabel::load_demo(f);
                demo.labels = sa::autolabel::autolabel(demo.demo, vocab, *provider);
                const auto doc = sa::autolabel::demo_to_json(demo) + "\n";
                if (label_out.empty()) std::cout << doc;
                else write_text(fs::path(label_out) / f.filename(), doc);
            }
            return 0;
        }
        if (prompts->parsed()) {
            const auto demos = sa::autolabel::load_demos(prompts_labeled);
            sa::autolabel::SynthesisOptions options;
            if (!prompts_provider.empty()) {
                auto provider = make_provider(prompts_provider, prompts_script, prompts_endpoint, prompts_model);
                for (std::size_t d = 0; d < demos.size(); ++d)
                    for (std::size_t t = 0; t < demos[d].demo.steps.size(); ++t)
                        options.reasons[{d, t}] = sa::autolabel::augment_reasoning(demos[d].demo, t, *provider);
            }
            const auto out = sa::autolabel::synthesize_prompts(demos, options);
            std::vector<const sa::PolicySpec*> specs{&out.planner};
            for (const auto& p : out.policies) specs.push_back(&p);
            for (const auto* spec : specs) {
                const auto doc = sa::policy_spec_to_json(*spec) + "\n";
                if (prompts_out.empty()) std::cout << doc;
                else write_text(fs::path(prompts_out) / (spec->name + ".json"), doc);
            }
            return 0;
        }
        if (serve->parsed()) {
            sa::crm::Server server(serve_seed);
            g_server = &server;
            std::signal(SIGINT, [](int) {
                if (g_server) g_server->stop();
            });
            std::cerr << "serving on http://" << serve_host << ":" << serve_port << "\n";
            server.run(serve_host, serve_port);
            return 0;
        }
    } catch (const sa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sa::harness::is_infrastructure_error(e.kind()) ? kInfraExit : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
