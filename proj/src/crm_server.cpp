#include "stackagent/crm_server.hpp"

#include "stackagent/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <charconv>
#include <thread>

namespace stackagent::crm {

namespace {

int status_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::UnknownScenario: return 404;
    case ErrorKind::ScenarioFinished: return 409;
    default: return 400;
    }
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message)
{
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

void send_observation(httplib::Response& res, const Observation& obs)
{
    nlohmann::ordered_json j;
    j["url"] = obs.url;
    j["observation"] = serialize_elements(obs);
    res.set_content(j.dump(), "application/json");
}

std::string required_param(const httplib::Request& req, const char* name)
{
    if (!req.has_param(name)) throw Error(ErrorKind::InvalidFormat, std::string("missing query parameter '") + name + "'");
    return req.get_param_value(name);
}

} // namespace

struct Server::Impl {
    std::string base_url;
    std::atomic<std::uint64_t> next_seed;
    Simulator simulator;
    httplib::Server http;
    std::thread thread;

    Impl(std::uint64_t seed_base, std::string base) : base_url(std::move(base)), next_seed(seed_base) { routes(); }

    template <typename Handler>
    auto guarded(Handler handler)
    {
        return [handler](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(req, res);
            } catch (const Error& e) {
                send_error(res, status_for(e.kind()), to_string(e.kind()), e.what());
            } catch (const std::exception& e) {
                send_error(res, 400, "InvalidRequest", e.what());
            }
        };
    }

    void routes()
    {
        http.Get("/generate-random-scenario", guarded([this](const httplib::Request& req, httplib::Response& res) {
                     std::uint64_t seed = 0;
                     if (req.has_param("seed")) {
                         const auto text = req.get_param_value("seed");
                         auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
                         if (ec != std::errc{} || ptr != text.data() + text.size())
                             throw Error(ErrorKind::InvalidFormat, "seed must be a non-negative integer");
                     } else {
                         seed = next_seed++;
                     }
                     const auto scenario = req.has_param("kind")
                                               ? generate_scenario(scenario_kind_from_string(req.get_param_value("kind")),
                                                                   seed, base_url)
                                               : generate_random_scenario(seed, base_url);
                     simulator.add(scenario);
                     res.set_content(scenario_to_json(scenario), "application/json");
                 }));
        http.Get("/evaluate", guarded([this](const httplib::Request& req, httplib::Response& res) {
                     res.set_content(eval_to_json(simulator.evaluate(required_param(req, "scenario"))),
                                     "application/json");
                 }));
        http.Post("/reset", guarded([this](const httplib::Request& req, httplib::Response& res) {
                      send_observation(res, simulator.reset(required_param(req, "scenario")));
                  }));
        http.Post("/apply", guarded([this](const httplib::Request& req, httplib::Response& res) {
                      const auto id = required_param(req, "scenario");
                      std::string line;
                      try {
                          line = nlohmann::json::parse(req.body).at("action").get<std::string>();
                      } catch (const nlohmann::json::exception&) {
                          throw Error(ErrorKind::InvalidFormat, "body must be {\"action\": \"...\"}");
                      }
                      const auto action = parse_action(line, {});
                      if (!is_page_operation(action))
                          throw Error(ErrorKind::MalformedArguments, "only page operations can be applied");
                      send_observation(res, simulator.apply(id, action));
                  }));
        http.Get("/", guarded([this](const httplib::Request& req, httplib::Response& res) {
                     const auto obs = simulator.observe(required_param(req, "scenario"));
                     res.set_content(obs.url + "\n" + serialize_elements(obs) + "\n", "text/plain");
                 }));
    }
};

Server::Server(std::uint64_t seed_base, std::string base_url)
    : impl_(std::make_unique<Impl>(seed_base, std::move(base_url)))
{
}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port)
{
    int bound = port;
    if (port == 0) {
        bound = impl_->http.bind_to_any_port(host);
        if (bound <= 0) throw Error(ErrorKind::Transport, "cannot bind " + host);
    } else if (!impl_->http.bind_to_port(host, port)) {
        throw Error(ErrorKind::Transport, "cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return bound;
}

void Server::run(const std::string& host, int port)
{
    if (!impl_->http.listen(host, port))
        throw Error(ErrorKind::Transport, "cannot serve on " + host + ":" + std::to_string(port));
}

void Server::stop()
{
    if (!impl_) return;
    impl_->http.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

Simulator& Server::simulator() { return impl_->simulator; }

} // namespace stackagent::crm
