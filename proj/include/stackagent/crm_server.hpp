#pragma once

#include "stackagent/crm.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace stackagent::crm {

/// HTTP front end of a Simulator.
///
///   GET  /generate-random-scenario[?seed=N][&kind=K]  scenario document
///   GET  /evaluate?scenario=ID                        {success, task_progress, subgoals_hit}
///   POST /reset?scenario=ID                           {url, observation}
///   POST /apply?scenario=ID   body {"action": "..."}  {url, observation}
///   GET  /?scenario=ID                                current page as text
///
/// Errors come back as {"error": kind, "message": ...} with a 4xx status.
class Server {
public:
    /// Scenarios requested without a seed draw seeds from `seed_base` upward.
    explicit Server(std::uint64_t seed_base = 0, std::string base_url = std::string(kDefaultBaseUrl));
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port;
    /// the bound port is returned. Throws Error(Transport).
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

    Simulator& simulator();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace stackagent::crm
