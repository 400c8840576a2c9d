#pragma once

#include "stackagent/action.hpp"
#include "stackagent/observation.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stackagent::crm {

enum class ScenarioKind { FindFlight, BookFlight, FindBooking, CancelBooking, ModifyPassenger, ModifyFlights };

inline constexpr std::array<ScenarioKind, 6> kAllKinds{
    ScenarioKind::FindFlight,    ScenarioKind::BookFlight,      ScenarioKind::FindBooking,
    ScenarioKind::CancelBooking, ScenarioKind::ModifyPassenger, ScenarioKind::ModifyFlights};

/// "FIND_FLIGHT", ...
std::string_view to_string(ScenarioKind kind);
/// "TASK_FIND_FLIGHT", ... as used in the scenario document.
std::string task_name(ScenarioKind kind);
/// Accepts both spellings. Throws Error(ConfigInvalid).
ScenarioKind scenario_kind_from_string(std::string_view name);

/// Dates are YYYY-MM-DD; times use the h:MMam/pm form of the scenario API.
struct FlightDetails {
    std::string from;
    std::string to;
    std::string departure;
    std::string return_date;
    std::string outward_departure_time;
    std::string outward_arrival_time;
    std::string return_departure_time;
    std::string return_arrival_time;
    bool operator==(const FlightDetails&) const = default;
};

struct PassengerDetails {
    std::string title;
    std::string first_name;
    std::string last_name;
    std::string gender;
    std::string dob;
    bool operator==(const PassengerDetails&) const = default;
};

struct PaymentDetails {
    std::string card_number;
    std::string expiry;
    std::string cvc;
    bool operator==(const PaymentDetails&) const = default;
};

struct Booking {
    std::string reference;
    FlightDetails flight;
    PassengerDetails passenger;
    std::optional<PaymentDetails> payment;
    bool operator==(const Booking&) const = default;
};

/// Kind-specific data. `booking` is the pre-existing booking for the
/// booking kinds; `flight`/`passenger`/`payment` are the target values.
struct ScenarioDetails {
    std::optional<FlightDetails> flight;
    std::optional<PassengerDetails> passenger;
    std::optional<PaymentDetails> payment;
    std::optional<Booking> booking;
    bool operator==(const ScenarioDetails&) const = default;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::FindFlight;
    std::string id;
    std::string url;
    ScenarioDetails details;
    bool operator==(const Scenario&) const = default;
};

inline constexpr std::string_view kDefaultBaseUrl = "https://airline-crm.local";

/// Twelve IATA codes used for generated routes.
const std::array<std::string_view, 12>& airports();

/// Kind drawn from the seed, then details as generate_scenario.
Scenario generate_random_scenario(std::uint64_t seed, std::string_view base_url = kDefaultBaseUrl);
Scenario generate_scenario(ScenarioKind kind, std::uint64_t seed, std::string_view base_url = kDefaultBaseUrl);

/// Scenario document: {"scenario", "id", "url", "details"} in that order.
std::string scenario_to_json(const Scenario& scenario, int indent = 4);
Scenario scenario_from_json(std::string_view json_text);

/// Natural-language task statement given to the root policy.
std::string objective_for(const Scenario& scenario);

/// Reference the simulator assigns to the booking created by BOOK_FLIGHT.
std::string new_booking_reference(const Scenario& scenario);

/// "MM/DD/YYYY" from "YYYY-MM-DD" (other input returned unchanged).
std::string to_form_date(std::string_view iso_date);
/// Canonical YYYY-MM-DD for either format; otherwise the trimmed input.
std::string normalize_date(std::string_view date);

enum class Screen { SearchFlight, Results, PassengerDetails, Payment, FindBooking, BookingView, CancelConfirm, Done };
std::string_view to_string(Screen screen);

struct EvalResult {
    int success = 0;
    double task_progress = 0.0;
    std::vector<std::string> subgoals_hit;
    std::size_t subgoals_total = 0;
    bool operator==(const EvalResult&) const = default;
};

std::string eval_to_json(const EvalResult& result);

/// Ordered subgoal names for a kind.
std::vector<std::string> subgoals_for(ScenarioKind kind);

/// One contiguous piece of the gold trace handled by a single skill.
/// An empty instruction means the root acts directly.
struct GoldPhase {
    std::string skill;
    std::string instruction;
    std::vector<Action> actions;
    std::string answer;
};

std::vector<GoldPhase> gold_plan(const Scenario& scenario);
/// Final answer the root gives when the task is done.
std::string gold_answer(const Scenario& scenario);
/// Concatenation of gold_plan actions.
std::vector<Action> gold_trace(const Scenario& scenario);

/// In-process simulator. Each scenario id owns isolated state; calls for
/// different ids may run concurrently.
class Simulator {
public:
    Simulator();
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// Registers the scenario (replacing any state for the same id).
    void add(const Scenario& scenario);
    bool contains(std::string_view id) const;
    Scenario scenario(std::string_view id) const;

    /// Fresh state on the kind's initial screen. Throws Error(UnknownScenario).
    Observation reset(std::string_view id);
    /// Throws Error(UnknownScenario | NoSuchElement | ScenarioFinished).
    Observation apply(std::string_view id, const Action& action);
    Observation observe(std::string_view id) const;
    Screen screen(std::string_view id) const;
    /// Interactions that had no effect, in order.
    std::vector<std::string> ignored_interactions(std::string_view id) const;
    /// Further apply calls throw ScenarioFinished.
    void finish(std::string_view id);
    EvalResult evaluate(std::string_view id) const;
    /// Current bookings table.
    std::map<std::string, Booking> bookings(std::string_view id) const;

private:
    struct Session;
    std::shared_ptr<Session> session(std::string_view id) const;

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
};

} // namespace stackagent::crm
