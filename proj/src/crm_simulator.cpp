#include "crm_detail.hpp"
#include "stackagent/crm.hpp"
#include "stackagent/error.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace stackagent::crm {

namespace detail {

SearchCriteria criteria_of(const FlightDetails& flight)
{
    return {flight.from, flight.to, flight.departure, flight.return_date};
}

namespace {

SearchCriteria canonical(const SearchCriteria& c)
{
    return {stackagent::detail::to_upper(stackagent::detail::trim(c.from)),
            stackagent::detail::to_upper(stackagent::detail::trim(c.to)), normalize_date(c.departure),
            normalize_date(c.return_date)};
}

FlightOption random_option(Rng& rng)
{
    const int start = static_cast<int>(rng.below(24 * 60));
    const int duration = 60 + static_cast<int>(rng.below(6 * 60));
    return {format_time(start), format_time((start + duration) % (24 * 60))};
}

} // namespace

bool criteria_match(const SearchCriteria& searched, const FlightDetails& target)
{
    return canonical(searched) == canonical(criteria_of(target));
}

ResultRows flight_results(std::string_view scenario_id, const SearchCriteria& criteria, const FlightDetails* target)
{
    const auto c = canonical(criteria);
    Rng rng(fnv1a(c.from + "|" + c.to + "|" + c.departure + "|" + c.return_date, fnv1a(scenario_id)));
    const bool has_target = target != nullptr && criteria_match(criteria, *target);
    const FlightOption outward_target =
        target ? FlightOption{target->outward_departure_time, target->outward_arrival_time} : FlightOption{};
    const FlightOption inbound_target =
        target ? FlightOption{target->return_departure_time, target->return_arrival_time} : FlightOption{};

    ResultRows rows;
    auto fill = [&](std::array<FlightOption, kResultRows>& leg, const FlightOption& wanted) {
        const std::size_t slot = has_target ? rng.below(kResultRows) : kResultRows;
        for (std::size_t i = 0; i < kResultRows; ++i) {
            if (i == slot) {
                leg[i] = wanted;
                continue;
            }
            do {
                leg[i] = random_option(rng);
            } while (has_target && leg[i] == wanted);
        }
    };
    fill(rows.outward, outward_target);
    fill(rows.inbound, inbound_target);
    return rows;
}

std::pair<std::size_t, std::size_t> target_rows(std::string_view scenario_id, const FlightDetails& target)
{
    const auto rows = flight_results(scenario_id, criteria_of(target), &target);
    std::pair<std::size_t, std::size_t> out{0, 0};
    for (std::size_t i = 0; i < kResultRows; ++i) {
        if (rows.outward[i] == FlightOption{target.outward_departure_time, target.outward_arrival_time}) out.first = i;
        if (rows.inbound[i] == FlightOption{target.return_departure_time, target.return_arrival_time}) out.second = i;
    }
    return out;
}

} // namespace detail

namespace {

namespace ids = detail::ids;

constexpr std::string_view kFrom = "flight-from", kTo = "flight-to", kDeparture = "departure-date",
                           kReturn = "return-date", kTitle = "title", kFirst = "first-name", kLast = "last-name",
                           kGender = "gender", kDob = "dob", kCard = "card-number", kExpiry = "expiry", kCvc = "cvc",
                           kReference = "booking-reference", kConfirmReference = "confirm-reference";

enum class Flow { None, Book, ModifyFlights, ModifyPassenger };

const FlightDetails* target_flight(const Scenario& s)
{
    return s.details.flight ? &*s.details.flight : nullptr;
}

std::string target_reference(const Scenario& s)
{
    return s.details.booking ? s.details.booking->reference : std::string{};
}

std::string clean(std::string_view v) { return std::string(stackagent::detail::trim(v)); }

std::string display_date(std::string_view iso) { return to_form_date(iso); }

} // namespace

std::string_view to_string(Screen screen)
{
    switch (screen) {
    case Screen::SearchFlight: return "search-flight";
    case Screen::Results: return "results";
    case Screen::PassengerDetails: return "passenger-details";
    case Screen::Payment: return "payment";
    case Screen::FindBooking: return "find-booking";
    case Screen::BookingView: return "booking";
    case Screen::CancelConfirm: return "cancel-booking";
    case Screen::Done: return "done";
    }
    return "unknown";
}

std::vector<std::string> subgoals_for(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::FindFlight: return {"find-flight"};
    case ScenarioKind::BookFlight: return {"find-flight", "select-flights", "passenger-details", "payment"};
    case ScenarioKind::FindBooking: return {"find-booking"};
    case ScenarioKind::CancelBooking: return {"find-booking", "click-cancel", "confirm-cancel"};
    case ScenarioKind::ModifyPassenger: return {"find-booking", "click-modify", "save-passenger"};
    case ScenarioKind::ModifyFlights: return {"find-booking", "click-modify", "find-flight", "save-flights"};
    }
    return {};
}

std::string eval_to_json(const EvalResult& result)
{
    nlohmann::ordered_json j;
    j["success"] = result.success;
    j["task_progress"] = result.task_progress;
    j["subgoals_hit"] = result.subgoals_hit;
    return j.dump();
}

struct Simulator::Session {
    Scenario scenario;
    std::vector<std::string> subgoals;
    mutable std::mutex mutex;

    Screen screen = Screen::SearchFlight;
    std::vector<Screen> back;
    Flow flow = Flow::None;
    std::map<std::string, std::string, std::less<>> form;
    std::map<std::string, Booking> store;
    std::optional<detail::SearchCriteria> last_search;
    detail::ResultRows rows;
    std::optional<std::size_t> outward, inbound;
    std::optional<FlightDetails> pending_flight;
    std::optional<PassengerDetails> pending_passenger;
    std::string current; // reference shown on BookingView / CancelConfirm
    std::optional<std::string> last_found;
    std::optional<std::string> created;
    std::string message;
    std::vector<std::string> ignored;
    std::size_t cursor = 0;
    bool finished = false;

    explicit Session(Scenario s) : scenario(std::move(s)), subgoals(subgoals_for(scenario.kind)) { restart(); }

    void restart()
    {
        const bool booking_task = scenario.kind != ScenarioKind::FindFlight && scenario.kind != ScenarioKind::BookFlight;
        screen = booking_task ? Screen::FindBooking : Screen::SearchFlight;
        flow = booking_task ? Flow::None : Flow::Book;
        back.clear();
        form.clear();
        store.clear();
        if (scenario.details.booking) store[scenario.details.booking->reference] = *scenario.details.booking;
        last_search.reset();
        rows = {};
        outward.reset();
        inbound.reset();
        pending_flight.reset();
        pending_passenger.reset();
        current.clear();
        last_found.reset();
        created.reset();
        message.clear();
        ignored.clear();
        cursor = 0;
        finished = false;
    }

    void hit(std::string_view name)
    {
        if (cursor < subgoals.size() && subgoals[cursor] == name) ++cursor;
    }

    std::string field(std::string_view name) const
    {
        auto it = form.find(name);
        return it == form.end() ? std::string{} : clean(it->second);
    }

    void go(Screen next)
    {
        back.push_back(screen);
        screen = next;
    }

    // Rendering ------------------------------------------------------------

    Observation render() const
    {
        Observation obs;
        obs.url = scenario.url + "#" + std::string(to_string(screen));
        auto& els = obs.elements;
        std::uint64_t next_id = 1;
        auto text = [&](std::string t) { els.push_back({ElementId{next_id++}, "text", {}, std::move(t)}); };
        auto input = [&](std::string_view name, bool date = false) {
            WebElement el{ElementId{next_id++}, "input_text", {{"name", std::string(name)}}, {}};
            if (date) el.attributes.emplace_back("type", "datepicker");
            el.attributes.emplace_back("val", field(name));
            els.push_back(std::move(el));
        };
        auto button = [&](std::string label, std::string title = {}) {
            WebElement el{ElementId{next_id++}, "button", {}, std::move(label)};
            if (!title.empty()) el.attributes.emplace_back("title", std::move(title));
            els.push_back(std::move(el));
        };

        switch (screen) {
        case Screen::SearchFlight:
            text("Search flights");
            input(kFrom);
            input(kTo);
            input(kDeparture, true);
            input(kReturn, true);
            button("Search");
            break;
        case Screen::Results: {
            const auto& c = *last_search;
            text("Flights " + c.from + " to " + c.to);
            text("Outward " + display_date(c.departure));
            for (std::size_t i = 0; i < detail::kResultRows; ++i)
                button(outward == i ? "Selected" : "Select",
                       "outward " + c.from + " " + rows.outward[i].departure_time + " - " + c.to + " " +
                           rows.outward[i].arrival_time);
            text("Return " + display_date(c.return_date));
            for (std::size_t i = 0; i < detail::kResultRows; ++i)
                button(inbound == i ? "Selected" : "Select",
                       "return " + c.to + " " + rows.inbound[i].departure_time + " - " + c.from + " " +
                           rows.inbound[i].arrival_time);
            button(flow == Flow::ModifyFlights ? "Save" : "Confirm");
            break;
        }
        case Screen::PassengerDetails:
            text("Passenger details");
            input(kTitle);
            input(kFirst);
            input(kLast);
            input(kGender);
            input(kDob, true);
            button("Save");
            break;
        case Screen::Payment:
            text("Payment");
            input(kCard);
            input(kExpiry);
            input(kCvc);
            button("Book flight");
            break;
        case Screen::Done:
            text("Booking confirmed");
            text("Reference " + created.value_or(""));
            button("Manage bookings");
            break;
        case Screen::FindBooking:
            text("Find booking");
            input(kReference);
            button("Search");
            break;
        case Screen::BookingView: {
            const auto& b = store.at(current);
            text("Booking " + b.reference);
            text(b.flight.from + " to " + b.flight.to);
            text("Outward " + display_date(b.flight.departure) + " " + b.flight.outward_departure_time + " - " +
                 b.flight.outward_arrival_time);
            text("Return " + display_date(b.flight.return_date) + " " + b.flight.return_departure_time + " - " +
                 b.flight.return_arrival_time);
            button("Modify", "Modify flights");
            text(b.passenger.title + " " + b.passenger.first_name + " " + b.passenger.last_name);
            text(b.passenger.gender + ", born " + display_date(b.passenger.dob));
            button("Modify", "Modify passenger");
            button("Cancel booking");
            break;
        }
        case Screen::CancelConfirm:
            text("Cancel booking " + current + "?");
            text("Enter the booking reference to confirm");
            input(kConfirmReference);
            button("Confirm cancellation");
            break;
        }
        if (!message.empty()) text(message);
        return obs;
    }

    // Transitions ----------------------------------------------------------

    // Command bound to a clickable element on the current screen, or empty.
    std::string command_for(std::uint64_t id) const
    {
        switch (screen) {
        case Screen::SearchFlight: return id == ids::kSearchButton ? "search-flights" : "";
        case Screen::Results:
            if (id >= ids::kResultsOutwardFirst && id < ids::kResultsOutwardFirst + detail::kResultRows)
                return "select-outward:" + std::to_string(id - ids::kResultsOutwardFirst);
            if (id >= ids::kResultsReturnFirst && id < ids::kResultsReturnFirst + detail::kResultRows)
                return "select-return:" + std::to_string(id - ids::kResultsReturnFirst);
            if (id == ids::kResultsConfirm) return flow == Flow::ModifyFlights ? "save-flights" : "confirm-flights";
            return "";
        case Screen::PassengerDetails: return id == ids::kPassengerSave ? "save-passenger" : "";
        case Screen::Payment: return id == ids::kPaymentBook ? "book-flight" : "";
        case Screen::Done: return id == ids::kDoneManage ? "manage-bookings" : "";
        case Screen::FindBooking: return id == ids::kFindSearch ? "search-booking" : "";
        case Screen::BookingView:
            if (id == ids::kViewModifyFlights) return "modify-flights";
            if (id == ids::kViewModifyPassenger) return "modify-passenger";
            if (id == ids::kViewCancel) return "cancel";
            return "";
        case Screen::CancelConfirm: return id == ids::kCancelConfirm ? "confirm-cancel" : "";
        }
        return "";
    }

    void run(const std::string& command)
    {
        if (command == "search-flights") return search_flights();
        if (command.rfind("select-outward:", 0) == 0) {
            outward = std::stoul(command.substr(15));
            return;
        }
        if (command.rfind("select-return:", 0) == 0) {
            inbound = std::stoul(command.substr(14));
            return;
        }
        if (command == "confirm-flights" || command == "save-flights") return confirm_flights();
        if (command == "save-passenger") return save_passenger();
        if (command == "book-flight") return book_flight();
        if (command == "manage-bookings") {
            flow = Flow::None;
            return go(Screen::FindBooking);
        }
        if (command == "search-booking") return search_booking();
        if (command == "modify-flights") {
            flow = Flow::ModifyFlights;
            for (auto name : {kFrom, kTo, kDeparture, kReturn}) form.erase(std::string(name));
            if (scenario.kind == ScenarioKind::ModifyFlights && current == target_reference(scenario))
                hit("click-modify");
            return go(Screen::SearchFlight);
        }
        if (command == "modify-passenger") {
            flow = Flow::ModifyPassenger;
            const auto& p = store.at(current).passenger;
            form[std::string(kTitle)] = p.title;
            form[std::string(kFirst)] = p.first_name;
            form[std::string(kLast)] = p.last_name;
            form[std::string(kGender)] = p.gender;
            form[std::string(kDob)] = to_form_date(p.dob);
            if (scenario.kind == ScenarioKind::ModifyPassenger && current == target_reference(scenario))
                hit("click-modify");
            return go(Screen::PassengerDetails);
        }
        if (command == "cancel") {
            form.erase(std::string(kConfirmReference));
            if (scenario.kind == ScenarioKind::CancelBooking && current == target_reference(scenario))
                hit("click-cancel");
            return go(Screen::CancelConfirm);
        }
        if (command == "confirm-cancel") return confirm_cancel();
    }

    void search_flights()
    {
        detail::SearchCriteria c{stackagent::detail::to_upper(field(kFrom)), stackagent::detail::to_upper(field(kTo)),
                                 normalize_date(field(kDeparture)), normalize_date(field(kReturn))};
        if (c.from.empty() || c.to.empty() || c.departure.empty() || c.return_date.empty()) {
            message = "Fill in all search fields";
            return;
        }
        last_search = c;
        rows = detail::flight_results(scenario.id, c, target_flight(scenario));
        outward.reset();
        inbound.reset();
        if (target_flight(scenario) && detail::criteria_match(c, *target_flight(scenario))) hit("find-flight");
        go(Screen::Results);
    }

    void confirm_flights()
    {
        if (!outward || !inbound) {
            message = "Select an outward and a return flight";
            return;
        }
        const auto& c = *last_search;
        FlightDetails f{c.from,
                        c.to,
                        c.departure,
                        c.return_date,
                        rows.outward[*outward].departure_time,
                        rows.outward[*outward].arrival_time,
                        rows.inbound[*inbound].departure_time,
                        rows.inbound[*inbound].arrival_time};
        const bool on_target = target_flight(scenario) && f == *target_flight(scenario);
        if (flow == Flow::ModifyFlights) {
            store.at(current).flight = f;
            if (on_target && current == target_reference(scenario)) hit("save-flights");
            message = "Flights updated";
            return go(Screen::BookingView);
        }
        pending_flight = f;
        if (on_target) hit("select-flights");
        go(Screen::PassengerDetails);
    }

    void save_passenger()
    {
        PassengerDetails p{field(kTitle), field(kFirst), field(kLast), field(kGender), normalize_date(field(kDob))};
        if (p.title.empty() || p.first_name.empty() || p.last_name.empty() || p.gender.empty() || p.dob.empty()) {
            message = "Fill in all passenger fields";
            return;
        }
        const bool on_target = scenario.details.passenger && p == *scenario.details.passenger;
        if (flow == Flow::ModifyPassenger) {
            store.at(current).passenger = p;
            if (on_target && current == target_reference(scenario)) hit("save-passenger");
            message = "Passenger updated";
            return go(Screen::BookingView);
        }
        pending_passenger = p;
        if (on_target) hit("passenger-details");
        go(Screen::Payment);
    }

    void book_flight()
    {
        PaymentDetails pay{field(kCard), field(kExpiry), field(kCvc)};
        if (pay.card_number.empty() || pay.expiry.empty() || pay.cvc.empty()) {
            message = "Fill in all payment fields";
            return;
        }
        if (!pending_flight || !pending_passenger) {
            message = "No flight selected";
            return;
        }
        Booking b{new_booking_reference(scenario), *pending_flight, *pending_passenger, pay};
        store[b.reference] = b;
        created = b.reference;
        const auto& d = scenario.details;
        if (d.flight && d.passenger && d.payment && b.flight == *d.flight && b.passenger == *d.passenger &&
            pay == *d.payment)
            hit("payment");
        flow = Flow::None;
        go(Screen::Done);
    }

    void search_booking()
    {
        const auto ref = stackagent::detail::to_upper(field(kReference));
        if (store.count(ref) == 0) {
            message = "No booking found for " + ref;
            return;
        }
        current = ref;
        last_found = ref;
        if (ref == target_reference(scenario)) hit("find-booking");
        go(Screen::BookingView);
    }

    void confirm_cancel()
    {
        const auto ref = stackagent::detail::to_upper(field(kConfirmReference));
        if (ref != current) {
            message = "Reference does not match";
            return;
        }
        store.erase(current);
        if (scenario.kind == ScenarioKind::CancelBooking && ref == target_reference(scenario)) hit("confirm-cancel");
        message = "Booking " + ref + " cancelled";
        current.clear();
        form.erase(std::string(kReference));
        form.erase(std::string(kConfirmReference));
        flow = Flow::None;
        back.clear();
        screen = Screen::FindBooking;
    }

    void ignore(std::string what) { ignored.push_back(std::move(what)); }

    void apply(const Action& action)
    {
        if (finished) throw Error(ErrorKind::ScenarioFinished, "scenario " + scenario.id + " is finished");
        if (std::holds_alternative<actions::PolicyCall>(action) || std::holds_alternative<actions::Stop>(action))
            throw std::invalid_argument("only page operations can be applied to the simulator");

        const Observation before = render();
        auto element = [&](ElementId id) -> const WebElement& {
            const auto* el = before.find(id);
            if (!el)
                throw Error(ErrorKind::NoSuchElement,
                            "no element " + std::to_string(id.value) + " on " + std::string(to_string(screen)));
            return *el;
        };
        const std::string rendered = render_action(action);

        if (const auto* click = std::get_if<actions::Click>(&action)) {
            element(click->id);
            auto command = command_for(click->id.value);
            message.clear();
            if (command.empty()) return ignore(rendered);
            return run(command);
        }
        if (const auto* type = std::get_if<actions::Type>(&action)) {
            const auto& el = element(type->id);
            const auto* name = el.attribute("name");
            if (el.tag != "input_text" || !name) return ignore(rendered);
            message.clear();
            form[*name] = type->text;
            return;
        }
        if (const auto* hover = std::get_if<actions::Hover>(&action)) {
            element(hover->id);
            return ignore(rendered);
        }
        if (std::holds_alternative<actions::GoBack>(action)) {
            if (back.empty()) return ignore(rendered);
            message.clear();
            screen = back.back();
            back.pop_back();
            if (screen == Screen::BookingView && store.count(current) == 0) screen = Screen::FindBooking;
            if (screen == Screen::Results && !last_search) screen = Screen::SearchFlight;
            return;
        }
        ignore(rendered);
    }

    bool final_state_ok() const
    {
        const auto& d = scenario.details;
        const auto ref = target_reference(scenario);
        switch (scenario.kind) {
        case ScenarioKind::FindFlight: return last_search && d.flight && detail::criteria_match(*last_search, *d.flight);
        case ScenarioKind::BookFlight: {
            if (!created) return false;
            auto it = store.find(*created);
            return it != store.end() && d.flight && d.passenger && d.payment && it->second.flight == *d.flight &&
                   it->second.passenger == *d.passenger && it->second.payment == d.payment;
        }
        case ScenarioKind::FindBooking: return last_found == ref;
        case ScenarioKind::CancelBooking: return store.count(ref) == 0;
        case ScenarioKind::ModifyPassenger: {
            auto it = store.find(ref);
            return it != store.end() && d.passenger && it->second.passenger == *d.passenger;
        }
        case ScenarioKind::ModifyFlights: {
            auto it = store.find(ref);
            return it != store.end() && d.flight && it->second.flight == *d.flight;
        }
        }
        return false;
    }

    EvalResult evaluate() const
    {
        EvalResult r;
        r.subgoals_total = subgoals.size();
        r.subgoals_hit.assign(subgoals.begin(), subgoals.begin() + static_cast<std::ptrdiff_t>(cursor));
        r.task_progress = subgoals.empty() ? 0.0 : static_cast<double>(cursor) / static_cast<double>(subgoals.size());
        r.success = cursor == subgoals.size() && final_state_ok() ? 1 : 0;
        return r;
    }
};

Simulator::Simulator() = default;
Simulator::~Simulator() = default;

void Simulator::add(const Scenario& scenario)
{
    auto s = std::make_shared<Session>(scenario);
    std::lock_guard lock(mutex_);
    sessions_[scenario.id] = std::move(s);
}

bool Simulator::contains(std::string_view id) const
{
    std::lock_guard lock(mutex_);
    return sessions_.find(id) != sessions_.end();
}

std::shared_ptr<Simulator::Session> Simulator::session(std::string_view id) const
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorKind::UnknownScenario, "unknown scenario '" + std::string(id) + "'");
    return it->second;
}

Scenario Simulator::scenario(std::string_view id) const { return session(id)->scenario; }

Observation Simulator::reset(std::string_view id)
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    s->restart();
    return s->render();
}

Observation Simulator::apply(std::string_view id, const Action& action)
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    s->apply(action);
    return s->render();
}

Observation Simulator::observe(std::string_view id) const
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    return s->render();
}

Screen Simulator::screen(std::string_view id) const
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    return s->screen;
}

std::vector<std::string> Simulator::ignored_interactions(std::string_view id) const
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    return s->ignored;
}

void Simulator::finish(std::string_view id)
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    s->finished = true;
}

EvalResult Simulator::evaluate(std::string_view id) const
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    return s->evaluate();
}

std::map<std::string, Booking> Simulator::bookings(std::string_view id) const
{
    auto s = session(id);
    std::lock_guard lock(s->mutex);
    return s->store;
}

// Gold plans ----------------------------------------------------------------

namespace {

actions::Type fill(std::uint64_t id, std::string text) { return {ElementId{id}, std::move(text), false}; }
actions::Click click(std::uint64_t id) { return {ElementId{id}}; }

std::string flight_instruction(const FlightDetails& f)
{
    return "From " + f.from + " to " + f.to + ", departing " + to_form_date(f.departure) + ", returning " +
           to_form_date(f.return_date);
}

GoldPhase find_flight_phase(const FlightDetails& f)
{
    return {"find_flight",
            flight_instruction(f),
            {fill(ids::kSearchFrom, f.from), fill(ids::kSearchTo, f.to),
             fill(ids::kSearchDeparture, to_form_date(f.departure)),
             fill(ids::kSearchReturn, to_form_date(f.return_date)), click(ids::kSearchButton)},
            "Search results are shown"};
}

GoldPhase select_flights_phase(const Scenario& s, const FlightDetails& f)
{
    const auto [out_row, ret_row] = detail::target_rows(s.id, f);
    return {"select_flights",
            "Outward departing " + f.outward_departure_time + ", return departing " + f.return_departure_time,
            {click(ids::kResultsOutwardFirst + out_row), click(ids::kResultsReturnFirst + ret_row),
             click(ids::kResultsConfirm)},
            "Flights selected"};
}

std::string passenger_instruction(const PassengerDetails& p)
{
    return p.title + " " + p.first_name + " " + p.last_name + ", " + p.gender + ", born " + to_form_date(p.dob);
}

GoldPhase fill_passenger_phase(const PassengerDetails& p, const PassengerDetails* current)
{
    GoldPhase phase{"fill_passenger", passenger_instruction(p), {}, "Passenger details saved"};
    auto put = [&](std::uint64_t id, const std::string& want, const std::string* have) {
        if (!have || *have != want) phase.actions.push_back(fill(id, want));
    };
    put(ids::kPassengerTitle, p.title, current ? &current->title : nullptr);
    put(ids::kPassengerFirst, p.first_name, current ? &current->first_name : nullptr);
    put(ids::kPassengerLast, p.last_name, current ? &current->last_name : nullptr);
    put(ids::kPassengerGender, p.gender, current ? &current->gender : nullptr);
    const std::string dob = to_form_date(p.dob);
    const std::string current_dob = current ? to_form_date(current->dob) : std::string{};
    put(ids::kPassengerDob, dob, current ? &current_dob : nullptr);
    phase.actions.push_back(click(ids::kPassengerSave));
    return phase;
}

GoldPhase find_booking_phase(const std::string& ref)
{
    return {"find_booking",
            "Reference " + ref,
            {fill(ids::kFindReference, ref), click(ids::kFindSearch)},
            "Booking " + ref + " is open"};
}

} // namespace

std::vector<GoldPhase> gold_plan(const Scenario& s)
{
    const auto& d = s.details;
    std::vector<GoldPhase> plan;
    switch (s.kind) {
    case ScenarioKind::FindFlight: plan.push_back(find_flight_phase(*d.flight)); break;
    case ScenarioKind::BookFlight: {
        plan.push_back(find_flight_phase(*d.flight));
        plan.push_back(select_flights_phase(s, *d.flight));
        plan.push_back(fill_passenger_phase(*d.passenger, nullptr));
        const auto& pay = *d.payment;
        plan.push_back({"fill_payment",
                        "Card " + pay.card_number + ", expiry " + pay.expiry + ", CVC " + pay.cvc,
                        {fill(ids::kPaymentCard, pay.card_number), fill(ids::kPaymentExpiry, pay.expiry),
                         fill(ids::kPaymentCvc, pay.cvc), click(ids::kPaymentBook)},
                        "Booked, reference " + new_booking_reference(s)});
        break;
    }
    case ScenarioKind::FindBooking: plan.push_back(find_booking_phase(d.booking->reference)); break;
    case ScenarioKind::CancelBooking: {
        const auto& ref = d.booking->reference;
        plan.push_back(find_booking_phase(ref));
        plan.push_back({"cancel_booking",
                        "Reference " + ref,
                        {click(ids::kViewCancel), fill(ids::kCancelReference, ref), click(ids::kCancelConfirm)},
                        "Booking " + ref + " cancelled"});
        break;
    }
    case ScenarioKind::ModifyPassenger:
        plan.push_back(find_booking_phase(d.booking->reference));
        plan.push_back({"", "", {click(ids::kViewModifyPassenger)}, ""});
        plan.push_back(fill_passenger_phase(*d.passenger, &d.booking->passenger));
        break;
    case ScenarioKind::ModifyFlights: {
        plan.push_back(find_booking_phase(d.booking->reference));
        plan.push_back({"", "", {click(ids::kViewModifyFlights)}, ""});
        plan.push_back(find_flight_phase(*d.flight));
        auto select = select_flights_phase(s, *d.flight);
        select.answer = "Flights saved";
        plan.push_back(std::move(select));
        break;
    }
    }
    return plan;
}

std::string gold_answer(const Scenario& s)
{
    const auto ref = target_reference(s);
    switch (s.kind) {
    case ScenarioKind::FindFlight: return "Flights found";
    case ScenarioKind::BookFlight: return "Booked, reference " + new_booking_reference(s);
    case ScenarioKind::FindBooking: return "Booking " + ref + " is open";
    case ScenarioKind::CancelBooking: return "Cancelled booking " + ref;
    case ScenarioKind::ModifyPassenger: return "Updated passenger on " + ref;
    case ScenarioKind::ModifyFlights: return "Updated flights on " + ref;
    }
    return {};
}

std::vector<Action> gold_trace(const Scenario& s)
{
    std::vector<Action> out;
    for (auto& phase : gold_plan(s))
        for (auto& a : phase.actions) out.push_back(std::move(a));
    return out;
}

} // namespace stackagent::crm
