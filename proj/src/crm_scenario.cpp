#include "crm_detail.hpp"
#include "stackagent/crm.hpp"
#include "stackagent/error.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

namespace stackagent::crm {

using detail::Rng;

namespace {

constexpr std::array<std::string_view, 12> kAirports{"JFK", "FLL", "BOS", "ORD", "LAX", "SFO",
                                                     "SEA", "ATL", "DFW", "DEN", "MIA", "LGA"};
constexpr std::array<std::string_view, 10> kMaleNames{"James", "Robert", "John",   "Michael", "David",
                                                      "Daniel", "Carlos", "Kenji", "Omar",    "Liam"};
constexpr std::array<std::string_view, 10> kFemaleNames{"Mary",  "Patricia", "Jennifer", "Linda", "Sofia",
                                                        "Aisha", "Mei",      "Emma",     "Olivia", "Grace"};
constexpr std::array<std::string_view, 12> kLastNames{"Smith",  "Johnson", "Garcia", "Nguyen", "Patel", "Kim",
                                                      "Miller", "Davis",   "Lopez",  "Wilson", "Chen",  "Okafor"};
constexpr std::string_view kIdAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
constexpr std::string_view kReferenceAlphabet = "ABCDEFGHJKLMNPQRSTUVWXYZ23456789";

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 6> kKindNames{{
    {ScenarioKind::FindFlight, "FIND_FLIGHT"},
    {ScenarioKind::BookFlight, "BOOK_FLIGHT"},
    {ScenarioKind::FindBooking, "FIND_BOOKING"},
    {ScenarioKind::CancelBooking, "CANCEL_BOOKING"},
    {ScenarioKind::ModifyPassenger, "MODIFY_PASSENGER"},
    {ScenarioKind::ModifyFlights, "MODIFY_FLIGHTS"},
}};

template <std::size_t N>
std::string pick(Rng& rng, const std::array<std::string_view, N>& table)
{
    return std::string(table[rng.below(N)]);
}

std::string random_string(Rng& rng, std::string_view alphabet, std::size_t length)
{
    std::string out;
    for (std::size_t i = 0; i < length; ++i) out += alphabet[rng.below(alphabet.size())];
    return out;
}

std::string digits(Rng& rng, std::size_t count)
{
    return random_string(rng, "0123456789", count);
}

FlightDetails random_flight(Rng& rng)
{
    FlightDetails f;
    auto from = rng.below(kAirports.size());
    auto to = (from + 1 + rng.below(kAirports.size() - 1)) % kAirports.size();
    f.from = std::string(kAirports[from]);
    f.to = std::string(kAirports[to]);

    const auto first_day = detail::days_from_civil(2023, 1, 1);
    const auto last_day = detail::days_from_civil(2024, 12, 31);
    constexpr std::int64_t kMaxStay = 60;
    const auto departure = first_day + static_cast<std::int64_t>(rng.below(last_day - first_day - kMaxStay + 1));
    const auto inbound = departure + 1 + static_cast<std::int64_t>(rng.below(kMaxStay));
    f.departure = detail::civil_string(departure);
    f.return_date = detail::civil_string(inbound);

    auto leg = [&rng](std::string& dep, std::string& arr) {
        const int start = static_cast<int>(rng.below(24 * 60));
        const int duration = 60 + static_cast<int>(rng.below(6 * 60));
        dep = detail::format_time(start);
        arr = detail::format_time((start + duration) % (24 * 60));
    };
    leg(f.outward_departure_time, f.outward_arrival_time);
    leg(f.return_departure_time, f.return_arrival_time);
    return f;
}

PassengerDetails random_passenger(Rng& rng)
{
    PassengerDetails p;
    const bool male = rng.below(2) == 0;
    p.gender = male ? "Male" : "Female";
    if (male) {
        p.title = rng.below(4) == 0 ? "Dr" : "Mr";
        p.first_name = pick(rng, kMaleNames);
    } else {
        constexpr std::array<std::string_view, 3> kTitles{"Mrs", "Ms", "Dr"};
        p.title = pick(rng, kTitles);
        p.first_name = pick(rng, kFemaleNames);
    }
    p.last_name = pick(rng, kLastNames);
    const auto first_day = detail::days_from_civil(1940, 1, 1);
    const auto last_day = detail::days_from_civil(2004, 12, 31);
    p.dob = detail::civil_string(first_day + static_cast<std::int64_t>(rng.below(last_day - first_day + 1)));
    return p;
}

PaymentDetails random_payment(Rng& rng)
{
    PaymentDetails p;
    p.card_number = "4" + digits(rng, 15);
    char expiry[8];
    std::snprintf(expiry, sizeof expiry, "%02d/%02d", static_cast<int>(1 + rng.below(12)),
                  static_cast<int>(25 + rng.below(5)));
    p.expiry = expiry;
    p.cvc = digits(rng, 3);
    return p;
}

Booking random_booking(Rng& rng)
{
    Booking b;
    b.reference = random_string(rng, kReferenceAlphabet, 6);
    b.flight = random_flight(rng);
    b.passenger = random_passenger(rng);
    b.payment = random_payment(rng);
    return b;
}

std::size_t kind_index(ScenarioKind kind)
{
    for (std::size_t i = 0; i < kAllKinds.size(); ++i)
        if (kAllKinds[i] == kind) return i;
    return 0;
}

nlohmann::ordered_json flight_json(const FlightDetails& f)
{
    nlohmann::ordered_json j;
    j["from"] = f.from;
    j["to"] = f.to;
    j["departure"] = f.departure;
    j["return"] = f.return_date;
    j["outward-departure-time"] = f.outward_departure_time;
    j["outward-arrival-time"] = f.outward_arrival_time;
    j["return-departure-time"] = f.return_departure_time;
    j["return-arrival-time"] = f.return_arrival_time;
    return j;
}

nlohmann::ordered_json passenger_json(const PassengerDetails& p)
{
    nlohmann::ordered_json j;
    j["title"] = p.title;
    j["first-name"] = p.first_name;
    j["last-name"] = p.last_name;
    j["gender"] = p.gender;
    j["dob"] = p.dob;
    return j;
}

nlohmann::ordered_json payment_json(const PaymentDetails& p)
{
    nlohmann::ordered_json j;
    j["card-number"] = p.card_number;
    j["expiry"] = p.expiry;
    j["cvc"] = p.cvc;
    return j;
}

FlightDetails flight_from(const nlohmann::json& j)
{
    return {j.at("from"),
            j.at("to"),
            j.at("departure"),
            j.at("return"),
            j.at("outward-departure-time"),
            j.at("outward-arrival-time"),
            j.at("return-departure-time"),
            j.at("return-arrival-time")};
}

PassengerDetails passenger_from(const nlohmann::json& j)
{
    return {j.at("title"), j.at("first-name"), j.at("last-name"), j.at("gender"), j.at("dob")};
}

PaymentDetails payment_from(const nlohmann::json& j)
{
    return {j.at("card-number"), j.at("expiry"), j.at("cvc")};
}

std::string describe_flight(const FlightDetails& f, bool with_times)
{
    std::string out = "from " + f.from + " to " + f.to + " departing " + to_form_date(f.departure);
    if (with_times) out += " at " + f.outward_departure_time;
    out += " and returning " + to_form_date(f.return_date);
    if (with_times) out += " at " + f.return_departure_time;
    return out;
}

std::string describe_passenger(const PassengerDetails& p)
{
    return p.title + " " + p.first_name + " " + p.last_name + ", " + p.gender + ", born " + to_form_date(p.dob);
}

} // namespace

namespace detail {

std::int64_t days_from_civil(int y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string civil_string(std::int64_t z)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(y + (m <= 2)), m, d);
    return buf;
}

std::string format_time(int minutes)
{
    const int hour = minutes / 60;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%d:%02d%s", hour % 12, minutes % 60, hour < 12 ? "am" : "pm");
    return buf;
}

} // namespace detail

const std::array<std::string_view, 12>& airports() { return kAirports; }

std::string_view to_string(ScenarioKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "UNKNOWN";
}

std::string task_name(ScenarioKind kind) { return "TASK_" + std::string(to_string(kind)); }

ScenarioKind scenario_kind_from_string(std::string_view name)
{
    auto upper = stackagent::detail::to_upper(stackagent::detail::trim(name));
    std::string_view bare = upper;
    if (bare.substr(0, 5) == "TASK_") bare.remove_prefix(5);
    for (const auto& [k, n] : kKindNames)
        if (n == bare) return k;
    throw Error(ErrorKind::ConfigInvalid, "unknown scenario kind '" + std::string(name) + "'");
}

Scenario generate_random_scenario(std::uint64_t seed, std::string_view base_url)
{
    Rng rng(seed);
    return generate_scenario(kAllKinds[rng.below(kAllKinds.size())], seed, base_url);
}

Scenario generate_scenario(ScenarioKind kind, std::uint64_t seed, std::string_view base_url)
{
    Rng rng(seed ^ (0xD1B54A32D192ED03ULL * (kind_index(kind) + 1)));
    Scenario s;
    s.kind = kind;
    s.id = random_string(rng, kIdAlphabet, 20);
    s.url = std::string(base_url) + "/?scenario=" + s.id;

    auto& d = s.details;
    switch (kind) {
    case ScenarioKind::FindFlight: d.flight = random_flight(rng); break;
    case ScenarioKind::BookFlight:
        d.flight = random_flight(rng);
        d.passenger = random_passenger(rng);
        d.payment = random_payment(rng);
        break;
    case ScenarioKind::FindBooking:
    case ScenarioKind::CancelBooking: d.booking = random_booking(rng); break;
    case ScenarioKind::ModifyPassenger:
        d.booking = random_booking(rng);
        do {
            d.passenger = random_passenger(rng);
        } while (*d.passenger == d.booking->passenger);
        break;
    case ScenarioKind::ModifyFlights:
        d.booking = random_booking(rng);
        do {
            d.flight = random_flight(rng);
        } while (*d.flight == d.booking->flight);
        break;
    }
    return s;
}

std::string scenario_to_json(const Scenario& scenario, int indent)
{
    nlohmann::ordered_json doc;
    doc["scenario"] = task_name(scenario.kind);
    doc["id"] = scenario.id;
    doc["url"] = scenario.url;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
    const auto& d = scenario.details;
    if (d.flight) details["flight"] = flight_json(*d.flight);
    if (d.passenger) details["passenger"] = passenger_json(*d.passenger);
    if (d.payment) details["payment"] = payment_json(*d.payment);
    if (d.booking) {
        nlohmann::ordered_json b;
        b["reference"] = d.booking->reference;
        b["flight"] = flight_json(d.booking->flight);
        b["passenger"] = passenger_json(d.booking->passenger);
        if (d.booking->payment) b["payment"] = payment_json(*d.booking->payment);
        details["booking"] = std::move(b);
    }
    doc["details"] = std::move(details);
    return doc.dump(indent);
}

Scenario scenario_from_json(std::string_view json_text)
{
    try {
        auto doc = nlohmann::json::parse(json_text);
        Scenario s;
        s.kind = scenario_kind_from_string(doc.at("scenario").get<std::string>());
        s.id = doc.at("id").get<std::string>();
        s.url = doc.at("url").get<std::string>();
        const auto& details = doc.at("details");
        if (details.contains("flight")) s.details.flight = flight_from(details.at("flight"));
        if (details.contains("passenger")) s.details.passenger = passenger_from(details.at("passenger"));
        if (details.contains("payment")) s.details.payment = payment_from(details.at("payment"));
        if (details.contains("booking")) {
            const auto& b = details.at("booking");
            Booking booking;
            booking.reference = b.at("reference").get<std::string>();
            booking.flight = flight_from(b.at("flight"));
            booking.passenger = passenger_from(b.at("passenger"));
            if (b.contains("payment")) booking.payment = payment_from(b.at("payment"));
            s.details.booking = std::move(booking);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidFormat, std::string("scenario document: ") + e.what());
    }
}

std::string objective_for(const Scenario& s)
{
    const auto& d = s.details;
    switch (s.kind) {
    case ScenarioKind::FindFlight: return "Find flights " + describe_flight(*d.flight, false) + ".";
    case ScenarioKind::BookFlight:
        return "Book the flight " + describe_flight(*d.flight, true) + " for " + describe_passenger(*d.passenger) +
               ". Pay with card " + d.payment->card_number + ", expiry " + d.payment->expiry + ", CVC " +
               d.payment->cvc + ". Report the booking reference.";
    case ScenarioKind::FindBooking: return "Open booking " + d.booking->reference + ".";
    case ScenarioKind::CancelBooking: return "Cancel booking " + d.booking->reference + ".";
    case ScenarioKind::ModifyPassenger:
        return "On booking " + d.booking->reference + ", change the passenger details to " +
               describe_passenger(*d.passenger) + ".";
    case ScenarioKind::ModifyFlights:
        return "On booking " + d.booking->reference + ", change the flights to " + describe_flight(*d.flight, true) +
               ".";
    }
    return {};
}

std::string new_booking_reference(const Scenario& scenario)
{
    Rng rng(detail::fnv1a(scenario.id) ^ 0x5851F42D4C957F2DULL);
    return random_string(rng, kReferenceAlphabet, 6);
}

std::string to_form_date(std::string_view iso_date)
{
    auto iso = normalize_date(iso_date);
    if (iso.size() != 10 || iso[4] != '-') return std::string(iso_date);
    return iso.substr(5, 2) + "/" + iso.substr(8, 2) + "/" + iso.substr(0, 4);
}

std::string normalize_date(std::string_view date)
{
    auto s = stackagent::detail::trim(date);
    auto all_digits = [](std::string_view v) {
        return !v.empty() && std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (s.size() == 10 && s[4] == '-' && s[7] == '-' && all_digits(s.substr(0, 4)) && all_digits(s.substr(5, 2)) &&
        all_digits(s.substr(8, 2)))
        return std::string(s);
    if (s.size() == 10 && s[2] == '/' && s[5] == '/' && all_digits(s.substr(0, 2)) && all_digits(s.substr(3, 2)) &&
        all_digits(s.substr(6, 4)))
        return std::string(s.substr(6, 4)) + "-" + std::string(s.substr(0, 2)) + "-" + std::string(s.substr(3, 2));
    return std::string(s);
}

} // namespace stackagent::crm
