#pragma once

#include "stackagent/crm.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace stackagent::crm::detail {

/// SplitMix64; portable and fully specified, unlike std:: distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d);
std::string civil_string(std::int64_t days);

/// Minutes after midnight in the h:MMam/pm form ("0:13pm" is 12:13).
std::string format_time(int minutes);

// Element ids of the fixed screen layouts.
namespace ids {
inline constexpr std::uint64_t kSearchFrom = 2, kSearchTo = 3, kSearchDeparture = 4, kSearchReturn = 5,
                               kSearchButton = 6;
inline constexpr std::uint64_t kResultsOutwardFirst = 3, kResultsReturnFirst = 7, kResultsConfirm = 10;
inline constexpr std::uint64_t kPassengerTitle = 2, kPassengerFirst = 3, kPassengerLast = 4, kPassengerGender = 5,
                               kPassengerDob = 6, kPassengerSave = 7;
inline constexpr std::uint64_t kPaymentCard = 2, kPaymentExpiry = 3, kPaymentCvc = 4, kPaymentBook = 5;
inline constexpr std::uint64_t kDoneManage = 3;
inline constexpr std::uint64_t kFindReference = 2, kFindSearch = 3;
inline constexpr std::uint64_t kViewModifyFlights = 5, kViewModifyPassenger = 8, kViewCancel = 9;
inline constexpr std::uint64_t kCancelReference = 3, kCancelConfirm = 4;
} // namespace ids

inline constexpr std::size_t kResultRows = 3;

struct FlightOption {
    std::string departure_time;
    std::string arrival_time;
    bool operator==(const FlightOption&) const = default;
};

struct SearchCriteria {
    std::string from;
    std::string to;
    std::string departure; // YYYY-MM-DD when parseable
    std::string return_date;
    bool operator==(const SearchCriteria&) const = default;
};

SearchCriteria criteria_of(const FlightDetails& flight);
bool criteria_match(const SearchCriteria& searched, const FlightDetails& target);

struct ResultRows {
    std::array<FlightOption, kResultRows> outward;
    std::array<FlightOption, kResultRows> inbound;
};

/// Deterministic result rows for a search. When the criteria match
/// `target`, its times occupy one row of each leg.
ResultRows flight_results(std::string_view scenario_id, const SearchCriteria& criteria,
                          const FlightDetails* target);

/// Row index holding the target's times, for criteria equal to the target.
std::pair<std::size_t, std::size_t> target_rows(std::string_view scenario_id, const FlightDetails& target);

} // namespace stackagent::crm::detail
