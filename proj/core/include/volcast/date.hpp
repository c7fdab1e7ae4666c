#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace volcast {

// Calendar date. Ordering is lexicographic on (year, month, day), which is
// calendar order. That is all the pipeline needs from dates: splits and
// walk-forward audits compare them, file formats print them.
struct Date {
    std::int32_t year = 1970;
    std::int32_t month = 1;
    std::int32_t day = 1;

    auto operator<=>(const Date&) const = default;

    // Parses "YYYY-MM-DD". Throws DataError on anything else.
    static Date parse(std::string_view iso);

    std::string to_string() const;

    // Following calendar day (Gregorian, leap years handled).
    Date next_day() const;
};

} // namespace volcast
