#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace volcast {

// Formats a double with 17 significant digits, enough for exact
// decimal -> binary round-trips. All emitted CSVs use this.
std::string format_double(double v);

// Splits one CSV line on commas. None of the formats handled here quote
// fields, so a plain split is the whole grammar. Empty fields are kept.
std::vector<std::string_view> split_csv_line(std::string_view line);

// Parses a double field; throws DataError mentioning `context` on failure.
double parse_double_field(std::string_view field, const std::string& context);

} // namespace volcast
