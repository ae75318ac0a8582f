#pragma once

// Small text helpers shared by the CSV writers and readers.

#include <string>
#include <string_view>
#include <vector>

namespace qf::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_field(std::string_view field);

std::string_view trim(std::string_view s);

/// Strict parse of the whole string; returns false on trailing garbage.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, int& out);

} // namespace qf::text
