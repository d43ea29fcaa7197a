#pragma once

// Minimal comma-separated text helpers. Fields never contain commas or
// quotes in the formats this library reads and writes.

#include <string>
#include <string_view>
#include <vector>

namespace volest::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);
/// Strict parse of a whole field; throws DataError naming `what` on failure.
double parse_double(std::string_view field, std::string_view what);
long parse_long(std::string_view field, std::string_view what);

/// Reads all lines of a text file, stripping '\r'. Throws IoError.
std::vector<std::string> read_lines(const std::string& path);
/// Whole file as bytes. Throws IoError.
std::string read_text(const std::string& path);
/// Truncates and writes. Throws IoError.
void write_text(const std::string& path, const std::string& content);

}  // namespace volest::csv
