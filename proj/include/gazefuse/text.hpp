#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gazefuse::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

/// Strict whole-field parses; throw FormatError mentioning `what`.
double parse_double(std::string_view field, std::string_view what);
std::int64_t parse_int(std::string_view field, std::string_view what);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

/// Reads a comma-separated table with a mandatory header line. The header
/// must equal `expected_header` exactly (a trailing CR is tolerated). Blank
/// lines are skipped. Every row must have as many fields as the header.
/// Errors are FormatError prefixed with "<source>:<line>: ".
std::vector<CsvRow> read_csv(std::istream& in, std::string_view expected_header, std::string_view source);

/// Builds "<source>:<line>: <message>".
std::string at_line(std::string_view source, std::size_t line, std::string_view message);

}  // namespace gazefuse::text
