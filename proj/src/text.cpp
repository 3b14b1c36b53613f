#include "gazefuse/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>

#include "gazefuse/error.hpp"

namespace gazefuse::text {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double parse_double(std::string_view field, std::string_view what) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    throw FormatError(std::string(what) + ": '" + std::string(field) + "' is not a finite number");
  }
  return v;
}

std::int64_t parse_int(std::string_view field, std::string_view what) {
  std::int64_t v = 0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw FormatError(std::string(what) + ": '" + std::string(field) + "' is not an integer");
  }
  return v;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string at_line(std::string_view source, std::size_t line, std::string_view message) {
  return std::string(source) + ":" + std::to_string(line) + ": " + std::string(message);
}

namespace {

std::vector<std::string> split_line(std::string_view line, std::string_view source, std::size_t number) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '"' && fields.back().empty()) {
      quoted = true;
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw FormatError(at_line(source, number, "unterminated quoted field"));
  return fields;
}

}  // namespace

std::vector<CsvRow> read_csv(std::istream& in, std::string_view expected_header, std::string_view source) {
  std::string line;
  std::size_t number = 0;
  auto next = [&] {
    if (!std::getline(in, line)) return false;
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next()) throw FormatError(std::string(source) + ": empty file, expected header '" +
                                 std::string(expected_header) + "'");
  if (number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (line != expected_header) {
    throw FormatError(at_line(source, 1, "expected header '" + std::string(expected_header) + "', got '" + line + "'"));
  }
  const std::size_t columns = split_line(expected_header, source, 1).size();
  std::vector<CsvRow> rows;
  while (next()) {
    if (line.empty()) continue;
    auto fields = split_line(line, source, number);
    if (fields.size() != columns) {
      throw FormatError(at_line(source, number,
                                "expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size())));
    }
    rows.push_back({number, std::move(fields)});
  }
  return rows;
}

}  // namespace gazefuse::text
