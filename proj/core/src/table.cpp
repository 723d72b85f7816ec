#include "promptpack/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "promptpack/errors.hpp"

namespace promptpack {

Table parse_csv(std::string_view text) {
  Table table;
  if (text.find("\r\n") != std::string_view::npos) table.line_ending = "\r\n";

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_open = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    record_open = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw Error(ErrorCode::ParseError, "csv line " + std::to_string(line) + ": stray quote in field");
        }
        in_quotes = true;
        field_was_quoted = true;
        record_open = true;
        break;
      case ',':
        end_field();
        record_open = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(c);
        record_open = true;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_was_quoted) {
          throw Error(ErrorCode::ParseError, "csv line " + std::to_string(line) + ": text after closing quote");
        }
        field.push_back(c);
        record_open = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::ParseError, "csv: unterminated quoted field");
  if (record_open || !field.empty()) end_record();

  if (records.empty()) throw Error(ErrorCode::ParseError, "csv: missing header row");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& row = records[r];
    if (row.size() > table.header.size()) {
      throw Error(ErrorCode::ParseError, "csv record " + std::to_string(r + 1) + " has more fields than the header");
    }
    row.resize(table.header.size());
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

void write_field(std::string& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void write_record(std::string& out, const std::vector<std::string>& record, const std::string& eol) {
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i > 0) out.push_back(',');
    write_field(out, record[i]);
  }
  // A lone empty field would read back as a blank line; quote it.
  if (record.size() == 1 && record[0].empty()) out += "\"\"";
  out += eol;
}

}  // namespace

std::string write_csv(const Table& table) {
  std::string out;
  write_record(out, table.header, table.line_ending);
  for (const auto& row : table.rows) write_record(out, row, table.line_ending);
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  const auto first = cell.find_first_not_of(" \t");
  if (first == std::string_view::npos) return std::nullopt;
  const auto last = cell.find_last_not_of(" \t");
  cell = cell.substr(first, last - first + 1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  // from_chars also accepts "inf"/"nan"; only plain decimal notation is numeric here.
  const char lead = cell.front() == '-' && cell.size() > 1 ? cell[1] : cell.front();
  if (!((lead >= '0' && lead <= '9') || lead == '.')) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<std::size_t> numeric_columns(const Table& table) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    bool any = false;
    bool all = true;
    for (const auto& row : table.rows) {
      if (row[c].find_first_not_of(" \t") == std::string::npos) continue;
      any = true;
      if (!parse_number(row[c])) {
        all = false;
        break;
      }
    }
    if (any && all) cols.push_back(c);
  }
  return cols;
}

NumericColumn column_as_numeric(const Table& table, std::size_t column) {
  NumericColumn out;
  out.name = table.header.at(column);
  out.values.reserve(table.rows.size());
  out.missing.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const auto v = parse_number(row.at(column));
    out.values.push_back(v.value_or(0.0));
    out.missing.push_back(!v.has_value());
  }
  return out;
}

std::string format_decimal(double value, int decimals) {
  decimals = std::clamp(decimals, 0, 17);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

int decimals_for_tolerance(double tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) return 0;
  const double d = std::ceil(-std::log10(tolerance) - 1e-12);
  return static_cast<int>(std::clamp(d, 0.0, 12.0));
}

}  // namespace promptpack
