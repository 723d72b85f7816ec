#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptpack/quantization.hpp"

namespace promptpack {

// RFC 4180 table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string line_ending = "\n";  // "\r\n" when the input used it
};

// Quoted fields, doubled quotes, embedded separators and newlines are
// supported. Rows shorter than the header are padded with empty cells.
// Throws Error{ParseError} on an unterminated quote, a stray quote inside an
// unquoted field, a row wider than the header or a missing header.
Table parse_csv(std::string_view text);

// Quotes only the fields that need it. parse_csv(write_csv(t)) == t.
std::string write_csv(const Table& table);

// Finite decimal number with optional surrounding blanks; nullopt otherwise.
std::optional<double> parse_number(std::string_view cell);

// Columns whose non-empty cells all parse as numbers (and that have at least one).
std::vector<std::size_t> numeric_columns(const Table& table);

// Empty cells become missing entries.
NumericColumn column_as_numeric(const Table& table, std::size_t column);

// Shortest fixed-point rendering of value with at most `decimals` decimals
// (trailing zeros trimmed, "-0" normalised to "0").
std::string format_decimal(double value, int decimals);

// Decimal places needed to show a quantity at resolution `tolerance`:
// ceil(-log10(tolerance)) clamped to [0, 12].
int decimals_for_tolerance(double tolerance);

}  // namespace promptpack
