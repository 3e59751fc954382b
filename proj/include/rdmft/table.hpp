#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace rdmft {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Rectangular table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  int columns() const { return static_cast<int>(header.size()); }
  int column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Doubles use 17 significant digits ("%.17g"); NaN and infinities print as
/// nan, inf, -inf.
std::string format_cell(const Cell& cell);

/// RFC 4180: CRLF line ends, fields quoted only when they contain a comma,
/// quote, CR or LF. Throws PreconditionError if a row has the wrong width.
void write_csv(const Table& table, std::ostream& out);
/// Throws Error on I/O failure.
void emit_csv(const Table& table, const std::filesystem::path& path);

}  // namespace rdmft
