#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tadam {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Strict parse of a full token; throws std::invalid_argument with the token in
/// the message.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

/// Minimal RFC-4180-style table: a header row and string cells. Cells never
/// contain delimiters in our schemas, so no quoting is produced or accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws std::out_of_range naming the column.
  std::size_t column(std::string_view name) const;
};

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);

/// Writes `contents` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partial file. Throws std::runtime_error with the
/// path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace tadam
