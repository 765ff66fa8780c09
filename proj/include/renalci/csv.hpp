#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace renalci {

/// Header row plus string cells. Quoted fields follow the usual
/// double-quote escaping.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws InputError if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field if it contains a comma, quote or newline.
std::string csv_field(std::string_view value);

/// Parses a finite double; throws InputError naming `context` otherwise.
double parse_double(std::string_view text, std::string_view context);

/// Shortest text that reads back as exactly `v`.
std::string format_double(double v);

}  // namespace renalci
