#pragma once

#include <string>
#include <vector>

namespace qkfe {

/// Shortest-safe decimal for round trips: 17 significant digits.
std::string format_double(double v);

std::string csv_row(const std::vector<double>& values);

/// Parses a numeric CSV with one header line; rows must all have the
/// header's width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace qkfe
