#pragma once

#include <string>
#include <vector>

// Minimal CSV layer for the numeric tables the tools exchange: one header
// line, comma-separated double columns, no quoting. Numbers are written with
// shortest round-trip formatting, so a rerun with identical inputs produces
// byte-identical files.

namespace ramankit::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // rectangular, header.size() columns

  std::size_t column(const std::string& name) const;  // throws if absent
};

// Parse failures throw std::runtime_error with "path:line: message".
Table read_table(const std::string& path);

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

std::string format_double(double value);

}  // namespace ramankit::csv
