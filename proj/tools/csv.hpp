#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "randex/asymptotics.hpp"
#include "randex/error.hpp"

namespace randex::cli {

// Strict CSV: first row is headers, comma separator, optional "..."
// quoting with "" escapes, '.' decimal point, no missing values. Every
// violation is a bad_data error naming the row and column.
struct CsvTable {
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;

  // index of a header, or -1
  int column(const std::string& name) const;
  // same, but missing columns are a bad_data error
  int require_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// cell -> double with row/column diagnostics on failure
double parse_cell(const std::string& cell, std::size_t row_index,
                  const std::string& column_name);

// Population file: columns a, b and z1..zK (contiguous from z1; K may be
// 0). Any other column is rejected.
asymptotics::Population read_population(const std::string& path);

}  // namespace randex::cli
