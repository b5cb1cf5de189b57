#include "csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace randex::cli {

namespace {

// split one CSV record; supports "..." quoting with "" as an escaped quote
std::vector<std::string> split_record(const std::string& line,
                                      std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty())
        fail(ErrorKind::bad_data, "stray quote in line " +
                                      std::to_string(line_no));
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    fail(ErrorKind::bad_data,
         "unterminated quote in line " + std::to_string(line_no));
  fields.push_back(field);
  return fields;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < headers.size(); ++j)
    if (headers[j] == name) return static_cast<int>(j);
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  const int j = column(name);
  if (j < 0) fail(ErrorKind::bad_data, "missing column '" + name + "'");
  return j;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::bad_data, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && line_no > 1) continue;  // tolerate trailing blank
    auto fields = split_record(line, line_no);
    if (line_no == 1) {
      table.headers = std::move(fields);
      for (std::size_t j = 0; j < table.headers.size(); ++j)
        if (table.headers[j].empty())
          fail(ErrorKind::bad_data,
               "empty header in column " + std::to_string(j + 1));
      continue;
    }
    if (fields.size() != table.headers.size())
      fail(ErrorKind::bad_data,
           "row " + std::to_string(line_no - 1) + " has " +
               std::to_string(fields.size()) + " fields, expected " +
               std::to_string(table.headers.size()));
    for (std::size_t j = 0; j < fields.size(); ++j)
      if (fields[j].empty())
        fail(ErrorKind::bad_data,
             "missing value at row " + std::to_string(line_no - 1) +
                 ", column '" + table.headers[j] + "'");
    table.rows.push_back(std::move(fields));
  }
  if (table.headers.empty())
    fail(ErrorKind::bad_data, "'" + path + "' is empty");
  if (table.rows.empty())
    fail(ErrorKind::bad_data, "'" + path + "' has no data rows");
  return table;
}

double parse_cell(const std::string& cell, std::size_t row_index,
                  const std::string& column_name) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (end != begin + cell.size() || errno == ERANGE || !std::isfinite(value))
    fail(ErrorKind::bad_data,
         "'" + cell + "' at row " + std::to_string(row_index + 1) +
             ", column '" + column_name + "' is not a finite number");
  return value;
}

asymptotics::Population read_population(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int col_a = table.require_column("a");
  const int col_b = table.require_column("b");

  std::vector<int> z_cols;
  for (std::size_t j = 0; j < table.headers.size(); ++j) {
    const std::string& h = table.headers[j];
    if (h == "a" || h == "b") continue;
    if (h.size() >= 2 && h[0] == 'z' &&
        h.find_first_not_of("0123456789", 1) == std::string::npos) {
      z_cols.push_back(static_cast<int>(j));
    } else {
      fail(ErrorKind::bad_data, "unexpected column '" + h +
                                    "' (population files hold a, b, z1..zK)");
    }
  }
  // enforce z1..zK naming with contiguous indices
  std::vector<int> order(z_cols.size(), -1);
  for (int j : z_cols) {
    const long idx = std::strtol(table.headers[static_cast<std::size_t>(j)]
                                     .c_str() + 1,
                                 nullptr, 10);
    if (idx < 1 || idx > static_cast<long>(z_cols.size()) ||
        order[static_cast<std::size_t>(idx - 1)] != -1)
      fail(ErrorKind::bad_data,
           "covariate columns must be named z1..zK without gaps");
    order[static_cast<std::size_t>(idx - 1)] = j;
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::VectorXd a(n), b(n);
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(z_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    a[i] = parse_cell(row[static_cast<std::size_t>(col_a)],
                      static_cast<std::size_t>(i), "a");
    b[i] = parse_cell(row[static_cast<std::size_t>(col_b)],
                      static_cast<std::size_t>(i), "b");
    for (std::size_t k = 0; k < order.size(); ++k)
      z(i, static_cast<Eigen::Index>(k)) =
          parse_cell(row[static_cast<std::size_t>(order[k])],
                     static_cast<std::size_t>(i),
                     table.headers[static_cast<std::size_t>(order[k])]);
  }
  return {std::move(a), std::move(b), std::move(z)};
}

}  // namespace randex::cli
