#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace pspin::cli {

using Cell = std::variant<double, long long, std::string>;

/// Column-oriented result table with a block of metadata lines.
struct Table {
  std::vector<std::string> meta;  ///< "key value" lines, written as '#' comments in CSV
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

/// 17 significant digits, '.' decimal, "inf"/"nan" spelled out.
std::string format_real(double x);
std::string format_cell(const Cell& c);

/// Header comment block, column line, rows.
void write_csv_header(std::ostream& out, const Table& t);
void write_csv_row(std::ostream& out, const std::vector<Cell>& row);
void write_csv(std::ostream& out, const Table& t);
/// {"meta": [...], "columns": [...], "rows": [{...}, ...]}
void write_json(std::ostream& out, const Table& t);

}  // namespace pspin::cli
