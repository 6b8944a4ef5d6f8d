#include "cli/table.hpp"

#include "pspin/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace pspin::cli {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw Error("table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

void write_csv_header(std::ostream& out, const Table& t) {
  for (const auto& m : t.meta) out << "# " << m << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const std::vector<Cell>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
  out << '\n';
}

void write_csv(std::ostream& out, const Table& t) {
  write_csv_header(out, t);
  for (const auto& r : t.rows) write_csv_row(out, r);
}

void write_json(std::ostream& out, const Table& t) {
  nlohmann::ordered_json j;
  j["meta"] = t.meta;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json o;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (const auto* d = std::get_if<double>(&r[i]))
        o[t.columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d) : nlohmann::ordered_json(format_real(*d));
      else if (const auto* n = std::get_if<long long>(&r[i]))
        o[t.columns[i]] = *n;
      else
        o[t.columns[i]] = std::get<std::string>(r[i]);
    }
    j["rows"].push_back(std::move(o));
  }
  out << j.dump(2) << '\n';
}

}  // namespace pspin::cli
