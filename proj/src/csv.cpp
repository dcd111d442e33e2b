#include "equiplan/csv.hpp"

#include <cstdio>

#include "equiplan/error.hpp"

namespace equiplan {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += '\n';
}

void CsvTable::add(const std::vector<Cell>& row) {
  if (row.size() != columns_) throw Error(ErrorCode::kDimensionMismatch, "CSV row width");
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) text_ += ',';
    if (const auto* s = std::get_if<std::string>(&row[i])) text_ += *s;
    else if (const auto* n = std::get_if<long long>(&row[i])) text_ += std::to_string(*n);
    else text_ += format_double(std::get<double>(row[i]));
  }
  text_ += '\n';
  ++rows_;
}

}  // namespace equiplan
