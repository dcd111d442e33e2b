#pragma once

#include <string>
#include <variant>
#include <vector>

namespace equiplan {

/// Accumulates a CSV table in memory. Doubles use %.17g so files round-trip.
class CsvTable {
 public:
  using Cell = std::variant<std::string, long long, double>;

  explicit CsvTable(std::vector<std::string> header);

  void add(const std::vector<Cell>& row);
  std::size_t rows() const { return rows_; }
  const std::string& str() const { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

std::string format_double(double v);

}  // namespace equiplan
