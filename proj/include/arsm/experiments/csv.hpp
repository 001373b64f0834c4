#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace arsm::experiments {

/// Bumped whenever a column schema changes.
inline constexpr int kTraceSchemaVersion = 1;

/// Trace writer: one '#' comment line carrying the schema version and run
/// metadata, a header row, then fixed-width rows. Numbers are written with 17
/// significant digits; missing values are empty fields.
class CsvWriter {
 public:
  using Cell = std::optional<double>;

  CsvWriter(std::ostream& out, const std::string& experiment, const std::string& metadata,
            std::vector<std::string> columns);

  void row(const std::vector<Cell>& cells);
  std::size_t columns() const { return columns_.size(); }
  std::size_t rows() const { return rows_; }

 private:
  std::ostream& out_;
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
};

std::string format_number(double v);

}  // namespace arsm::experiments
