#include "arsm/experiments/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace arsm::experiments {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::string& experiment, const std::string& metadata,
                     std::vector<std::string> columns)
    : out_(out), columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("CsvWriter: no columns");
  out_ << "# arsm-trace schema=" << kTraceSchemaVersion << " experiment=" << experiment;
  if (!metadata.empty()) out_ << ' ' << metadata;
  out_ << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("CsvWriter::row: wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (cells[i]) out_ << format_number(*cells[i]);
  }
  out_ << '\n';
  ++rows_;
}

}  // namespace arsm::experiments
