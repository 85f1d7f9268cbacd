#include "fracback/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "fracback/errors.hpp"

namespace fracback {

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
  if (!out_) {
    throw validation_error("cannot open CSV output file: " + path);
  }
}

void CsvWriter::comment(const std::string& text) {
  out_ << "# " << text << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  if (header_written_) {
    throw validation_error("CSV header written twice");
  }
  if (columns.empty()) {
    throw validation_error("CSV header must name at least one column");
  }
  columns_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
  header_written_ = true;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (!header_written_) {
    throw validation_error("CSV row written before header");
  }
  if (cells.size() != columns_) {
    throw validation_error("CSV row has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

std::string CsvWriter::num(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string CsvWriter::num(std::size_t value) {
  return std::to_string(value);
}

}  // namespace fracback
