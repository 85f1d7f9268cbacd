#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

namespace fracback {

/// Minimal CSV emitter: '.' decimal separator independent of locale,
/// shortest round-trip formatting for doubles, mandatory header row.
class CsvWriter {
public:
  /// Opens the file for writing; throws validation_error on failure.
  explicit CsvWriter(const std::string& path);

  /// Writes a '#'-prefixed comment line (before or after the header).
  void comment(const std::string& text);

  /// Writes the header row. Must be called exactly once before row().
  void header(const std::vector<std::string>& columns);

  /// Writes one record; cell count must match the header.
  void row(const std::vector<std::string>& cells);

  /// Shortest round-trip decimal rendering of a double ("inf"/"nan" spelled).
  [[nodiscard]] static std::string num(double value);
  [[nodiscard]] static std::string num(std::size_t value);

private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  bool header_written_ = false;
};

}  // namespace fracback
