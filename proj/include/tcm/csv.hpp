#pragma once

// RFC 4180 CSV: CRLF record separators, a header row, fields quoted when they
// contain a comma, quote, CR or LF, quotes doubled inside quoted fields.
// Numbers use the shortest round-trip form with '.' as decimal separator.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace tcm::csv {

std::string format_number(double x);
std::string quote(const std::string& field);

class Writer {
 public:
  /// Opens (truncates) the file and writes the header.
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);
  void row(const std::vector<double>& values);
  std::size_t columns() const { return columns_; }
  /// Flushes and throws std::runtime_error on any stream failure.
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
  /// Parsed numeric value; throws std::invalid_argument on non-numeric text.
  double number(std::size_t row, const std::string& name) const;
};

/// Parses a whole document. Accepts CRLF or LF; throws std::invalid_argument
/// on unterminated quotes or rows whose width differs from the header.
Table parse(std::istream& in);
Table read(const std::filesystem::path& path);

}  // namespace tcm::csv
